"""``workbench`` command line: run realizers and constructions on files, emit traces, tables and certificates."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

import click

from . import adversary as adv
from .choice import (
    WITNESSES,
    EmptySet,
    NoCandidate,
    cn_realizer,
    cr_realizer,
    llpo_nondet,
)
from .jump import (
    InconsistentName,
    JumpName,
    UFamily,
    jump_inverse,
    jump_stage,
    jump_width,
    limj_low_F,
    load_family,
    pi_converges,
    stabilized,
)
from .lowbasis import EmptyApproximant, low_basis_ncantor, low_basis_run
from .machines import AdviceSpaceTooLarge, BadArity, BadTag, FuelExhausted, Trace, apply_reduction, check_nondet
from .names import MalformedName, PrefixStream, is_binary_word, load_coclosed, pair, pair_countable
from .toys import composite_instances, composed_machine, padded, toy_pairs

SEMANTIC = (EmptySet, InconsistentName, NoCandidate, EmptyApproximant, BadTag, BadArity, adv.SearchInconclusive)
BUDGET = (FuelExhausted, adv.SearchBudgetExceeded, AdviceSpaceTooLarge)


class Workbench(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SEMANTIC as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(2)
        except BUDGET as exc:
            click.echo(f"budget exhausted: {exc}", err=True)
            ctx.exit(3)
        except (MalformedName, OSError, ValueError) as exc:
            click.echo(f"input error: {exc}", err=True)
            ctx.exit(1)


@dataclass
class Settings:
    fuel: Optional[int]
    stages: Optional[int]
    seed: int


def _pick(local, ctx, attr):
    return local if local is not None else getattr(ctx.obj, attr)


def _fixture(name: str) -> Path:
    return Path(str(resources.files("closedchoice") / "fixtures" / name))


def _family(path) -> UFamily:
    return load_family(path) if path else UFamily()


def _read_words(path) -> list:
    words = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    for i, w in enumerate(words, start=1):
        if not is_binary_word(w):
            raise MalformedName(f"{path}: line {i}: not a binary word")
    return words


def _read_rows(path) -> list:
    rows = []
    for i, ln in enumerate(Path(path).read_text().splitlines(), start=1):
        if not ln.strip():
            continue
        try:
            rows.append(tuple(int(t) for t in ln.replace(",", " ").split()))
        except ValueError as exc:
            raise MalformedName(f"{path}: line {i}: {exc}") from exc
    return rows


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


@click.group(cls=Workbench)
@click.option("--fuel", type=int, default=None, help="Step budget for realizers.")
@click.option("--stages", type=int, default=None, help="Stage budget for limit constructions.")
@click.option("--seed", type=int, default=0, help="Seed for randomly generated demo strategies.")
@click.pass_context
def cli(ctx, fuel, stages, seed):
    """Closed choice workbench."""
    ctx.obj = Settings(fuel, stages, seed)


@cli.command("choice-n")
@click.option("--input", "input_", type=click.Path(), default=None, help="coclosed.json over nat (default: bundled fixture).")
@click.option("--fuel", type=int, default=None)
@click.option("--trace", "trace_path", type=click.Path(), default=None, help="Write the WRITE/RESET trace as JSONL.")
@click.pass_context
def choice_n(ctx, input_, fuel, trace_path):
    """Mind-change realizer of choice on N."""
    name = load_coclosed(input_ or _fixture("nat_without_012.json"))
    fuel = _pick(fuel, ctx, "fuel")
    fuel = len(name.items) if fuel is None else fuel
    try:
        trace = cn_realizer(name, fuel)
    except FuelExhausted as exc:
        if trace_path and exc.partial is not None:
            exc.partial.write_jsonl(trace_path)
        raise
    if trace_path:
        trace.write_jsonl(trace_path)
    click.echo(f"result={trace.output[0]} resets={trace.resets}")


@cli.command("choice-r")
@click.option("--input", "input_", type=click.Path(), default=None, help="coclosed.json over real.")
@click.option("--backend", type=click.Choice(["oracle", "lowbasis"]), default="oracle")
@click.option("--precision", type=int, default=20)
def choice_r(input_, backend, precision):
    """Choice on R through choice on N and a Cantor-space backend."""
    name = load_coclosed(input_ or _fixture("reals.json"))
    res = cr_realizer(name, backend=backend, precision=precision)
    click.echo(f"n={res.n} mind_changes={res.mind_changes} path={res.word or '-'}")
    click.echo(f"{'j':>3}  {'q_j':<28} approx")
    for j, q in enumerate(res.cauchy.approximants):
        click.echo(f"{j:>3}  {str(q):<28} {float(q):.9f}")


def _lowbasis_common(ctx, input_, family, stages, bits, depth, emit_table):
    name = load_coclosed(input_ or _fixture("eight_cylinders.json"))
    fam = _family(family)
    run = low_basis_run(name, fam, stages=_pick(stages, ctx, "stages"), bits=bits, depth=depth)
    if emit_table:
        click.echo(run.table())
    click.echo(f"stabilized at stage {run.stable_from} (M*={run.m_star}), max flips per bit {max(run.flips, default=0)}")
    click.echo(f"decoded point: {run.point}")
    click.echo(f"decoded point ∈ A: {str(run.in_set).lower()}")


@cli.command("lowbasis")
@click.option("--input", "input_", type=click.Path(), default=None, help="coclosed.json over cantor (default: bundled 8-cylinder fixture).")
@click.option("--family", type=click.Path(), default=None, help="ufamily.json with odd-index sets.")
@click.option("--stages", type=int, default=None)
@click.option("--bits", type=int, default=None)
@click.option("--depth", type=int, default=None, help="Length of the decoded point.")
@click.option("--emit-table/--no-table", default=True)
@click.pass_context
def lowbasis(ctx, input_, family, stages, bits, depth, emit_table):
    """Uniform low basis run: stage x bit table and the decoded point."""
    _lowbasis_common(ctx, input_, family, stages, bits, depth, emit_table)


@cli.command("lowbasis-nc")
@click.option("--input", "input_", type=click.Path(), default=None, help="coclosed.json over nat_x_cantor.")
@click.option("--family", type=click.Path(), default=None)
@click.option("--stages", type=int, default=None)
@click.option("--depth", type=int, default=None)
@click.pass_context
def lowbasis_nc(ctx, input_, family, stages, depth):
    """Low basis on N x Cantor: least live slice, then the Cantor construction."""
    name = load_coclosed(input_ or _fixture("nat_x_cantor.json"))
    run = low_basis_ncantor(name, _family(family), stages=_pick(stages, ctx, "stages"), depth=depth)
    for m, (n, w) in enumerate(run.stages):
        click.echo(f"m={m:<3d} n={n:<3d} {w}")
    click.echo(f"stabilized at stage {run.stable_from}: n={run.n} point={run.point}")
    click.echo(f"decoded pair ∈ A: {str(run.in_set).lower()}")


@cli.command("jump")
@click.option("--point", type=click.Path(), required=True, help="Text file holding a binary word.")
@click.option("--family", type=click.Path(), default=None)
@click.option("--stage", type=int, default=0)
@click.option("--depth", type=int, default=None, help="Cover reserved indices of words up to this length.")
def jump(point, family, stage, depth):
    """Jump bits of a point at a bounded stage ('?' = undecided) and the decoded inverse."""
    words = _read_words(point)
    if len(words) != 1:
        raise MalformedName(f"{point}: expected one binary word")
    p = words[0]
    fam = _family(family)
    width = jump_width(len(p) if depth is None else depth)
    vals = [jump_stage(p, n, stage, fam) for n in range(width)]
    name = JumpName(width, frozenset(n for n, v in enumerate(vals) if v == 1),
                    frozenset(n for n, v in enumerate(vals) if v is None))
    click.echo(f"bits: {name.bits()}")
    click.echo(f"inverse: {jump_inverse(name).word}")


@cli.command("limj")
@click.option("--input", "input_", type=click.Path(), required=True, help="Sequence file, one binary word per line.")
@click.option("--family", type=click.Path(), default=None)
@click.option("--depth", type=int, default=16)
@click.option("--stages", type=int, default=None)
@click.pass_context
def limj(ctx, input_, family, depth, stages):
    """Limit of jump approximations of a sequence, decoded back to a point."""
    seq = _read_words(input_)
    qs = limj_low_F(seq, _family(family), depth, _pick(stages, ctx, "stages"))
    if not qs:
        raise MalformedName(f"{input_}: empty sequence")
    q, k = stabilized(qs)
    click.echo(f"approximations={len(qs)} stable_from={k}")
    click.echo(f"limit point: {jump_inverse(q).word}")


@cli.command("pi-check")
@click.option("--input", "input_", type=click.Path(), required=True, help="Sequence file, one binary word per line.")
@click.option("--point", type=click.Path(), required=True)
@click.option("--family", type=click.Path(), default=None)
@click.option("--stage", type=int, default=64)
@click.option("--indices", type=int, default=64, help="Check indices below this bound.")
def pi_check(input_, point, family, stage, indices):
    """Look for a refutation of convergence in the jump-induced topology."""
    seq = _read_words(input_)
    p = _read_words(point)[0]
    click.echo(str(pi_converges(seq, p, _family(family), (stage, indices))))


@cli.command("nondet-check")
@click.option("--machine", type=click.Choice(["llpo", "toy"]), default="llpo")
@click.option("--pair", "pair_index", type=int, default=0, help="Which bundled toy pair to compose.")
@click.option("--depth", type=int, default=6)
@click.option("--report", type=click.Path(), default=None, help="Write the full JSON report here.")
def nondet_check(machine, pair_index, depth, report):
    """Brute-force both conditions of a non-deterministic machine over a finite advice space."""
    length = 128
    if machine == "llpo":
        m = llpo_nondet()
        instances = []
        from itertools import product

        for p0 in product((0, 1), repeat=depth):
            for p1 in product((0, 1), repeat=depth):
                zeros = {i for i, p in enumerate((p0, p1)) if not any(p)}
                if zeros:
                    x = pair(padded(p0, length), padded(p1, length))
                    instances.append((x, lambda z, zeros=zeros: len(z) > 0 and z[0] in zeros))
    else:
        pairs = toy_pairs()
        if not 0 <= pair_index < len(pairs):
            raise MalformedName(f"--pair must be below {len(pairs)}")
        outer, inner = pairs[pair_index]
        m = composed_machine(outer, inner)
        instances = composite_instances(outer, inner, depth, length)
    rep = check_nondet(m, instances, fuel=2 * length, advice_length=2 * length)
    if report:
        Path(report).write_text(_dump(rep.to_json()))
    click.echo(f"machine={m.name} instances={len(instances)} advice={len(m.advice)}")
    click.echo(f"condition1={str(rep.condition1).lower()} condition2={str(rep.condition2).lower()}")
    if not rep.ok:
        raise SystemExit(1)


def _random_strategy(source, target, k, rng) -> adv.BoundedStrategy:
    pre = {w: frozenset(a for a in target.atoms if rng.random() < 0.3) for w in adv.windows(source.alphabet, k)}
    post = {y: rng.choice(source.ground) for y in target.ground}
    return adv.BoundedStrategy(k, pre, post)


@cli.command("adversary")
@click.option("--source", required=True, help="e.g. c4 or c2xc2")
@click.option("--target", required=True)
@click.option("--lookahead", type=int, default=1)
@click.option("--bound", type=int, default=3, help="Refuse lookaheads above this.")
@click.option("--certificate", type=click.Path(), default=None, help="Write the witness or certificate as JSON.")
@click.option("--replay", type=int, default=0, help="Replay this many random strategies against a certificate.")
@click.pass_context
def adversary_cmd(ctx, source, target, lookahead, bound, certificate, replay):
    """Bounded-lookahead reduction search between finite choice problems."""
    src, tgt = adv.parse_problem(source), adv.parse_problem(target)
    result = adv.search_reduction(src, tgt, lookahead, bound=bound)
    if certificate:
        Path(certificate).write_text(_dump(result.to_json()))
    if isinstance(result, adv.Witness):
        click.echo(f"witness {src.name} <= {tgt.name} at lookahead {lookahead}")
        for y, x in sorted(result.strategy.post.items()):
            click.echo(f"  answer {y} -> {x}")
        return
    click.echo(f"exhausted {src.name} <= {tgt.name} at lookahead {lookahead}")
    click.echo(f"  windows={result.window_count} classes={result.classes} post_maps={result.post_maps}")
    click.echo(f"  pre_tables={result.pre_tables} summed_over_classes={result.class_total}")
    rng = random.Random(ctx.obj.seed)
    for i in range(replay):
        tr = adv.replay_adversary(result, _random_strategy(src, tgt, lookahead, rng))
        click.echo(f"  replay {i}: target answer {tr.target_answer} -> {tr.final_answer}, "
                   f"allowed {tr.source_set}, wrong={str(tr.wrong).lower()}")


@cli.command("reduce")
@click.option("--witness", type=click.Choice(sorted(WITNESSES)), required=True)
@click.option("--input", "input_", type=click.Path(), default=None, help="coclosed.json over nat.")
@click.option("--sequence", type=click.Path(), default=None, help="For limdelta-from-cn: one row of naturals per sequence element.")
@click.option("--fuel", type=int, default=None)
@click.option("--trace", "trace_path", type=click.Path(), default=None)
@click.pass_context
def reduce_cmd(ctx, witness, input_, sequence, fuel, trace_path):
    """Run a registered reduction witness against its bundled realizer."""
    make_witness, make_realizer = WITNESSES[witness]
    if witness == "limdelta-from-cn":
        if not sequence:
            raise MalformedName("limdelta-from-cn needs --sequence")
        rows = _read_rows(sequence)
        inp = pair_countable([PrefixStream(r) for r in rows])
    else:
        name = load_coclosed(input_ or _fixture("nat_without_012.json"))
        if name.space != "nat":
            raise MalformedName("reductions here take nat names")
        inp = PrefixStream(name.items + (0,) * (len(name.items) + 4))
    fuel = _pick(fuel, ctx, "fuel")
    fuel = 4 * len(inp) + 8 if fuel is None else fuel
    out = apply_reduction(make_witness(), make_realizer(), inp, fuel)
    if isinstance(out, Trace):
        if trace_path:
            out.write_jsonl(trace_path)
        click.echo(f"output={list(out.output)} resets={out.resets}")
    else:
        click.echo(f"output={list(out)}")


def main():
    cli(prog_name="workbench")


if __name__ == "__main__":
    main()
