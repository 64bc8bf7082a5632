"""Stream machines, mind changes, non-determinism and reduction witnesses.

A machine is a step function ``(input prefix, fuel) -> output prefix``.
Plain stream machines are monotone; mind-change machines additionally emit
RESET events that erase the output tape.  Both expose ``trace``, which is
what the combinators use when a mind-change machine is involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from .names import (
    PrefixStream,
    _symbols,
    components,
    pair,
    pair_countable,
    pair_tuple,
    unpair,
    unpair_tuple,
)

WRITE, RESET, FAIL_EVENT = "WRITE", "RESET", "FAIL"
# Sierpinski output: a 0 symbol means the advice was recognised as failing.
FAIL = 0


class FuelExhausted(RuntimeError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class BadTag(ValueError):
    pass


class BadArity(ValueError):
    pass


class AdviceSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class TraceEvent:
    stage: int
    event: str
    payload: tuple = ()

    def to_json(self) -> dict:
        return {"stage": self.stage, "event": self.event, "payload": list(self.payload)}


@dataclass
class Trace:
    """Stage-indexed record of a run."""

    events: list = field(default_factory=list)
    stages: int = 0

    @classmethod
    def from_outputs(cls, outputs: Iterable[tuple]) -> "Trace":
        return cls.from_staged(enumerate(outputs))

    @classmethod
    def from_staged(cls, staged: Iterable[tuple]) -> "Trace":
        """Build a trace from (stage, current output) pairs; non-extensions become RESETs."""
        events = []
        prev: tuple = ()
        last = -1
        for stage, out in staged:
            out = tuple(out)
            last = stage
            if out[: len(prev)] != prev:
                events.append(TraceEvent(stage, RESET))
                prev = ()
            if len(out) > len(prev):
                events.append(TraceEvent(stage, WRITE, out[len(prev):]))
            prev = out
        return cls(events, last + 1)

    def output_at(self, stage: int) -> tuple:
        return self.snapshots([stage])[0]

    def snapshots(self, stages: Sequence[int]) -> list:
        """Outputs at each of the given stages, in one pass over the events."""
        order = sorted(range(len(stages)), key=lambda i: stages[i])
        result = [()] * len(stages)
        out: list = []
        k = 0
        for i in order:
            while k < len(self.events) and self.events[k].stage <= stages[i]:
                ev = self.events[k]
                if ev.event == RESET:
                    out = []
                elif ev.event == WRITE:
                    out.extend(ev.payload)
                k += 1
            result[i] = tuple(out)
        return result

    def revision_stages(self) -> list:
        """Stage 0, the last stage, and the stages on either side of every RESET."""
        marks = {0, max(self.stages - 1, 0)}
        for ev in self.events:
            if ev.event == RESET:
                marks.update({max(ev.stage - 1, 0), ev.stage})
        return sorted(marks)

    @property
    def output(self) -> tuple:
        return self.output_at(self.stages)

    @property
    def resets(self) -> int:
        return sum(ev.event == RESET for ev in self.events)

    @property
    def last_reset_stage(self) -> Optional[int]:
        stages = [ev.stage for ev in self.events if ev.event == RESET]
        return stages[-1] if stages else None

    def to_jsonl(self) -> str:
        return "".join(json.dumps(ev.to_json()) + "\n" for ev in self.events)

    def write_jsonl(self, path) -> None:
        Path(path).write_text(self.to_jsonl())


class StreamMachine:
    """Monotone machine: more input or more fuel only ever extends the output."""

    def __init__(self, step: Callable[[tuple, int], tuple], name: str = ""):
        self._step = step
        self.name = name or getattr(step, "__name__", "machine")

    def __call__(self, prefix, fuel: int) -> tuple:
        return tuple(self._step(_symbols(prefix), fuel))

    def trace(self, prefix, fuel: int) -> Trace:
        return Trace.from_outputs(self(prefix, f) for f in range(fuel + 1))

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


class MindChangeMachine:
    """Machine whose run is a trace of WRITE/RESET events."""

    def __init__(self, run: Callable[[tuple, int], Trace], name: str = ""):
        self._run = run
        self.name = name or getattr(run, "__name__", "machine")

    def trace(self, prefix, fuel: int) -> Trace:
        return self._run(_symbols(prefix), fuel)

    def __call__(self, prefix, fuel: int) -> tuple:
        return self.trace(prefix, fuel).output

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"


class Oracle:
    """A non-computable realizer stand-in: evaluated once on the whole available input."""

    def __init__(self, fn: Callable[[tuple, int], tuple], name: str = ""):
        self._fn = fn
        self.name = name or getattr(fn, "__name__", "oracle")

    def __call__(self, prefix, fuel: int) -> tuple:
        return tuple(self._fn(_symbols(prefix), fuel))

    def trace(self, prefix, fuel: int) -> Trace:
        return Trace.from_staged([(0, self(prefix, fuel))])


class LimitMachine:
    """Produces approximations p_0..p_M; its answer is whatever they settle on."""

    def __init__(self, step: Callable[[tuple, int], list], name: str = ""):
        self._step = step
        self.name = name or getattr(step, "__name__", "limit")

    def approximations(self, prefix, stages: int) -> list:
        return list(self._step(_symbols(prefix), stages))

    def limit(self, prefix, stages: int) -> tuple:
        """(last approximation, first stage from which it no longer changes)."""
        seq = self.approximations(prefix, stages)
        if not seq:
            raise FuelExhausted(f"{self.name}: no approximation within {stages} stages")
        k = len(seq) - 1
        while k > 0 and seq[k - 1] == seq[-1]:
            k -= 1
        return seq[-1], k


def identity_machine() -> StreamMachine:
    return StreamMachine(lambda r, fuel: r, "id")


def _combine(plan, name: str, machines: Sequence):
    """Lift ``plan(r, fuel) -> ([(machine, input, fuel)], join)`` to a machine.

    All-stream parts give a stream machine.  Otherwise every part is traced and
    the joined output is recomputed at each stage, so a RESET in any part shows
    up as a RESET of the combination whenever the join is not extended.
    """
    if all(isinstance(m, StreamMachine) for m in machines):
        def step(r, fuel):
            parts, join = plan(r, fuel)
            return join([m(x, f) for m, x, f in parts])
        return StreamMachine(step, name)

    def run(r, fuel):
        parts, join = plan(r, fuel)
        traces = [m.trace(x, f) for m, x, f in parts]
        stages = sorted({0, fuel} | {s for t in traces for s in t.revision_stages()})
        snaps = [t.snapshots(stages) for t in traces]
        return Trace.from_staged((s, join([sn[i] for sn in snaps])) for i, s in enumerate(stages))
    return MindChangeMachine(run, name)


def product(f, g):
    """Maps <u, v> to <F(u), G(v)>."""
    def plan(r, fuel):
        u, v = unpair(r)
        return [(f, u, fuel), (g, v, fuel)], lambda outs: pair(outs[0], outs[1]).symbols
    return _combine(plan, f"({f.name} x {g.name})", [f, g])


def coproduct(f, g):
    """Maps 0w to 0F(w) and 1w to 1G(w)."""
    def plan(r, fuel):
        if not r:
            return [], lambda outs: ()
        tag = r[0]
        if tag not in (0, 1):
            raise BadTag(f"coproduct tag must be 0 or 1, got {tag}")
        m = f if tag == 0 else g
        return [(m, r[1:], fuel)], lambda outs: (tag,) + tuple(outs[0])
    return _combine(plan, f"({f.name} + {g.name})", [f, g])


def parallelize(f):
    """Apply ``f`` to every component of a countable pairing.

    Component ``i`` is run with ``fuel - i`` so that the budget is dovetailed
    over the components and stays monotone in both input and fuel.
    """
    def plan(r, fuel):
        comps = components(r)
        parts = [(f, c, max(fuel - i, 0)) for i, c in enumerate(comps)]
        return parts, lambda outs: pair_countable(outs).symbols
    return _combine(plan, f"par({f.name})", [f])


def star(f, max_arity: int = 16):
    """Finite parallelization: input (i, <x_1, ..., x_i>) -> (i, <F(x_1), ..., F(x_i)>).

    Arity 0 passes the remainder through unchanged.
    """
    def plan(r, fuel):
        if not r:
            return [], lambda outs: ()
        arity, rest = r[0], r[1:]
        if arity > max_arity:
            raise BadArity(f"arity {arity} exceeds {max_arity}")
        if arity == 0:
            return [], lambda outs: (0,) + tuple(rest)
        parts = [(f, x, fuel) for x in unpair_tuple(rest, arity)]
        return parts, lambda outs: (arity,) + pair_tuple(outs).symbols
    return _combine(plan, f"star({f.name})", [f])


# -- reductions --------------------------------------------------------------

@dataclass
class ReductionWitness:
    """Pre-processing H and post-processing K; strong witnesses ignore the original input."""

    H: StreamMachine
    K: StreamMachine
    strong: bool = False
    name: str = ""


def apply_reduction(w: ReductionWitness, g, input, fuel: int):
    """K<input, G(H(input))>, or K(G(H(input))) for strong witnesses.

    For a mind-change realizer ``g`` the post-processing is replayed from
    scratch on every revised inner output and a Trace is returned; otherwise
    the output prefix is returned.
    """
    inp = _symbols(input)
    inner_in = w.H(inp, fuel)
    tg = g.trace(inner_in, fuel)

    def post(gout):
        return w.K(gout if w.strong else pair(inp, gout), fuel)

    if isinstance(g, MindChangeMachine):
        stages = tg.revision_stages()
        result = Trace.from_staged((s, post(o)) for s, o in zip(stages, tg.snapshots(stages)))
        if not result.output:
            raise FuelExhausted(f"{w.name}: no output committed at fuel {fuel}", result)
        return result
    out = post(tg.output)
    if not out:
        raise FuelExhausted(f"{w.name}: no output committed at fuel {fuel}", out)
    return out


# -- non-determinism ---------------------------------------------------------

def fails(sierpinski_output: Sequence[int]) -> bool:
    return FAIL in tuple(sierpinski_output)


@dataclass
class NondetMachine:
    """F1 computes an answer from <p, r>; F2 reports FAIL once advice r is seen to be wrong."""

    f1: StreamMachine
    f2: StreamMachine
    advice: list
    name: str = ""

    def _paired(self, p, r, advice_length: int):
        r = r.extended(advice_length) if isinstance(r, PrefixStream) else r
        return pair(p, r)

    def answer(self, p, r, fuel: int, advice_length: int = 64) -> tuple:
        return self.f1(self._paired(p, r, advice_length), fuel)

    def failed(self, p, r, fuel: int, advice_length: int = 64) -> bool:
        return fails(self.f2(self._paired(p, r, advice_length), fuel))


def compose_nondet(f: NondetMachine, g: NondetMachine) -> NondetMachine:
    """Advice <r, s>: s drives g and r drives f on g's output.

    H1<p,<r,s>> = F1<G1<p,s>, r>; H2 fails if G2<p,s> fails and otherwise
    reports F2<G1<p,s>, r>.
    """
    def split(x):
        p, rs = unpair(x)
        r, s = unpair(rs)
        return p, r, s

    def h1(x, fuel):
        p, r, s = split(x)
        y = g.f1(pair(p, s), fuel)
        return f.f1(pair(y, r), fuel)

    def h2(x, fuel):
        p, r, s = split(x)
        if fails(g.f2(pair(p, s), fuel)):
            return (FAIL,)
        y = g.f1(pair(p, s), fuel)
        return f.f2(pair(y, r), fuel)

    advice = [pair(r, s) for r in f.advice for s in g.advice]
    name = f"({f.name} . {g.name})"
    return NondetMachine(StreamMachine(h1, name + ".1"), StreamMachine(h2, name + ".2"), advice, name)


@dataclass
class InstanceReport:
    input: tuple
    successful: list
    wrong: list

    @property
    def condition1(self) -> bool:
        return bool(self.successful)

    @property
    def condition2(self) -> bool:
        return not self.wrong


@dataclass
class NondetReport:
    instances: list

    @property
    def condition1(self) -> bool:
        return all(i.condition1 for i in self.instances)

    @property
    def condition2(self) -> bool:
        return all(i.condition2 for i in self.instances)

    @property
    def ok(self) -> bool:
        return self.condition1 and self.condition2

    def to_json(self) -> dict:
        return {
            "condition1": self.condition1,
            "condition2": self.condition2,
            "instances": [
                {"input": list(i.input), "successful_advice": i.successful, "wrong_advice": i.wrong}
                for i in self.instances
            ],
        }


def check_nondet(m: NondetMachine, instances, fuel: int, max_advice: int = 256,
                 advice_length: int = 64) -> NondetReport:
    """Brute-force both conditions over a finite advice space.

    ``instances`` is a list of (input, predicate) pairs; the predicate
    decides whether an answer prefix is a correct solution.
    """
    if len(m.advice) > max_advice:
        raise AdviceSpaceTooLarge(f"{len(m.advice)} advices exceed the bound {max_advice}")
    reports = []
    for p, ok in instances:
        good, wrong = [], []
        for idx, r in enumerate(m.advice):
            if m.failed(p, r, fuel, advice_length):
                continue
            good.append(idx)
            if not ok(m.answer(p, r, fuel, advice_length)):
                wrong.append(idx)
        reports.append(InstanceReport(_symbols(p), good, wrong))
    return NondetReport(reports)
