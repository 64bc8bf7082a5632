"""End-to-end acceptance checks, one test per criterion.

Each test prints a PASS/FAIL line (also collected into the terminal summary)
and then asserts.  Reference answers come from brute-force oracles written
here, not from the package.
"""

import random
import time
from fractions import Fraction
from itertools import product as cartesian

from conftest import CRITERIA_LINES

from closedchoice.adversary import (
    BoundedStrategy,
    ExhaustionCertificate,
    Witness,
    parse_problem,
    replay_adversary,
    search_reduction,
    simulate,
    windows,
)
from closedchoice.choice import (
    cn_from_limdelta_witness,
    cn_from_ucn_witness,
    cn_machine,
    cn_realizer,
    cr_realizer,
    limdelta_from_cn_witness,
    limdelta_oracle,
    ucn_oracle,
)
from closedchoice.jump import UFamily, jump_inverse, limj_low_F, stabilized
from closedchoice.lowbasis import as_jump_name, check_limit_properties, low_basis_ncantor, low_basis_run
from closedchoice.machines import apply_reduction, check_nondet, coproduct, parallelize, product, star
from closedchoice.names import CoClosedName, PrefixStream, pair_countable, validate_cauchy
from closedchoice.toys import TOY_MACHINES, composed_machine, composite_instances, toy_pairs


def report(n, ok, detail, elapsed, limit):
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    line = f"{status} criterion {n}: {detail}; {elapsed:.2f}s (limit {limit}s)"
    CRITERIA_LINES.append(line)
    print(line)
    assert ok, line
    assert within, line


def rand_word(rng, lo, hi):
    return "".join(rng.choice("01") for _ in range(rng.randint(lo, hi)))


def avoids(point, words):
    return not any(point.startswith(w) for w in words)


def nat_items(excluded, pauses, rng):
    items = [e + 1 for e in excluded] + [0] * pauses
    rng.shuffle(items)
    return tuple(items)


def least_outside(excluded):
    n = 0
    while n in excluded:
        n += 1
    return n


# -- 1 -------------------------------------------------------------------------------

def test_criterion_1_choice_on_naturals():
    rng = random.Random(101)
    cases = []
    for _ in range(500):
        excluded = rng.sample(range(64), rng.randint(0, 63))
        cases.append((CoClosedName("nat", nat_items(excluded, rng.randint(0, 5), rng)), set(excluded)))
    start = time.perf_counter()
    bad = 0
    for name, excluded in cases:
        t = cn_realizer(name, len(name.items))
        m = least_outside(excluded)
        bad += not (t.output[0] == m and t.resets == m)
    elapsed = time.perf_counter() - start
    report(1, bad == 0, f"{500 - bad}/500 outputs and RESET counts equal min(A)", elapsed, 1.0)


# -- 2 -------------------------------------------------------------------------------

def test_criterion_2_unique_choice_pipeline():
    rng = random.Random(102)
    cases = []
    for _ in range(300):
        excluded = set(rng.sample(range(64), rng.randint(0, 63)))
        # a prefix of the name that runs a few pauses past the last exclusion
        items = nat_items(sorted(excluded), rng.randint(0, 3), rng) + (0,) * 8
        cases.append((PrefixStream(items), excluded))
    start = time.perf_counter()
    bad = 0
    for name, excluded in cases:
        out = apply_reduction(cn_from_ucn_witness(), ucn_oracle(), name, 4 * len(name.symbols) + 8)
        bad += out[0] in excluded
    elapsed = time.perf_counter() - start
    report(2, bad == 0, f"{300 - bad}/300 answers lie in A", elapsed, 1.0)


# -- 3 -------------------------------------------------------------------------------

def test_criterion_3_discrete_limit():
    rng = random.Random(103)
    seqs = []
    for _ in range(200):
        prefix = [tuple(rng.randint(0, 3) for _ in range(4)) for _ in range(rng.randint(0, 5))]
        tail = tuple(rng.randint(0, 3) for _ in range(4))
        seqs.append((prefix, tail))
    names = []
    for _ in range(200):
        excluded = set(rng.sample(range(12), rng.randint(0, 11)))
        names.append((PrefixStream(nat_items(sorted(excluded), rng.randint(0, 3), rng) + (0, 0)), excluded))

    def zeros(word):
        return PrefixStream(word, producer=lambda k: 0)

    start = time.perf_counter()
    bad = 0
    for prefix, tail in seqs:
        x = pair_countable([zeros(p) for p in prefix] + [zeros(tail)] * 40, length=600)
        out = apply_reduction(limdelta_from_cn_witness(), cn_machine(), x, 4 * len(x)).output
        limit = tail + (0,) * len(out)
        bad += not (out and out == limit[: len(out)])
    for name, excluded in names:
        out = apply_reduction(cn_from_limdelta_witness(), limdelta_oracle(), name, len(name.symbols) + 8)
        bad += out[0] != least_outside(excluded)
    elapsed = time.perf_counter() - start
    report(3, bad == 0, f"{400 - bad}/400 limits and members correct in both directions", elapsed, 2.0)


# -- 4 and 5 ------------------------------------------------------------------------

def rand_family(rng):
    return UFamily({
        2 * rng.randint(0, 40) + 1: (tuple(rand_word(rng, 0, 5) for _ in range(rng.randint(1, 4))), True)
        for _ in range(rng.randint(0, 6))
    })


def nonempty_exclusions(rng, count_hi):
    while True:
        ex = [rand_word(rng, 1, 5) for _ in range(rng.randint(0, count_hi))]
        if any(avoids("".join(b), ex) for b in cartesian("01", repeat=5)):
            return ex


def recount_flips(approximations):
    width = max(len(w) for w in approximations)
    return [sum(a[i] != b[i] for a, b in zip(approximations, approximations[1:])) for i in range(width)]


def test_criterion_4_uniform_low_basis():
    rng = random.Random(104)
    cases = []
    for _ in range(100):
        ex = nonempty_exclusions(rng, 8)
        items = []
        for w in ex:
            items.append(w)
            if rng.random() < 0.3:
                items.append(None)
        cases.append((CoClosedName("cantor", tuple(items)), ex, rand_family(rng)))
    start = time.perf_counter()
    passed = 0
    max_flips = 0
    for name, ex, fam in cases:
        run = low_basis_run(name, fam)
        monotone = all(a <= b for a, b in zip(run.test1, run.test1[1:]))
        flips = recount_flips(run.approximations)
        max_flips = max(max_flips, max(flips, default=0))
        point = jump_inverse(as_jump_name(run.limit)).word
        ok = (
            run.stable_from <= run.m_star
            and monotone
            and list(run.flips) == flips
            and point == run.point
            and avoids(point, ex)
            and check_limit_properties(run, name, fam) == []
        )
        passed += ok
    elapsed = time.perf_counter() - start
    report(4, passed == 100, f"{passed}/100 runs stable by M*, monotone, decoded into A (max flips per bit {max_flips})",
           elapsed, 30.0)


def test_criterion_5_naturals_times_cantor():
    rng = random.Random(105)
    cases = []
    for _ in range(100):
        items = [(rng.randint(0, 3), rand_word(rng, 0, 4)) for _ in range(rng.randint(0, 10))]
        cases.append((CoClosedName("nat_x_cantor", tuple(items)), items, rand_family(rng)))
    start = time.perf_counter()
    passed = 0
    for name, items, fam in cases:
        run = low_basis_ncantor(name, fam)
        own = [w for k, w in items if k == run.n]
        # the decoded pair avoids every cylinder in its slice, whatever the tail
        ok = run.in_set and all(avoids(run.point + tail, own) for tail in ("0" * 6, "1" * 6))
        passed += ok
    elapsed = time.perf_counter() - start
    report(5, passed == 100, f"{passed}/100 decoded pairs (n, x) lie in A", elapsed, 30.0)


# -- 6 -------------------------------------------------------------------------------

def test_criterion_6_low_limit_of_jumps():
    rng = random.Random(106)
    cases = []
    for _ in range(100):
        p = rand_word(rng, 16, 16)
        noise = [rand_word(rng, 16, 16) for _ in range(rng.randint(0, 5))]
        cases.append((noise + [p] * 2, p, rand_family(rng)))
    start = time.perf_counter()
    passed = 0
    for seq, p, fam in cases:
        q, _ = stabilized(limj_low_F(seq, fam, 16))
        passed += jump_inverse(q).word == p
    elapsed = time.perf_counter() - start
    report(6, passed == 100, f"{passed}/100 limits decode to the tail point", elapsed, 10.0)


# -- 7 -------------------------------------------------------------------------------

def test_criterion_7_independent_choice():
    pairs = toy_pairs(20)
    start = time.perf_counter()
    passed = 0
    total = 0
    for outer, inner in pairs:
        m = composed_machine(outer, inner)
        assert len(outer.machine().advice) <= 8 and len(inner.machine().advice) <= 8
        instances = composite_instances(outer, inner, 6)
        total += len(instances)
        rep = check_nondet(m, instances, fuel=256, advice_length=256)
        passed += bool(instances) and rep.condition1 and rep.condition2
    elapsed = time.perf_counter() - start
    report(7, passed == 20, f"{passed}/20 composed pairs satisfy both conditions over {total} inputs", elapsed, 30.0)


# -- 8 -------------------------------------------------------------------------------

def test_criterion_8_real_choice():
    rng = random.Random(108)
    cases = []
    for _ in range(100):
        ivs = []
        for _ in range(rng.randint(0, 10)):
            a = Fraction(rng.randint(-60, 60), rng.randint(1, 7))
            b = a + Fraction(rng.randint(1, 50), rng.randint(1, 7))
            ivs.append((a.numerator, a.denominator, b.numerator, b.denominator))
        cases.append(ivs)
    start = time.perf_counter()
    passed = 0
    for ivs in cases:
        res = cr_realizer(CoClosedName("real", tuple(ivs)), precision=20)
        q = res.cauchy.approximants[20]
        inside = any(Fraction(a, b) < q < Fraction(c, d) for a, b, c, d in ivs)
        passed += validate_cauchy(res.cauchy) and not inside
    elapsed = time.perf_counter() - start
    report(8, passed == 100, f"{passed}/100 approximants valid and outside the excluded union", elapsed, 10.0)


# -- 9 -------------------------------------------------------------------------------

def brute_refutes(source, target, strategy):
    """Some separated input and target answer drive the strategy to a wrong source answer."""
    k = strategy.lookahead
    pause = (source.pause,) * (k + 1)
    for chosen in cartesian((0, 1), repeat=len(source.atoms)):
        picked = [a for a, c in zip(source.atoms, chosen) if c]
        syms = pause + sum(((source.single_atom_symbol(a),) + pause for a in picked), ())
        src, tgt = simulate(source, strategy, syms)
        allowed = source.solutions(src)
        if allowed and any(strategy.post[y] not in allowed for y in (target.solutions(tgt) or target.ground)):
            return True
    return False


def test_criterion_9_adversary_separation():
    c4, c2c2 = parse_problem("c4"), parse_problem("c2xc2")
    rng = random.Random(109)
    notes = []
    ok = isinstance(search_reduction(c2c2, c4, 0), Witness) and isinstance(search_reduction(c2c2, c4, 1), Witness)
    notes.append(f"witness {ok}")
    elapsed_k2 = 0.0
    replays = 0
    for k in (1, 2):
        start = time.perf_counter()
        cert = search_reduction(c4, c2c2, k)
        if k == 2:
            elapsed_k2 = time.perf_counter() - start
        ok &= isinstance(cert, ExhaustionCertificate) and cert.pre_tables == cert.class_total
        for _ in range(50):
            density = rng.choice([0.0, 0.2, 0.5, 0.8])
            pre = {w: frozenset(a for a in c2c2.atoms if rng.random() < density) for w in windows(c4.alphabet, k)}
            s = BoundedStrategy(k, pre, {y: rng.choice(c4.ground) for y in c2c2.ground})
            t = replay_adversary(cert, s)
            ok &= t.wrong and brute_refutes(c4, c2c2, s)
            replays += 1
    report(9, bool(ok), f"witness at k<=1, certificates at k=1,2, {replays} replays all wrong", elapsed_k2, 60.0)


# -- 10 ------------------------------------------------------------------------------

def all_words(depth):
    for d in range(depth + 1):
        yield from cartesian((0, 1), repeat=d)


def ref_interleave(a, b):
    n = min(len(a), len(b))
    return tuple(x for i in range(n) for x in (a[i], b[i]))


def ref_product(f, g, r, fuel):
    return ref_interleave(f(r[0::2], fuel), g(r[1::2], fuel))


def ref_coproduct(f, g, r, fuel):
    if not r:
        return ()
    return (r[0],) + (f if r[0] == 0 else g)(r[1:], fuel)


def diagonal(limit):
    """Positions of the countable pairing, walked diagonal by diagonal: (position, row, column)."""
    z, d = 0, 0
    while z < limit:
        for col in range(d + 1):
            if z >= limit:
                return
            yield z, d - col, col
            z += 1
        d += 1


def ref_parallelize(f, r, fuel):
    rows = {}
    for z, i, j in diagonal(len(r)):
        rows.setdefault(i, []).append(r[z])
    count = 0
    while count in rows:
        count += 1
    outs = [f(tuple(rows[i]), max(fuel - i, 0)) for i in range(count)]
    res = []
    for _, i, j in diagonal(10 ** 6):
        if i >= count or j >= len(outs[i]):
            break
        res.append(outs[i][j])
    return tuple(res)


def nested_split(r, arity):
    # part c sits at positions whose binary form ends in exactly c ones (the last part takes the rest)
    parts = [[] for _ in range(arity)]
    for t, x in enumerate(r):
        c = 0
        while c < arity - 1 and (t >> c) & 1:
            c += 1
        parts[c].append(x)
    return [tuple(p) for p in parts]


def nested_join(outs):
    if len(outs) == 1:
        return tuple(outs[0])
    return ref_interleave(outs[0], nested_join(outs[1:]))


def ref_star(f, r, fuel):
    if not r:
        return ()
    arity, rest = r[0], r[1:]
    if arity == 0:
        return r
    return (arity,) + nested_join([f(x, fuel) for x in nested_split(rest, arity)])


def test_criterion_10_combinators():
    names = sorted(TOY_MACHINES)
    words = list(all_words(8))
    start = time.perf_counter()
    checked = mismatches = 0
    for fuel in (3, 12):
        for a in names:
            f = TOY_MACHINES[a]
            par, st = parallelize(f), star(f)
            for r in words:
                checked += 2
                mismatches += par(r, fuel) != ref_parallelize(f, r, fuel)
                mismatches += st(r, fuel) != ref_star(f, r, fuel)
                if r:
                    for arity in (2, 3):
                        checked += 1
                        x = (arity,) + r
                        mismatches += st(x, fuel) != ref_star(f, x, fuel)
            for b in names:
                g = TOY_MACHINES[b]
                prod, cop = product(f, g), coproduct(f, g)
                for r in words:
                    checked += 2
                    mismatches += prod(r, fuel) != ref_product(f, g, r, fuel)
                    mismatches += cop(r, fuel) != ref_coproduct(f, g, r, fuel)
    elapsed = time.perf_counter() - start
    report(10, mismatches == 0, f"{checked - mismatches}/{checked} combinator outputs match the definitions",
           elapsed, 10.0)
