"""Concrete choice realizers and the reduction witnesses between them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from math import ceil
from typing import Sequence

from .machines import (
    FAIL,
    WRITE,
    RESET,
    FuelExhausted,
    MindChangeMachine,
    NondetMachine,
    Oracle,
    ReductionWitness,
    StreamMachine,
    Trace,
    TraceEvent,
)
from .names import (
    CoClosedName,
    CylinderRegion,
    MalformedName,
    PrefixStream,
    RationalCauchy,
    _symbols,
    cantor_pair,
    cantor_unpair,
    components,
    pair_countable,
    project,
    unpair,
)


class EmptySet(ValueError):
    """The named closed set is empty, so there is nothing to choose."""


class NoCandidate(ValueError):
    pass


def _min_outside(excluded) -> int:
    return next(n for n in count() if n not in excluded)


# -- choice on the natural numbers -------------------------------------------

def _cn_run(r: tuple, fuel: int) -> Trace:
    # Stage 0 writes candidate 0; stage s consumes item s-1.  Each time the
    # candidate shows up among the exclusions the tape is erased and the
    # candidate moves up by one.  Otherwise the name is padded with 0.
    events = [TraceEvent(0, WRITE, (0,))]
    seen = set()
    c = 0
    for s in range(1, fuel + 1):
        if s - 1 < len(r) and r[s - 1] > 0:
            seen.add(r[s - 1] - 1)
        moved = False
        while c in seen:
            events.append(TraceEvent(s, RESET))
            c += 1
            moved = True
        events.append(TraceEvent(s, WRITE, (c,) if moved else (0,)))
    return Trace(events, fuel + 1)


def cn_machine() -> MindChangeMachine:
    return MindChangeMachine(_cn_run, "C_N")


def cn_realizer(name: CoClosedName, fuel: int) -> Trace:
    """Run the mind-change realizer on a nat name; the answer is ``trace.output[0]``."""
    if name.space != "nat":
        raise MalformedName("choice on N needs a nat name")
    trace = _cn_run(name.items, fuel)
    if fuel < len(name.items):
        raise FuelExhausted(f"{len(name.items) - fuel} exclusion items lie beyond fuel {fuel}", trace)
    return trace


def _nat_name_oracle(r: tuple, fuel: int) -> tuple:
    # Unique choice stand-in: the least value not excluded so far.
    excluded = {x - 1 for x in r if x > 0}
    return (_min_outside(excluded),) + (0,) * max(len(r) - 1, 0)


def ucn_oracle() -> Oracle:
    return Oracle(_nat_name_oracle, "UC_N")


def _ucn_pre(r: tuple, fuel: int) -> tuple:
    out = []
    emitted = set()
    seen = set()
    c, j, m = 0, 0, -1
    nxt = 1

    def emit(k):
        nonlocal m
        if k not in emitted:
            emitted.add(k)
            out.append(k + 1)
            m = max(m, k)

    for i, item in enumerate(r[:fuel]):
        if item > 0:
            seen.add(item - 1)
        if c in seen:
            c = _min_outside(seen)
            old = j
            j = max(i, m + 1)
            # the old position would otherwise never be excluded
            if old != j:
                emit(old)
            for k in range(m + 1, j):
                emit(k)
            nxt = j + 1
        emit(nxt)
        nxt += 1
    return tuple(out)


def _ucn_post(x: tuple, fuel: int) -> tuple:
    inp, gout = unpair(x)
    if not gout:
        return ()
    j = gout[0]
    if len(inp) <= j:
        return ()
    excluded = {it - 1 for it in inp[: j + 1] if it > 0}
    return (_min_outside(excluded),)


def cn_from_ucn_witness() -> ReductionWitness:
    """Choice on N from unique choice: emit a name of {j} with j past the last candidate change."""
    return ReductionWitness(StreamMachine(_ucn_pre, "cn_from_ucn.H"), StreamMachine(_ucn_post, "cn_from_ucn.K"),
                            strong=False, name="cn-from-ucn")


def ucn_from_cn_witness() -> ReductionWitness:
    ident = StreamMachine(lambda r, fuel: r, "id")
    return ReductionWitness(ident, ident, strong=True, name="ucn-from-cn")


# -- discrete limit ------------------------------------------------------------

def _limdelta_pre(r: tuple, fuel: int) -> tuple:
    # Exclude n once some p_n(pos) != p_{n+j}(pos) is visible.  Checks are
    # ordered by the later of the two positions so the output only grows.
    out = []
    for z in range(len(r)):
        m, pos = cantor_unpair(z)
        for n in range(m):
            out.append(n + 1 if r[cantor_pair(n, pos)] != r[z] else 0)
    return tuple(out)


def _limdelta_post(x: tuple, fuel: int) -> tuple:
    inp, gout = unpair(x)
    if not gout:
        return ()
    return project(inp, gout[0]).symbols


def limdelta_from_cn_witness() -> ReductionWitness:
    """Discrete limit from choice on N: choose an index after which the sequence is constant."""
    return ReductionWitness(StreamMachine(_limdelta_pre, "limdelta.H"), StreamMachine(_limdelta_post, "limdelta.K"),
                            strong=False, name="limdelta-from-cn")


def _candidates_pre(r: tuple, fuel: int) -> tuple:
    # Component i is a name of the least candidate after i items.
    items = r[:fuel]
    seen = set()
    cands = [0]
    for it in items:
        if it > 0:
            seen.add(it - 1)
        cands.append(_min_outside(seen))
    last = len(cands) - 1
    streams = [PrefixStream.generated(lambda k, c=c: c if k == 0 else 0, 0) for c in cands]
    return pair_countable(streams, length=cantor_pair(last + 1, 0)).symbols


def _limdelta_oracle(r: tuple, fuel: int) -> tuple:
    comps = components(r)
    return comps[-1].symbols if comps else ()


def limdelta_oracle() -> Oracle:
    """Trusts the latest visible component; exact on eventually constant data seen past its change point."""
    return Oracle(_limdelta_oracle, "lim_Delta")


def cn_from_limdelta_witness() -> ReductionWitness:
    ident = StreamMachine(lambda r, fuel: r, "id")
    return ReductionWitness(StreamMachine(_candidates_pre, "cn_from_limdelta.H"), ident, strong=True,
                            name="cn-from-limdelta")


WITNESSES = {
    "cn-from-ucn": (cn_from_ucn_witness, ucn_oracle),
    "ucn-from-cn": (ucn_from_cn_witness, cn_machine),
    "limdelta-from-cn": (limdelta_from_cn_witness, cn_machine),
    "cn-from-limdelta": (cn_from_limdelta_witness, limdelta_oracle),
}


# -- finite choice -------------------------------------------------------------

def mlpo_realizer(n: int):
    """Returns a function picking a 1-based index whose stream shows no nonzero symbol."""
    def choose(streams: Sequence) -> int:
        if len(streams) != n:
            raise ValueError(f"expected {n} streams, got {len(streams)}")
        for i, p in enumerate(streams, start=1):
            if not any(_symbols(p)):
                return i
        raise NoCandidate("every component shows a nonzero symbol")
    return choose


def mlpo_solutions(streams: Sequence) -> set:
    return {i for i, p in enumerate(streams, start=1) if not any(_symbols(p))}


def llpo_nondet() -> NondetMachine:
    """Choice on {0, 1} with advice: the advice guesses the answer, F2 fails once that side shows a 1.

    Input is <p_0, p_1>; an answer i is correct when p_i is all zero.
    """
    def split(x):
        pp, r = unpair(x)
        p0, p1 = unpair(pp)
        return (p0, p1), r

    def f1(x, fuel):
        _, r = split(x)
        return (r[0],) if r else ()

    def f2(x, fuel):
        ps, r = split(x)
        if not r:
            return ()
        return (FAIL,) if any(ps[r[0]].symbols[:fuel]) else ()

    advice = [PrefixStream.constant(v, 1) for v in (0, 1)]
    return NondetMachine(StreamMachine(f1, "llpo.1"), StreamMachine(f2, "llpo.2"), advice, "LLPO")


# -- Cantor space ----------------------------------------------------------------

def leftmost_survivor(excluded: CylinderRegion, depth: int, start: str = "") -> str:
    """Leftmost extension of ``start`` to ``depth`` whose cylinder is not covered."""
    if excluded.covers(start):
        raise EmptySet(f"[{start}] is covered by the exclusions")
    w = start
    while len(w) < depth:
        w = w + "0" if not excluded.covers(w + "0") else w + "1"
    return w


def ccantor_oracle(name: CoClosedName, depth: int) -> str:
    """Exact stand-in for choice on Cantor space over a finite exclusion list."""
    if name.space != "cantor":
        raise MalformedName("expected a cantor name")
    return leftmost_survivor(CylinderRegion(frozenset(name.atoms())), depth)


# -- products ----------------------------------------------------------------------

def product_nat_name(a: CoClosedName, b: CoClosedName, stages: int) -> CoClosedName:
    """Name of A x B inside N via the Cantor pairing, dovetailing the excluded rows and columns."""
    items = []
    emitted = set()
    ex_a, ex_b = [], []
    for t in range(stages):
        for src, dst in ((a, ex_a), (b, ex_b)):
            if t < len(src.items) and src.items[t] > 0:
                dst.append(src.items[t] - 1)
        fresh = [cantor_pair(x, j) for x in ex_a for j in range(t + 1)]
        fresh += [cantor_pair(i, y) for y in ex_b for i in range(t + 1)]
        new = [c for c in fresh if c not in emitted]
        for c in new:
            emitted.add(c)
            items.append(c + 1)
        if not new:
            items.append(0)
    return CoClosedName("nat", tuple(items))


def interleave_words(x: str, y: str) -> str:
    return "".join(a + b for a, b in zip(x, y))


def product_cantor_name(a: CoClosedName, b: CoClosedName) -> CoClosedName:
    """Name of A x B inside Cantor space, points interleaved x0 y0 x1 y1 ..."""
    from itertools import product as cartesian

    words = []
    for w in a.atoms():
        for free in cartesian("01", repeat=max(len(w) - 1, 0)):
            words.append("".join(w[i] + (free[i] if i < len(w) - 1 else "") for i in range(len(w))))
    for w in b.atoms():
        for free in cartesian("01", repeat=len(w)):
            words.append("".join(free[i] + w[i] for i in range(len(w))))
    return CoClosedName("cantor", tuple(words))


def deinterleave_word(u: str) -> tuple:
    return u[0::2], u[1::2]


# -- the real line -------------------------------------------------------------------

def merge_open(intervals) -> list:
    """Union of open intervals as disjoint open components; touching endpoints stay apart."""
    out = []
    for a, b in sorted(intervals):
        if out and a < out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


def covers_closed(intervals, lo: Fraction, hi: Fraction) -> bool:
    """Is the closed interval [lo, hi] inside the union of the open intervals?"""
    cur = lo
    while True:
        reach = [b for a, b in intervals if a < cur < b]
        if not reach:
            return False
        cur = max(reach)
        if cur > hi:
            return True


def emptiness_name(name: CoClosedName) -> CoClosedName:
    """Nat name enumerating {n : A and [-n, n] are disjoint}, one stage per consumed interval."""
    intervals = name.atoms()
    if not intervals:
        return CoClosedName("nat", ())
    bound = ceil(max(max(abs(a), abs(b)) for a, b in intervals)) + 1
    items = []
    emitted = set()
    for t in range(1, len(name.items) + 1):
        seen = name.atoms(t)
        new = [n for n in range(bound + 1) if n not in emitted and covers_closed(seen, Fraction(-n), Fraction(n))]
        for n in new:
            emitted.add(n)
            items.append(n + 1)
        if not new:
            items.append(0)
    return CoClosedName("nat", tuple(items))


def node_interval(w: str, n: int) -> tuple:
    """Closed dyadic interval of word ``w`` in the coding of [-n, n]."""
    d = len(w)
    k = int(w, 2) if w else 0
    width = Fraction(2 * n, 1 << d)
    lo = -n + k * width
    return lo, lo + width


def dyadic_exclusions(components_, n: int, depth: int) -> CylinderRegion:
    """Minimal cylinders of depth <= ``depth`` whose closed interval lies inside one open component."""
    words = []

    def walk(w):
        lo, hi = node_interval(w, n)
        for a, b in components_:
            if a < lo and hi < b:
                words.append(w)
                return
        if not any(a < hi and lo < b for a, b in components_):
            return
        if len(w) < depth:
            walk(w + "0")
            walk(w + "1")

    walk("")
    return CylinderRegion(frozenset(words))


@dataclass
class RealChoice:
    cauchy: RationalCauchy
    n: int
    word: str
    nat_trace: Trace

    @property
    def mind_changes(self) -> int:
        return self.nat_trace.resets


def _depth_for(n: int, precision: int) -> list:
    # depth d_j with 2n * 2**-d_j <= 2**-(j+1), so two points of one node differ by less than 2**-j
    base = (2 * n - 1).bit_length() if n > 0 else 0
    return [base + 1 + j for j in range(precision + 1)]


def _snap_into_set(comps, lo: Fraction, hi: Fraction) -> Fraction:
    """Point of [lo, hi] outside the open components, nearest to the midpoint.

    A surviving node is never inside a single component, so when the midpoint
    is covered one endpoint of its component lies in the node and is not covered.
    """
    mid = (lo + hi) / 2
    for a, b in comps:
        if a < mid < b:
            ends = [e for e in (a, b) if lo <= e <= hi]
            return min(ends, key=lambda e: abs(e - mid))
    return mid


def cr_realizer(name: CoClosedName, backend: str = "oracle", precision: int = 20,
                lowbasis_depth: int = 5) -> RealChoice:
    """Choice on R through choice on N (which [-n, n] to search) and a Cantor-space backend."""
    if name.space != "real":
        raise MalformedName("expected a real name")
    comps = merge_open(name.atoms())
    nat = emptiness_name(name)
    trace = cn_realizer(nat, len(nat.items))
    n = trace.output[0]
    depths = _depth_for(n, precision)
    if n == 0:
        return RealChoice(RationalCauchy((Fraction(0),) * (precision + 1)), 0, "", trace)
    deep = depths[-1]
    excluded = dyadic_exclusions(comps, n, deep)
    if backend == "oracle":
        word = leftmost_survivor(excluded, deep)
    elif backend == "lowbasis":
        from .jump import UFamily
        from .lowbasis import low_basis_run

        shallow = dyadic_exclusions(comps, n, lowbasis_depth)
        coded = CoClosedName("cantor", tuple(sorted(shallow.words, key=lambda w: (len(w), w))))
        run = low_basis_run(coded, UFamily(), depth=lowbasis_depth)
        word = leftmost_survivor(excluded, deep, start=run.point)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    approx = []
    for d in depths:
        approx.append(_snap_into_set(comps, *node_interval(word[:d], n)))
    return RealChoice(RationalCauchy(tuple(approx)), n, word, trace)
