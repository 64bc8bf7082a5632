"""Small bundled machines and non-deterministic problems for checks and demos."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian

from .machines import FAIL, NondetMachine, StreamMachine, compose_nondet
from .names import PrefixStream, _symbols, unpair


def _running_xor(r, fuel):
    out, acc = [], 0
    for s in r[:fuel]:
        acc ^= s & 1
        out.append(acc)
    return tuple(out)


def _delay(r, fuel):
    return ((0,) + tuple(r))[: min(len(r), fuel)]


def _pairs_sum(r, fuel):
    # one output per complete pair of input symbols
    r = r[: 2 * fuel]
    return tuple(r[i] + r[i + 1] for i in range(0, len(r) - 1, 2))


TOY_MACHINES = {
    "xor": StreamMachine(_running_xor, "xor"),
    "delay": StreamMachine(_delay, "delay"),
    "pairsum": StreamMachine(_pairs_sum, "pairsum"),
    "id": StreamMachine(lambda r, fuel: tuple(r), "id"),
}


@dataclass(frozen=True)
class ToyProblem:
    """Binary inputs; a valid guess v < period names a residue class on which x is all zero.

    The answer is x with the positions i where (i + shift) % period == v flipped.
    """

    period: int
    shift: int
    advice_size: int

    def valid_guesses(self, x) -> list:
        x = _symbols(x)
        return [v for v in range(self.period) if all(x[i] == 0 for i in range(v, len(x), self.period))]

    def flip(self, x, v) -> tuple:
        x = _symbols(x)
        return tuple(b ^ ((i + self.shift) % self.period == v) for i, b in enumerate(x))

    def solutions(self, x) -> set:
        return {self.flip(x, v) for v in self.valid_guesses(x)}

    def in_domain(self, x) -> bool:
        return bool(self.valid_guesses(x))

    def machine(self) -> NondetMachine:
        def guess(x):
            p, r = unpair(x)
            return p.symbols, (r[0] if len(r) else None)

        def f1(x, fuel):
            p, v = guess(x)
            return () if v is None else self.flip(p, v)

        def f2(x, fuel):
            p, v = guess(x)
            if v is None:
                return ()
            if v >= self.period or v not in self.valid_guesses(p):
                return (FAIL,)
            return ()

        advice = [PrefixStream.constant(v, 1) for v in range(self.advice_size)]
        name = f"toy({self.period},{self.shift})"
        return NondetMachine(StreamMachine(f1, name + ".1"), StreamMachine(f2, name + ".2"), advice, name)


def padded(word, length: int) -> PrefixStream:
    """Prefix of the name ``word`` followed by zeros forever."""
    return PrefixStream(tuple(word) + (0,) * (length - len(word)))


def _prefix_of_some(z, allowed, least: int) -> bool:
    z = tuple(z)
    return len(z) >= least and any(a[: len(z)] == z for a in allowed)


def composite_instances(outer: ToyProblem, inner: ToyProblem, depth: int, length: int = 128) -> list:
    """(x, predicate) for every word of length <= depth, zero padded, on which outer after inner is defined.

    An answer passes when it commits at least ``depth`` symbols and extends to a correct solution.
    """
    out = []
    for d in range(depth + 1):
        for bits in cartesian((0, 1), repeat=d):
            x = padded(bits, length)
            if not inner.in_domain(x):
                continue
            ys = inner.solutions(x)
            if not all(outer.in_domain(y) for y in ys):
                continue
            allowed = set().union(*(outer.solutions(y) for y in ys))
            out.append((x, lambda z, allowed=allowed: _prefix_of_some(z, allowed, depth)))
    return out


def single_instances(problem: ToyProblem, depth: int, length: int = 128) -> list:
    out = []
    for d in range(depth + 1):
        for bits in cartesian((0, 1), repeat=d):
            x = padded(bits, length)
            if problem.in_domain(x):
                allowed = problem.solutions(x)
                out.append((x, lambda z, allowed=allowed: _prefix_of_some(z, allowed, depth)))
    return out


def toy_pairs(count: int = 20) -> list:
    """Deterministic list of (outer, inner) pairs with advice spaces of size at most 8."""
    pairs = []
    for i in range(count):
        # a common period keeps the composite domain nonempty
        a = 2 + i % 3
        outer = ToyProblem(a, i % a, min(8, a + i % 4))
        inner = ToyProblem(a, (i // 3) % a, min(8, a + (i // 2) % 4))
        pairs.append((outer, inner))
    return pairs


def composed_machine(outer: ToyProblem, inner: ToyProblem) -> NondetMachine:
    return compose_nondet(outer.machine(), inner.machine())
