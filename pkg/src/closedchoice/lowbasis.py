"""The uniform low basis construction and its extension to N x Cantor.

Regions are handled as bitmasks over the 2**D words of a fixed depth D, which
makes every subset test exact once D is at least the depth of every cylinder
involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .choice import EmptySet
from .jump import JumpName, UFamily, jump_inverse, jump_width
from .names import CoClosedName, CylinderRegion, MalformedName, word_decode, words_mask


class EmptyApproximant(ValueError):
    """The complement of the exclusions seen so far is already empty."""


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class StepResult:
    word: str
    test1: frozenset  # bits set by the plain inclusion test


def _depth_needed(words, family: UFamily, bits: int) -> int:
    depth = max((len(w) for w in words), default=0)
    depth = max(depth, max((len(b) for bs, _ in family.sets.values() for b in bs), default=0))
    reserved = [n for n in range(0, bits, 2)]
    if reserved:
        depth = max(depth, len(word_decode(reserved[-1] // 2)))
    return depth


def low_basis_step(exclusions: Sequence[str], family: UFamily, m: int, bits: int,
                   depth: Optional[int] = None) -> StepResult:
    """Bits 0..bits-1 of the stage-m approximation, given the first m excluded cylinders."""
    d = _depth_needed(exclusions, family, bits) if depth is None else depth
    full = (1 << (1 << d)) - 1
    a = full & ~words_mask(exclusions, d)
    if a == 0:
        raise EmptyApproximant(f"stage {m}: exclusions cover everything")
    out = []
    test1 = set()
    rejected = 0  # union of U_i^m over earlier indices whose bit is 0
    for n in range(bits):
        u = words_mask(family.balls(n, m), d)
        if a & ~u == 0:
            out.append("1")
            test1.add(n)
        elif a & ~(u | rejected) == 0:
            out.append("1")
        else:
            out.append("0")
            rejected |= u
    return StepResult("".join(out), frozenset(test1))


def as_jump_name(word: str) -> JumpName:
    return JumpName(len(word), frozenset(i for i, c in enumerate(word) if c == "1"))


@dataclass
class LowBasisRun:
    approximations: list
    test1: list
    flips: list
    stable_from: int
    m_star: int
    depth: int
    point: str
    in_set: bool

    @property
    def limit(self) -> str:
        return self.approximations[-1]

    def table(self) -> str:
        rows = [f"m={m:<3d} {w}" for m, w in enumerate(self.approximations)]
        rows.append("flips  " + "".join(str(min(f, 9)) for f in self.flips))
        return "\n".join(rows)


def _flip_counts(words: Sequence[str]) -> list:
    if not words:
        return []
    return [sum(1 for a, b in zip(words, words[1:]) if a[i] != b[i]) for i in range(len(words[0]))]


def _check_test1_monotone(test1: Sequence[frozenset]):
    for m in range(1, len(test1)):
        lost = test1[m - 1] - test1[m]
        if lost:
            raise InvariantViolation(f"stage {m}: bits {sorted(lost)} set by inclusion reverted")


def low_basis_run(name: CoClosedName, family: UFamily, stages: Optional[int] = None,
                  bits: Optional[int] = None, depth: Optional[int] = None) -> LowBasisRun:
    """Run the construction on a Cantor name.

    ``depth`` is the length of the decoded point; by default it is the
    deepest cylinder mentioned anywhere.  ``bits`` defaults to the width that
    carries every reserved index up to that depth.
    """
    if name.space != "cantor":
        raise MalformedName("expected a cantor name")
    all_words = name.atoms()
    if CylinderRegion(frozenset(all_words)).covers(""):
        raise EmptySet("exclusions cover Cantor space")
    if depth is None:
        depth = _depth_needed(all_words, family, 0)
    bits = jump_width(depth) if bits is None else bits
    d = max(depth, _depth_needed(all_words, family, bits))
    m_star = max(len(name.items) + family.max_position, 1)
    stages = m_star + 2 if stages is None else stages
    words, test1 = [], []
    for m in range(stages + 1):
        step = low_basis_step(name.atoms(m), family, m, bits, d)
        words.append(step.word)
        test1.append(step.test1)
    _check_test1_monotone(test1)
    final = words[-1]
    stable = len(words) - 1
    while stable > 0 and words[stable - 1] == final:
        stable -= 1
    point = jump_inverse(as_jump_name(final)).word
    in_set = not CylinderRegion(frozenset(all_words)).covers(point)
    return LowBasisRun(words, test1, _flip_counts(words), stable, m_star, d, point, in_set)


def check_limit_properties(run: LowBasisRun, name: CoClosedName, family: UFamily) -> list:
    """Problems with the stabilized word; an empty list means every check passed."""
    problems = []
    w = run.limit
    if not as_jump_name(w).is_consistent():
        problems.append("reserved bits are not on a single path")
    if not run.in_set:
        problems.append(f"decoded point {run.point!r} is excluded")
    d = run.depth
    a = ((1 << (1 << d)) - 1) & ~words_mask(name.atoms(), d)
    x = words_mask([run.point], d) if len(run.point) >= d else None
    for n in range(len(w)):
        u = words_mask(family.all_balls(n), d)
        if a & ~u == 0 and w[n] != "1":
            problems.append(f"A inside U_{n} but bit is 0")
        if w[n] == "0" and x is not None and x & u:
            problems.append(f"decoded point lies in U_{n} though bit is 0")
    if run.stable_from > run.m_star:
        problems.append(f"stabilized at {run.stable_from} > M* = {run.m_star}")
    return problems


# -- N x Cantor --------------------------------------------------------------------

@dataclass
class PairRun:
    stages: list  # (n_m, word_m)
    n: int
    point: str
    in_set: bool
    stable_from: int


def _slice(atoms, n: int) -> list:
    return [w for k, w in atoms if k == n]


def _first_live_slice(atoms) -> int:
    n = 0
    while CylinderRegion(frozenset(_slice(atoms, n))).covers(""):
        n += 1
    return n


def low_basis_ncantor(name: CoClosedName, family: UFamily, stages: Optional[int] = None,
                      depth: Optional[int] = None) -> PairRun:
    """Least live slice per stage, then the Cantor construction on that slice."""
    if name.space != "nat_x_cantor":
        raise MalformedName("expected a nat_x_cantor name")
    atoms = name.atoms()
    slices = {k for k, _ in atoms}
    if all(CylinderRegion(frozenset(_slice(atoms, k))).covers("") for k in range(max(slices, default=-1) + 2)):
        raise EmptySet("every slice is excluded")
    words = [w for _, w in atoms]
    if depth is None:
        depth = _depth_needed(words, family, 0)
    bits = jump_width(depth)
    d = max(depth, _depth_needed(words, family, bits))
    stages = len(name.items) + family.max_position + 2 if stages is None else stages
    out = []
    for m in range(stages + 1):
        seen = name.atoms(m)
        n_m = _first_live_slice(seen)
        out.append((n_m, low_basis_step(_slice(seen, n_m), family, m, bits, d).word))
    n, w = out[-1]
    stable = len(out) - 1
    while stable > 0 and out[stable - 1] == out[-1]:
        stable -= 1
    point = jump_inverse(as_jump_name(w)).word
    in_set = not CylinderRegion(frozenset(_slice(atoms, n))).covers(point)
    return PairRun(out, n, point, in_set, stable)


def dnc2_name(table: dict, depth: int) -> CoClosedName:
    """Toy two-valued diagonally non-computable class.

    ``table`` maps i to the value program i returns on input i within the
    simulated time bound, or None.  Every word with bit i equal to that value
    is excluded.
    """
    from itertools import product

    words = []
    for i in sorted(table):
        v = table[i]
        if v in (0, 1) and i < depth:
            words += ["".join(head) + str(v) for head in product("01", repeat=i)]
    return CoClosedName("cantor", tuple(words))
