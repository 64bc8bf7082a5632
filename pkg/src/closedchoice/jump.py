"""Bounded-stage Turing jump over Cantor space and its inverse.

Index convention: an even index ``2*word_code(w)`` always denotes the cylinder
``[w]``.  Odd indices belong to user supplied families of balls.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .names import (
    CylinderRegion,
    MalformedName,
    PrefixStream,
    _symbols,
    is_binary_word,
    word_code,
    word_decode,
)


class InconsistentName(ValueError):
    """A jump name flags neither or both children of the current word."""


def reserved_index(w: str) -> int:
    return 2 * word_code(w)


def jump_width(depth: int) -> int:
    """Bits needed so every cylinder of length <= depth has its reserved index inside the name."""
    return reserved_index("1" * depth) + 1


def _word(p) -> str:
    if isinstance(p, str):
        return p
    return "".join(str(s) for s in _symbols(p))


def _compatible(a: str, b: str) -> bool:
    k = min(len(a), len(b))
    return a[:k] == b[:k]


@dataclass(frozen=True)
class UFamily:
    """Enumeration of open sets as ball lists; ``sets`` maps odd index -> (balls, exhausted)."""

    sets: dict = field(default_factory=dict)

    def __post_init__(self):
        for n, (balls, exhausted) in self.sets.items():
            if n % 2 != 1 or n < 0:
                raise MalformedName(f"user sets live at odd indices, got {n}")
            if not all(is_binary_word(b) for b in balls):
                raise MalformedName(f"set {n} holds a non-binary ball")

    def all_balls(self, n: int) -> tuple:
        if n % 2 == 0:
            return (word_decode(n // 2),)
        return tuple(self.sets.get(n, ((), True))[0])

    def balls(self, n: int, m: int) -> tuple:
        """U_n^m: the balls listed at positions below m."""
        return self.all_balls(n)[:m]

    def exhausted(self, n: int) -> bool:
        return n % 2 == 0 or self.sets.get(n, ((), True))[1]

    def exhausted_at(self, n: int, s: int) -> bool:
        return self.exhausted(n) and len(self.all_balls(n)) <= s + 1

    def region(self, n: int, m: Optional[int] = None) -> CylinderRegion:
        balls = self.all_balls(n) if m is None else self.balls(n, m)
        return CylinderRegion(frozenset(balls))

    @property
    def max_position(self) -> int:
        return max((len(b) for b, _ in self.sets.values()), default=1)

    @property
    def max_index(self) -> int:
        return max(self.sets, default=-1)

    def to_json(self) -> dict:
        return {"sets": [{"index": n, "balls": list(b), "exhausted": e} for n, (b, e) in sorted(self.sets.items())]}

    @classmethod
    def from_json(cls, data: dict) -> "UFamily":
        try:
            return cls({int(s["index"]): (tuple(s["balls"]), bool(s.get("exhausted", True))) for s in data["sets"]})
        except (KeyError, TypeError) as exc:
            raise MalformedName(f"bad family file: {exc}") from exc


def load_family(path) -> UFamily:
    try:
        return UFamily.from_json(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise MalformedName(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def jump_stage(p, n: int, s: int, family: UFamily) -> Optional[int]:
    """1, 0 or None (unknown) for membership of p in U_n, looking at balls listed up to position s."""
    w = _word(p)
    balls = family.balls(n, s + 1)
    if any(len(b) <= len(w) and w.startswith(b) for b in balls):
        return 1
    if family.exhausted_at(n, s) and not any(_compatible(w, b) for b in balls):
        return 0
    return None


@dataclass(frozen=True)
class JumpName:
    """Finite prefix of a jump name, stored sparsely: bits not in ``ones`` or ``unknown`` are 0."""

    length: int
    ones: frozenset = frozenset()
    unknown: frozenset = frozenset()

    def bit(self, n: int) -> Optional[int]:
        if not 0 <= n < self.length:
            raise IndexError(n)
        if n in self.unknown:
            return None
        return 1 if n in self.ones else 0

    def is_consistent(self) -> bool:
        per_length = {}
        for n in self.ones:
            if n % 2 == 0:
                w = word_decode(n // 2)
                if per_length.setdefault(len(w), w) != w:
                    return False
        return True

    def bits(self) -> str:
        return "".join("?" if n in self.unknown else "1" if n in self.ones else "0" for n in range(self.length))


def jump_full(p, family: UFamily, width: Optional[int] = None) -> JumpName:
    """J(p) restricted to indices below ``width``, every ball fully listed."""
    w = _word(p)
    width = jump_width(len(w)) if width is None else width
    ones = {reserved_index(w[:k]) for k in range(len(w) + 1)}
    unknown = set()
    for n in family.sets:
        v = jump_stage(w, n, family.max_position, family)
        if v == 1:
            ones.add(n)
        elif v is None:
            unknown.add(n)
    return JumpName(width, frozenset(i for i in ones if i < width), frozenset(i for i in unknown if i < width))


def jump_inverse(q: JumpName) -> PrefixStream:
    w = ""
    while True:
        i0, i1 = reserved_index(w + "0"), reserved_index(w + "1")
        if i1 >= q.length:
            return PrefixStream.from_word(w)
        b0, b1 = q.bit(i0), q.bit(i1)
        if b0 == 1 and b1 != 1:
            w += "0"
        elif b1 == 1 and b0 != 1:
            w += "1"
        else:
            raise InconsistentName(f"children of {w!r} flagged {b0}, {b1}")


@dataclass(frozen=True)
class Verdict:
    refuted: bool
    at: Optional[tuple] = None  # (first element of the disagreeing tail, index n)

    def __str__(self):
        return f"REFUTED at k={self.at[0]} n={self.at[1]}" if self.refuted else "CONSISTENT"


def pi_converges(seq: Sequence, p, family: UFamily, horizon: tuple) -> Verdict:
    """Semi-decide failure of convergence in the jump-induced topology.

    Refutes when, for some n below N, p's bit is decided at stage s and the
    final run of the sequence decides the opposite bit.
    """
    s, limit = horizon
    for n in range(limit):
        v = jump_stage(p, n, s, family)
        if v is None:
            continue
        k = len(seq)
        while k > 0:
            u = jump_stage(seq[k - 1], n, s, family)
            if u is None or u == v:
                break
            k -= 1
        if k < len(seq):
            return Verdict(True, (k, n))
    return Verdict(False)


def limj_low_F(seq: Sequence, family: UFamily, depth: int, stages: Optional[int] = None) -> list:
    """Jump-name approximations q_i with q_i(n) = [p_i in U_n^i], p_i the i-th element (last one repeated)."""
    if not seq:
        return []
    width = jump_width(depth)
    stages = len(seq) + family.max_position + 1 if stages is None else stages
    out = []
    for i in range(stages):
        w = _word(seq[min(i, len(seq) - 1)])[:depth]
        ones = set()
        if i >= 1:
            ones.update(reserved_index(w[:k]) for k in range(len(w) + 1))
        for n in family.sets:
            if n < width and any(len(b) <= len(w) and w.startswith(b) for b in family.balls(n, i)):
                ones.add(n)
        out.append(JumpName(width, frozenset(i for i in ones if i < width)))
    return out


def stabilized(seq: Sequence):
    """(last element, first index from which the sequence is constant)."""
    if not seq:
        raise ValueError("empty sequence has no limit")
    k = len(seq) - 1
    while k > 0 and seq[k - 1] == seq[-1]:
        k -= 1
    return seq[-1], k


def one_generic_witness(p, n: int, family: UFamily, horizon: int) -> Optional[str]:
    """Shortest prefix of p deciding membership in U_n outright, or None."""
    if not family.exhausted(n):
        return None
    balls = family.all_balls(n)
    region = CylinderRegion(frozenset(balls))
    w = _word(p)
    for k in range(min(len(w), horizon) + 1):
        u = w[:k]
        if region.covers(u) or not any(_compatible(u, b) for b in balls):
            return u
    return None
