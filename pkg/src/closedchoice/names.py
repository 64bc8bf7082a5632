"""Names of points and closed sets.

Infinite names are approximated by finite prefixes that can optionally be
extended on demand.  Everything here is exact: integers, binary words and
``fractions.Fraction``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional, Sequence, Union


class MalformedName(ValueError):
    """Malformed name or name file."""


@dataclass(frozen=True)
class PrefixStream:
    """Finite prefix of an infinite sequence of naturals."""

    symbols: tuple = ()
    binary: bool = False
    producer: Optional[Callable[[int], int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(s) for s in self.symbols))
        if any(s < 0 for s in self.symbols):
            raise MalformedName("symbols must be naturals")
        if self.binary and any(s not in (0, 1) for s in self.symbols):
            raise MalformedName("binary stream holds a symbol other than 0/1")

    @classmethod
    def from_word(cls, word: str, producer=None) -> "PrefixStream":
        return cls(tuple(int(c) for c in word), binary=True, producer=producer)

    @classmethod
    def generated(cls, producer: Callable[[int], int], length: int, binary: bool = False):
        return cls(tuple(producer(i) for i in range(length)), binary, producer)

    @classmethod
    def constant(cls, value: int, length: int = 0) -> "PrefixStream":
        return cls.generated(lambda i: value, length, binary=value in (0, 1))

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, i):
        return self.symbols[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    @property
    def word(self) -> str:
        return "".join(str(s) for s in self.symbols)

    def extended(self, length: int) -> "PrefixStream":
        """At least ``length`` symbols if a producer is available; existing positions never change."""
        if length <= len(self) or self.producer is None:
            return self
        extra = tuple(self.producer(i) for i in range(len(self), length))
        return PrefixStream(self.symbols + extra, self.binary, self.producer)

    def take(self, length: int) -> "PrefixStream":
        return PrefixStream(self.symbols[:length], self.binary, self.producer)

    def is_prefix_of(self, other: "PrefixStream") -> bool:
        return other.symbols[: len(self)] == self.symbols


def _symbols(p) -> tuple:
    return p.symbols if isinstance(p, PrefixStream) else tuple(p)


# -- pairing -----------------------------------------------------------------

def pair(p, q) -> PrefixStream:
    """Interleave: out(2n) = p(n), out(2n+1) = q(n)."""
    a, b = _symbols(p), _symbols(q)
    n = min(len(a), len(b))
    out = []
    for i in range(n):
        out += (a[i], b[i])
    binary = all(getattr(s, "binary", False) for s in (p, q))
    fa, fb = getattr(p, "producer", None), getattr(q, "producer", None)
    producer = None
    if fa is not None and fb is not None:
        producer = lambda i: fa(i // 2) if i % 2 == 0 else fb(i // 2)  # noqa: E731
    return PrefixStream(tuple(out), binary, producer)


def unpair(r) -> tuple:
    s = _symbols(r)
    binary = getattr(r, "binary", False)
    return PrefixStream(s[0::2], binary), PrefixStream(s[1::2], binary)


def cantor_pair(i: int, j: int) -> int:
    return (i + j) * (i + j + 1) // 2 + j


def cantor_unpair(z: int) -> tuple:
    w = (isqrt(8 * z + 1) - 1) // 2
    j = z - w * (w + 1) // 2
    return w - j, j


def pair_countable(streams: Sequence, length: Optional[int] = None, fill: Optional[int] = None) -> PrefixStream:
    """Countable pairing: position <i, j> carries streams[i](j).

    Streams beyond the given family read as the constant ``fill``; with
    ``fill=None`` they are undefined.  The output stops at the first position
    that is not defined.  With ``length`` the streams are first extended
    through their producers.
    """
    streams = list(streams)
    if length is not None:
        need = {}
        for z in range(length):
            i, j = cantor_unpair(z)
            need[i] = max(need.get(i, 0), j + 1)
        streams = [s.extended(need.get(i, 0)) if isinstance(s, PrefixStream) else s for i, s in enumerate(streams)]
    syms = [_symbols(s) for s in streams]
    out = []
    z = 0
    while length is None or z < length:
        i, j = cantor_unpair(z)
        if i < len(syms):
            if j >= len(syms[i]):
                break
            out.append(syms[i][j])
        elif fill is not None and syms:
            out.append(fill)
        else:
            break
        z += 1
    return PrefixStream(tuple(out))


def project(r, i: int) -> PrefixStream:
    """Component ``i`` of a countable pairing, as far as the prefix determines it."""
    s = _symbols(r)
    out = []
    j = 0
    while True:
        z = cantor_pair(i, j)
        if z >= len(s):
            break
        out.append(s[z])
        j += 1
    return PrefixStream(tuple(out))


def components(r) -> list:
    """All components whose first position is inside the prefix."""
    s = _symbols(r)
    out = []
    i = 0
    while cantor_pair(i, 0) < len(s):
        out.append(project(s, i))
        i += 1
    return out


def pair_tuple(parts: Sequence) -> PrefixStream:
    """Right-nested binary pairing <x1, <x2, ... <x_{k-1}, x_k>>>; one part is itself."""
    if not parts:
        return PrefixStream(())
    if len(parts) == 1:
        p = parts[0]
        return p if isinstance(p, PrefixStream) else PrefixStream(tuple(p))
    return pair(parts[0], pair_tuple(parts[1:]))


def unpair_tuple(r, k: int) -> list:
    if k == 0:
        return []
    if k == 1:
        return [r if isinstance(r, PrefixStream) else PrefixStream(tuple(r))]
    a, rest = unpair(r)
    return [a] + unpair_tuple(rest, k - 1)


# -- words -------------------------------------------------------------------

def word_code(w: str) -> int:
    """Length-lexicographic code with code('') = 0."""
    return (1 << len(w)) - 1 + (int(w, 2) if w else 0)


def word_decode(c: int) -> str:
    length = (c + 1).bit_length() - 1
    v = c - ((1 << length) - 1)
    return format(v, "b").zfill(length) if length else ""


def is_binary_word(w) -> bool:
    return isinstance(w, str) and all(c in "01" for c in w)


# -- cylinder regions --------------------------------------------------------

def word_mask(w: str, depth: int) -> int:
    """Bitmask over the 2**depth words of length ``depth`` covered by [w]."""
    if len(w) > depth:
        raise ValueError(f"word {w!r} deeper than {depth}")
    width = 1 << (depth - len(w))
    start = (int(w, 2) if w else 0) * width
    return ((1 << width) - 1) << start


def words_mask(words: Iterable[str], depth: int) -> int:
    m = 0
    for w in words:
        m |= word_mask(w, depth)
    return m


@dataclass(frozen=True)
class CylinderRegion:
    """Finite union of cylinders [w] in Cantor space."""

    words: frozenset = frozenset()

    def __post_init__(self):
        ws = frozenset(self.words)
        if not all(is_binary_word(w) for w in ws):
            raise MalformedName("cylinder words must be binary strings")
        object.__setattr__(self, "words", ws)

    @classmethod
    def of(cls, *words: str) -> "CylinderRegion":
        return cls(frozenset(words))

    @classmethod
    def everything(cls) -> "CylinderRegion":
        return cls(frozenset({""}))

    @classmethod
    def from_mask(cls, mask: int, depth: int) -> "CylinderRegion":
        ws = {format(k, "b").zfill(depth) if depth else "" for k in range(1 << depth) if mask >> k & 1}
        return cls(frozenset(ws))

    @property
    def depth(self) -> int:
        return max((len(w) for w in self.words), default=0)

    def mask(self, depth: Optional[int] = None) -> int:
        return words_mask(self.words, self.depth if depth is None else depth)

    def normalized(self, depth: Optional[int] = None) -> frozenset:
        d = self.depth if depth is None else depth
        return CylinderRegion.from_mask(self.mask(d), d).words

    def union(self, other: "CylinderRegion") -> "CylinderRegion":
        return CylinderRegion(self.words | other.words)

    __or__ = union

    def intersection(self, other: "CylinderRegion") -> "CylinderRegion":
        d = max(self.depth, other.depth)
        return CylinderRegion.from_mask(self.mask(d) & other.mask(d), d)

    __and__ = intersection

    def complement(self, depth: Optional[int] = None) -> "CylinderRegion":
        d = self.depth if depth is None else depth
        return CylinderRegion.from_mask(((1 << (1 << d)) - 1) & ~self.mask(d), d)

    def is_empty(self) -> bool:
        return not self.words

    def covers(self, w: str) -> bool:
        """[w] is included in the region."""
        if any(w.startswith(u) for u in self.words):
            return True
        if not any(u.startswith(w) for u in self.words):
            return False
        return self.covers(w + "0") and self.covers(w + "1")

    def meets(self, w: str) -> bool:
        """[w] intersects the region."""
        return any(w.startswith(u) or u.startswith(w) for u in self.words)

    def contains_point(self, p) -> Optional[bool]:
        """Membership of the point with prefix ``p``; None if the prefix is too short."""
        word = p.word if isinstance(p, PrefixStream) else "".join(str(c) for c in p)
        if any(word.startswith(u) for u in self.words):
            return True
        if any(u.startswith(word) and u != word for u in self.words):
            return None
        return False

    def __le__(self, other: "CylinderRegion") -> bool:
        return region_subset(self, other)


def region_subset(a: CylinderRegion, b: CylinderRegion) -> bool:
    return all(b.covers(w) for w in a.words)


# -- closed-set names --------------------------------------------------------

SPACES = ("nat", "cantor", "real", "nat_x_cantor")


def _atom(space: str, item):
    if item is None:
        return None
    if space == "nat":
        if isinstance(item, bool) or not isinstance(item, int) or item < 0:
            raise MalformedName(f"nat item must be a natural, got {item!r}")
        return item
    if space == "cantor":
        if not is_binary_word(item):
            raise MalformedName(f"cantor item must be a binary word, got {item!r}")
        return item
    if space == "real":
        if len(item) == 4:
            a, b = Fraction(item[0], item[1]), Fraction(item[2], item[3])
        elif len(item) == 2:
            a, b = Fraction(item[0]), Fraction(item[1])
        else:
            raise MalformedName(f"real item must be an interval, got {item!r}")
        if not a < b:
            raise MalformedName(f"interval endpoints must satisfy a < b, got {item!r}")
        return (a, b)
    if space == "nat_x_cantor":
        n, w = item
        if isinstance(n, bool) or not isinstance(n, int) or n < 0 or not is_binary_word(w):
            raise MalformedName(f"nat_x_cantor item must be [n, word], got {item!r}")
        return (n, w)
    raise MalformedName(f"unknown space {space!r}")


@dataclass(frozen=True)
class CoClosedName:
    """Negative information: an enumeration of what lies outside the set.

    For ``nat`` the item 0 is a pause and item k > 0 excludes k - 1.  For the
    other spaces ``None`` is a pause.
    """

    space: str
    items: tuple = ()

    def __post_init__(self):
        if self.space not in SPACES:
            raise MalformedName(f"unknown space {self.space!r}")
        items = tuple(_atom(self.space, it) for it in self.items)
        if self.space == "nat":
            items = tuple(0 if it is None else it for it in items)
        object.__setattr__(self, "items", items)

    def __len__(self) -> int:
        return len(self.items)

    def atoms(self, consumed: Optional[int] = None) -> list:
        """Decoded excluded atoms among the first ``consumed`` items."""
        items = self.items if consumed is None else self.items[:consumed]
        if self.space == "nat":
            return [it - 1 for it in items if it > 0]
        return [it for it in items if it is not None]

    def to_json(self) -> dict:
        def enc(it):
            if self.space == "real" and it is not None:
                a, b = it
                return [a.numerator, a.denominator, b.numerator, b.denominator]
            if self.space == "nat_x_cantor" and it is not None:
                return list(it)
            if self.space == "nat":
                return None if it == 0 else it - 1
            return it

        return {"space": self.space, "items": [enc(it) for it in self.items]}

    @classmethod
    def from_json(cls, data: dict) -> "CoClosedName":
        if not isinstance(data, dict) or "space" not in data or "items" not in data:
            raise MalformedName("coclosed document needs 'space' and 'items'")
        items = tuple(data["items"])
        if data["space"] == "nat":
            # files list the excluded numbers themselves
            if any(it is not None and (not isinstance(it, int) or it < 0) for it in items):
                raise MalformedName("nat atoms must be naturals or null")
            items = tuple(0 if it is None else it + 1 for it in items)
        return cls(data["space"], items)


def load_coclosed(path: Union[str, Path]) -> CoClosedName:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedName(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return CoClosedName.from_json(data)


def decode_coclosed_nat(name: CoClosedName, horizon: int, consumed: Optional[int] = None) -> set:
    """{n < horizon : n + 1 is not among the consumed items}."""
    if name.space != "nat":
        raise MalformedName("decode_coclosed_nat needs a nat name")
    excluded = set(name.atoms(consumed))
    return {n for n in range(horizon) if n not in excluded}


def cantor_exclusions(name: CoClosedName, consumed: Optional[int] = None) -> CylinderRegion:
    if name.space != "cantor":
        raise MalformedName("expected a cantor name")
    return CylinderRegion(frozenset(name.atoms(consumed)))


# -- Cauchy names ------------------------------------------------------------

@dataclass(frozen=True)
class RationalCauchy:
    approximants: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "approximants", tuple(Fraction(q) for q in self.approximants))

    def __len__(self):
        return len(self.approximants)

    def __getitem__(self, j):
        return self.approximants[j]


def validate_cauchy(c) -> bool:
    """|q_i - q_j| < 2**-j for all recorded i > j."""
    qs = c.approximants if isinstance(c, RationalCauchy) else tuple(Fraction(q) for q in c)
    for j in range(len(qs)):
        bound = Fraction(1, 1 << j)
        for i in range(j + 1, len(qs)):
            if not abs(qs[i] - qs[j]) < bound:
                return False
    return True
