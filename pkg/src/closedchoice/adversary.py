"""Bounded-lookahead search for reductions between choice problems on finite sets.

Model
-----
A problem is a product of finite sets {0..n_i - 1}.  A name is a stream of
symbols ``(s_1, .., s_r)`` with ``s_i`` in 0..n_i; ``s_i = v + 1`` excludes
value v from factor i and 0 is a pause.  An *atom* is a pair (i, v).

A strategy of lookahead k reads the last k+1 source symbols (fewer at the
start) and emits a set of target atoms; its post map sends a target answer to
a source answer.  A target realizer may return any member of the named target
set, or anything at all when that set is empty.
"""

from __future__ import annotations

import base64
import hashlib
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np


class SearchBudgetExceeded(RuntimeError):
    def __init__(self, msg, progress=None):
        super().__init__(msg)
        self.progress = progress


class SearchInconclusive(RuntimeError):
    pass


class NotCovered(ValueError):
    pass


@dataclass(frozen=True)
class FiniteChoiceProblem:
    factors: tuple
    label: str = ""

    def __post_init__(self):
        if not self.factors or any(n < 1 for n in self.factors):
            raise ValueError("factors must be positive")

    @property
    def name(self) -> str:
        return self.label or "x".join(f"c{n}" for n in self.factors)

    @property
    def ground(self) -> list:
        return list(product(*(range(n) for n in self.factors)))

    @property
    def atoms(self) -> list:
        return [(i, v) for i, n in enumerate(self.factors) for v in range(n)]

    @property
    def alphabet(self) -> list:
        return list(product(*(range(n + 1) for n in self.factors)))

    @property
    def pause(self) -> tuple:
        return (0,) * len(self.factors)

    def atom_bit(self, atom) -> int:
        return self.atoms.index(tuple(atom))

    def symbol_atoms(self, s) -> frozenset:
        return frozenset((i, x - 1) for i, x in enumerate(s) if x > 0)

    def single_atom_symbol(self, atom) -> tuple:
        i, v = atom
        s = [0] * len(self.factors)
        s[i] = v + 1
        return tuple(s)

    def solutions(self, excluded) -> list:
        """Members of the named set: ground points avoiding every excluded atom."""
        ex = set(excluded)
        return [x for x in self.ground if not any((i, x[i]) in ex for i in range(len(x)))]

    def ground_mask(self, atom_mask: int) -> int:
        atoms = self.atoms
        ex = {atoms[b] for b in range(len(atoms)) if atom_mask >> b & 1}
        ground = self.ground
        return sum(1 << ground.index(x) for x in self.solutions(ex))


def parse_problem(text: str) -> FiniteChoiceProblem:
    """``c4`` is choice on a 4-element set, ``c2xc2`` the product of two copies of ``c2``."""
    try:
        parts = [int(p.strip().removeprefix("c")) for p in text.lower().split("x")]
    except ValueError as exc:
        raise ValueError(f"cannot parse problem {text!r}") from exc
    return FiniteChoiceProblem(tuple(parts), text)


@dataclass(frozen=True)
class BoundedStrategy:
    lookahead: int
    pre: dict  # window (tuple of source symbols) -> frozenset of target atoms
    post: dict  # target answer -> source answer

    def emitted(self, window) -> frozenset:
        return self.pre.get(tuple(window), frozenset())

    def run_pre(self, symbols) -> list:
        """Target atoms emitted at each step."""
        k = self.lookahead
        return [self.emitted(symbols[max(0, t - k): t + 1]) for t in range(len(symbols))]


def simulate(source: FiniteChoiceProblem, strategy: BoundedStrategy, symbols) -> tuple:
    src = set()
    for s in symbols:
        src |= source.symbol_atoms(s)
    tgt = set()
    for e in strategy.run_pre(symbols):
        tgt |= e
    return frozenset(src), frozenset(tgt)


def windows(alphabet, k: int) -> list:
    return [w for j in range(1, k + 2) for w in product(alphabet, repeat=j)]


def flush_inputs(source: FiniteChoiceProblem, k: int):
    """Every input of depth <= k+2 followed by k+1 pauses."""
    tail = (source.pause,) * (k + 1)
    for d in range(k + 3):
        for word in product(source.alphabet, repeat=d):
            yield word + tail


def check_witness(source, target, strategy: BoundedStrategy) -> Optional[tuple]:
    """First (input, target answer) on which the strategy answers wrongly, or None."""
    for inp in flush_inputs(source, strategy.lookahead):
        src, tgt = simulate(source, strategy, inp)
        allowed = source.solutions(src)
        if not allowed:
            continue
        answers = target.solutions(tgt) or target.ground
        for y in answers:
            if strategy.post[y] not in allowed:
                return inp, y
    return None


def _minimal_strategy(source, target, post: dict, k: int) -> BoundedStrategy:
    # Exclude exactly the target answers whose image the newest symbol rules out.
    pre = {}
    for w in windows(source.alphabet, k):
        ex = source.symbol_atoms(w[-1])
        if not ex:
            continue
        bad = {y for y in target.ground if any((i, post[y][i]) in ex for i in range(len(post[y])))}
        atoms = frozenset((0, target.ground.index(y)) for y in bad) if len(target.factors) == 1 else None
        if atoms is None:
            return None
        pre[w] = atoms
    return BoundedStrategy(k, pre, post)


@dataclass
class Witness:
    source: str
    target: str
    strategy: BoundedStrategy
    inputs_checked: int

    def to_json(self) -> dict:
        return {
            "kind": "witness",
            "source": self.source,
            "target": self.target,
            "lookahead": self.strategy.lookahead,
            "post": {",".join(map(str, y)): list(x) for y, x in sorted(self.strategy.post.items())},
            "pre": {
                " ".join(",".join(map(str, s)) for s in w): sorted(list(a) for a in atoms)
                for w, atoms in sorted(self.strategy.pre.items())
            },
            "inputs_checked": self.inputs_checked,
        }


@dataclass
class ExhaustionCertificate:
    source: FiniteChoiceProblem
    target: FiniteChoiceProblem
    lookahead: int
    window_count: int
    used_windows: int
    classes: int
    pre_tables: int  # every table of the given lookahead, by direct count
    class_total: int  # the same number summed class by class
    post_maps: int
    refuting_answer: np.ndarray = field(repr=False)

    @property
    def strategies(self) -> int:
        return self.pre_tables * self.post_maps

    def digest(self) -> str:
        return hashlib.sha256(self.refuting_answer.tobytes()).hexdigest()

    def to_json(self) -> dict:
        return {
            "kind": "exhaustion",
            "source": self.source.name,
            "target": self.target.name,
            "lookahead": self.lookahead,
            "windows": self.window_count,
            "windows_fixed_by_class": self.used_windows,
            "classes": self.classes,
            "pre_tables": str(self.pre_tables),
            "pre_tables_summed_over_classes": str(self.class_total),
            "post_maps": self.post_maps,
            "strategies": str(self.strategies),
            "refuting_answer_digest": self.digest(),
            "refuting_answer": base64.b64encode(self.refuting_answer.tobytes()).decode(),
        }


def _class_of(source, target, strategy: BoundedStrategy) -> tuple:
    """(union over the all-pause windows, union over the windows holding each single-atom symbol)."""
    k = strategy.lookahead
    p = source.pause
    bit = {a: 1 << target.atom_bit(a) for a in target.atoms}

    def mask(atoms):
        return sum(bit[a] for a in atoms)

    base = 0
    for j in range(1, k + 2):
        base |= mask(strategy.emitted((p,) * j))
    others = []
    for atom in source.atoms:
        s = source.single_atom_symbol(atom)
        m = 0
        for j in range(k + 1):
            m |= mask(strategy.emitted((p,) * (k - j) + (s,) + (p,) * j))
        others.append(m)
    return base, others


def _class_index(base: int, others, width: int) -> int:
    idx = base
    for i, m in enumerate(others):
        idx |= m << (width * (i + 1))
    return idx


def _negative(source, target, k: int, max_classes: int) -> ExhaustionCertificate:
    na = len(target.atoms)
    ns = len(source.atoms)
    n_classes = 1 << (na * (1 + ns))
    if n_classes > max_classes:
        raise SearchBudgetExceeded(f"{n_classes} strategy classes exceed the budget {max_classes}")
    idx = np.arange(n_classes, dtype=np.int64)
    amask = (1 << na) - 1
    base = idx & amask
    parts = [(idx >> (na * (i + 1))) & amask for i in range(ns)]
    lut = np.array([target.ground_mask(m) or (1 << len(target.ground)) - 1 for m in range(1 << na)], dtype=np.int64)
    src_full = (1 << len(source.ground)) - 1
    inputs = []
    for chosen in product((0, 1), repeat=ns):
        excluded = [a for a, c in zip(source.atoms, chosen) if c]
        allowed = source.solutions(excluded)
        if allowed:
            inputs.append((chosen, sum(1 << source.ground.index(x) for x in allowed)))
    refuting = np.full(n_classes, 255, dtype=np.uint8)
    for y in range(len(target.ground)):
        meet = np.full(n_classes, src_full, dtype=np.int64)
        for chosen, allowed in inputs:
            t = base.copy()
            for c, part in zip(chosen, parts):
                if c:
                    t |= part
            hit = (lut[t] >> y) & 1
            meet = np.where(hit == 1, meet & allowed, meet)
        newly = (meet == 0) & (refuting == 255)
        refuting[newly] = y
    if (refuting == 255).any():
        raise SearchInconclusive(f"{int((refuting == 255).sum())} classes survive separated inputs at lookahead {k}")
    w = len(windows(source.alphabet, k))
    used = (k + 1) * (1 + ns)
    a = (1 << (k + 1)) - 1
    pops = np.zeros(n_classes, dtype=np.int64)
    for shift in range(na * (1 + ns)):
        pops += (idx >> shift) & 1
    by_pop = np.bincount(pops)
    per_free = (1 << na) ** (w - used)
    class_total = sum(int(c) * a ** p * per_free for p, c in enumerate(by_pop))
    return ExhaustionCertificate(
        source, target, k, w, used, n_classes, (1 << na) ** w, class_total,
        len(source.ground) ** len(target.ground), refuting,
    )


def search_reduction(source: FiniteChoiceProblem, target: FiniteChoiceProblem, k: int,
                     bound: int = 3, max_classes: int = 1 << 24):
    """A verified Witness, or an ExhaustionCertificate covering every strategy of lookahead k."""
    if k > bound:
        raise SearchBudgetExceeded(f"lookahead {k} exceeds the bound {bound}")
    checked = 0
    for images in product(source.ground, repeat=len(target.ground)):
        post = dict(zip(target.ground, images))
        strategy = _minimal_strategy(source, target, post, k)
        if strategy is None:
            break
        checked += 1
        if check_witness(source, target, strategy) is None:
            inputs = sum(len(source.alphabet) ** d for d in range(k + 3))
            return Witness(source.name, target.name, strategy, inputs)
    return _negative(source, target, k, max_classes)


@dataclass
class Transcript:
    steps: list  # (source symbol, emitted target atoms)
    source_set: list
    target_set: list
    target_answer: tuple
    final_answer: tuple

    @property
    def wrong(self) -> bool:
        return self.final_answer not in self.source_set

    def to_json(self) -> dict:
        return {
            "steps": [{"symbol": list(s), "emitted": sorted(list(a) for a in e)} for s, e in self.steps],
            "source_set": [list(x) for x in self.source_set],
            "target_set": [list(x) for x in self.target_set],
            "target_answer": list(self.target_answer),
            "final_answer": list(self.final_answer),
            "wrong": self.wrong,
        }


def replay_adversary(cert: ExhaustionCertificate, strategy: BoundedStrategy) -> Transcript:
    """Drive the strategy into a wrong answer using the certificate's refutation of its class."""
    source, target = cert.source, cert.target
    if strategy.lookahead > cert.lookahead:
        raise NotCovered(f"lookahead {strategy.lookahead} exceeds the certificate's {cert.lookahead}")
    if set(strategy.post) != set(target.ground) or not set(strategy.post.values()) <= set(source.ground):
        raise NotCovered("strategy answers do not match the certified problems")
    if any(not set(a) <= set(target.atoms) for a in strategy.pre.values()):
        raise NotCovered("strategy emits atoms outside the target problem")
    k = cert.lookahead
    padded = BoundedStrategy(k, _pad_pre(strategy, source, k), strategy.post)
    base, others = _class_of(source, target, padded)
    y = target.ground[int(cert.refuting_answer[_class_index(base, others, len(target.atoms))])]
    x = strategy.post[y]
    pause = (source.pause,) * (k + 1)
    for chosen in product((0, 1), repeat=len(source.atoms)):
        picked = [a for a, c in zip(source.atoms, chosen) if c]
        symbols = pause + sum(((source.single_atom_symbol(a),) + pause for a in picked), ())
        src, tgt = simulate(source, padded, symbols)
        allowed = source.solutions(src)
        answers = target.solutions(tgt) or target.ground
        if allowed and y in answers and x not in allowed:
            steps = list(zip(symbols, padded.run_pre(symbols)))
            return Transcript(steps, allowed, target.solutions(tgt), y, x)
    raise AssertionError("certificate does not refute this strategy")


def _pad_pre(strategy: BoundedStrategy, source, k: int) -> dict:
    # A strategy reading fewer symbols behaves like one ignoring the older part of a longer window.
    if strategy.lookahead == k:
        return dict(strategy.pre)
    j = strategy.lookahead + 1
    return {w: strategy.emitted(w[-j:]) for w in windows(source.alphabet, k)}


def identity_strategy(problem: FiniteChoiceProblem, k: int = 0) -> BoundedStrategy:
    pre = {}
    for w in windows(problem.alphabet, k):
        atoms = problem.symbol_atoms(w[-1])
        if atoms:
            pre[w] = atoms
    return BoundedStrategy(k, pre, {x: x for x in problem.ground})
