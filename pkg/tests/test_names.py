import json
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from closedchoice.names import (
    CoClosedName,
    CylinderRegion,
    MalformedName,
    PrefixStream,
    RationalCauchy,
    cantor_pair,
    cantor_unpair,
    components,
    load_coclosed,
    pair,
    pair_countable,
    pair_tuple,
    project,
    region_subset,
    unpair,
    unpair_tuple,
    validate_cauchy,
    word_code,
    word_decode,
)

words = st.text(alphabet="01", max_size=6)
nat_lists = st.lists(st.integers(0, 9), max_size=12)


def brute_points(depth):
    return ["".join(b) for b in product("01", repeat=depth)]


@given(nat_lists, nat_lists)
def test_pair_roundtrip(a, b):
    n = min(len(a), len(b))
    u, v = unpair(pair(a, b))
    assert u.symbols == tuple(a[:n]) and v.symbols == tuple(b[:n])


def test_pair_extends_generated_streams():
    zeros = PrefixStream.constant(0, 2)
    ones = PrefixStream.constant(1, 2)
    assert pair(zeros, ones).extended(8).symbols == (0, 1) * 4


@given(st.integers(0, 500), st.integers(0, 500))
def test_cantor_pairing_inverse(i, j):
    assert cantor_unpair(cantor_pair(i, j)) == (i, j)


def test_cantor_pairing_is_a_bijection_on_a_prefix():
    assert sorted(cantor_pair(*cantor_unpair(z)) for z in range(300)) == list(range(300))


def test_countable_pairing_projection():
    streams = [PrefixStream.generated(lambda k, i=i: i * 100 + k, 0) for i in range(10)]
    r = pair_countable(streams, length=40)
    assert len(r) == 40
    for i in range(9):
        comp = project(r, i).symbols
        assert comp and comp == tuple(i * 100 + k for k in range(len(comp)))
    assert [c.symbols[0] for c in components(r)] == [i * 100 for i in range(9)]


def test_countable_pairing_stops_at_first_gap():
    r = pair_countable([PrefixStream((1, 2, 3)), PrefixStream((4,))])
    # positions in order: (0,0), (1,0), (0,1), then (2,0) is undefined
    assert r.symbols == (1, 4, 2)


@given(st.lists(nat_lists, min_size=1, max_size=4))
def test_tuple_pairing_roundtrip(parts):
    back = unpair_tuple(pair_tuple(parts), len(parts))
    assert all(tuple(p[: len(b)]) == b.symbols for b, p in zip(back, parts))


def test_tuple_pairing_keeps_long_enough_parts():
    parts = [tuple(range(16)), tuple(range(100, 116)), tuple(range(200, 216))]
    back = unpair_tuple(pair_tuple(parts), 3)
    assert [b.symbols for b in back] == [parts[0], parts[1][:8], parts[2][:8]]


def test_word_code_is_length_lexicographic():
    seq = [""] + [w for d in range(1, 5) for w in brute_points(d)]
    assert [word_code(w) for w in seq] == list(range(len(seq)))
    assert all(word_decode(word_code(w)) == w for w in seq)


@given(st.lists(words, max_size=5), words)
def test_covers_matches_brute_force(ws, w):
    region = CylinderRegion(frozenset(ws))
    depth = max([len(x) for x in ws] + [len(w)])
    extensions = [w + t for t in brute_points(depth - len(w))]
    expected = all(any(p.startswith(x) for x in ws) for p in extensions)
    assert region.covers(w) == expected


@given(st.lists(words, max_size=4), st.lists(words, max_size=4))
def test_region_algebra_matches_point_sets(a, b):
    ra, rb = CylinderRegion(frozenset(a)), CylinderRegion(frozenset(b))
    depth = max([len(x) for x in a + b] + [0])
    pts = brute_points(depth)

    def members(r):
        return {p for p in pts if any(p.startswith(x) for x in r.words)}

    assert members(ra | rb) == members(ra) | members(rb)
    assert members(ra & rb) == members(ra) & members(rb)
    assert members(ra.complement(depth)) == set(pts) - members(ra)
    assert region_subset(ra, rb) == (members(ra) <= members(rb))


def test_nat_file_uses_atoms_and_null_pauses(tmp_path):
    f = tmp_path / "a.json"
    f.write_text(json.dumps({"space": "nat", "items": [None, 1, 0, None, 2]}))
    name = load_coclosed(f)
    assert name.atoms() == [1, 0, 2]
    assert CoClosedName.from_json(name.to_json()) == name


def test_real_items_are_exact():
    name = CoClosedName("real", ((1, 3, 2, 3),))
    assert name.atoms() == [(Fraction(1, 3), Fraction(2, 3))]
    with pytest.raises(MalformedName):
        CoClosedName("real", ((2, 1, 1, 1),))


def test_bad_json_reports_position(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text('{"space": "nat",\n "items": [1,, 2]}')
    with pytest.raises(MalformedName, match="line 2"):
        load_coclosed(f)


def test_unknown_space_rejected():
    with pytest.raises(MalformedName):
        CoClosedName("baire", ())


def test_validate_cauchy():
    good = RationalCauchy(tuple(Fraction(1, 3) + Fraction(1, 2 ** (j + 2)) for j in range(10)))
    assert validate_cauchy(good)
    assert not validate_cauchy(RationalCauchy((Fraction(0), Fraction(1))))
