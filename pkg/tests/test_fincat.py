import itertools
from math import comb

import pytest
from hypothesis import given, strategies as st

from kanaudit.fincat import (
    build_box_prime_category,
    build_dedekind_cube_category,
    build_i1,
    build_simplex_category,
    category_from_builder,
    fincat_from_json,
    fincat_to_json,
    fullness_report,
    functor_from_json,
    functor_to_json,
    identity_functor,
    is_faithful,
    is_fully_faithful,
    product_category,
    terminal_category,
)


# -- independent enumerators ----------------------------------------------------

def monotone_chain_maps(m, n):
    """Every function [m] -> [n] filtered for monotonicity."""
    return [t for t in itertools.product(range(n + 1), repeat=m + 1) if all(a <= b for a, b in zip(t, t[1:]))]


def monotone_cube_maps(m, n):
    """Every function 2^m -> 2^n (points as bitmasks) filtered for monotonicity."""
    def leq(a, b):
        return a & ~b == 0

    pts = range(2 ** m)
    out = []
    for t in itertools.product(range(2 ** n), repeat=2 ** m):
        if all(leq(t[a], t[b]) for a in pts for b in pts if leq(a, b)):
            out.append(t)
    return out


def box_prime_closure(K):
    """Close faces, degeneracies and connections under composition."""
    def insert(x, i, e):
        low = x & ((1 << i) - 1)
        return low | (e << i) | ((x >> i) << (i + 1))

    def drop(x, i):
        low = x & ((1 << i) - 1)
        return low | ((x >> (i + 1)) << i)

    def merge(x, i, op):
        a, b = (x >> i) & 1, (x >> (i + 1)) & 1
        v = op(a, b)
        return drop(x, i + 1) & ~(1 << i) | (v << i)

    gens = set()
    for n in range(K + 1):
        for m in range(n + 1):
            ident = (n, n, tuple(range(2 ** n)))
            gens.add(ident)
        if n < K:
            for i in range(n + 1):
                for e in (0, 1):
                    gens.add((n, n + 1, tuple(insert(x, i, e) for x in range(2 ** n))))
                gens.add((n + 1, n, tuple(drop(x, i) for x in range(2 ** (n + 1)))))
            for i in range(n):
                for op in (min, max):
                    gens.add((n + 1, n, tuple(merge(x, i, op) for x in range(2 ** (n + 1)))))
    closed = set(gens)
    frontier = set(gens)
    while frontier:
        new = set()
        for f in frontier:
            for g in list(closed):
                for a, b in ((f, g), (g, f)):
                    if a[1] == b[0]:
                        h = (a[0], b[1], tuple(b[2][y] for y in a[2]))
                        if h not in closed:
                            new.add(h)
        closed |= new
        frontier = new
    return closed


# -- sizes --------------------------------------------------------------------------

def test_simplex_hom_sizes_match_binomial_and_enumeration():
    D = build_simplex_category(3)
    for m in range(4):
        for n in range(4):
            tables = sorted(D.data[u] for u in D.hom(m, n))
            assert tables == sorted(monotone_chain_maps(m, n))
            assert len(tables) == comb(m + n + 1, m + 1)


def test_simplex_examples():
    D = build_simplex_category(2)
    assert len(D.hom(2, 1)) == 4
    assert len(D.hom(1, 2)) == 6
    assert D.num_morphisms == 31


def test_cube_hom_sets_are_all_monotone_maps():
    C = build_dedekind_cube_category(2)
    for m in range(3):
        for n in range(3):
            assert sorted(C.data[u] for u in C.hom(m, n)) == sorted(monotone_cube_maps(m, n))
    assert len(C.hom(0, 1)) == 2
    assert len(C.hom(1, 1)) == 3
    assert len(C.hom(2, 1)) == 6
    assert C.num_morphisms == 63


def test_cube_size_at_three_matches_dedekind_numbers():
    # monotone Boolean functions of m variables: 2, 3, 6, 20
    dedekind = [2, 3, 6, 20]
    expected = sum(dedekind[m] ** n for m in range(4) for n in range(4))
    assert expected == 8735
    assert build_dedekind_cube_category(3).num_morphisms == expected


@pytest.mark.parametrize("K", [1, 2, 3])
def test_box_prime_matches_generator_closure(K):
    P, k = build_box_prime_category(K)
    image = {(P.dom[u], P.cod[u], k.target.data[k.morphism_map[u]]) for u in range(P.num_morphisms)}
    assert image == box_prime_closure(K)
    assert len(image) == P.num_morphisms


def test_box_prime_examples():
    P, k = build_box_prime_category(2)
    assert P.num_morphisms == 47
    assert len(P.hom(1, 2)) == 8
    assert is_faithful(k)[0]
    full, witness = is_fully_faithful(k)
    assert not full and witness is not None
    report = fullness_report(k)
    closure = box_prime_closure(2)
    short = {key: v for key, v in report.items() if v[0] != v[1]}
    assert set(short) == {("[1]^1", "[1]^2"), ("[1]^2", "[1]^2")}
    for (a, b), (got, full_size) in short.items():
        m, n = int(a[-1]), int(b[-1])
        assert got == sum(1 for f in closure if f[:2] == (m, n))
        assert full_size == len(monotone_cube_maps(m, n))


def test_i1_and_identity_are_fully_faithful():
    I = build_i1(2)
    assert is_fully_faithful(I) == (True, None)
    for m in range(3):
        for n in range(3):
            assert len(I.source.hom(m, n)) == len(I.target.hom(I.object_map[m], I.object_map[n]))
    C = build_dedekind_cube_category(2)
    assert is_fully_faithful(identity_functor(C))[0]
    assert not identity_functor(C).check()
    assert not I.check()


def test_terminal_and_product():
    T = terminal_category()
    assert T.num_objects == 1 and T.num_morphisms == 1
    D = build_simplex_category(1)
    P = product_category(D, D)
    assert P.num_objects == 4
    assert P.num_morphisms == build_simplex_category(1).num_morphisms ** 2
    assert not P.check()


def test_builders_reject_unknown_kind():
    with pytest.raises(ValueError):
        category_from_builder({"kind": "nonsense"})


# -- laws ---------------------------------------------------------------------------

CATEGORIES = [build_simplex_category(2), build_dedekind_cube_category(2), build_box_prime_category(2)[0]]


@given(st.sampled_from(CATEGORIES), st.data())
def test_composition_is_associative(C, data):
    f = data.draw(st.integers(0, C.num_morphisms - 1))
    g = data.draw(st.sampled_from(C.morphisms_from(C.cod[f])))
    h = data.draw(st.sampled_from(C.morphisms_from(C.cod[g])))
    assert C.compose(h, C.compose(g, f)) == C.compose(C.compose(h, g), f)


@given(st.sampled_from(CATEGORIES), st.data())
def test_identities_are_neutral(C, data):
    f = data.draw(st.integers(0, C.num_morphisms - 1))
    assert C.compose(C.identity[C.cod[f]], f) == f
    assert C.compose(f, C.identity[C.dom[f]]) == f


@pytest.mark.parametrize("K", [1, 2, 3])
def test_box_prime_inclusion_is_faithful(K):
    _, k = build_box_prime_category(K)
    assert is_faithful(k) == (True, None)


def test_full_law_check_on_small_categories():
    for C in CATEGORIES:
        assert C.check() == []


# -- serialization -------------------------------------------------------------------

@pytest.mark.parametrize("C", CATEGORIES + [product_category(build_simplex_category(1), build_simplex_category(1))])
def test_category_json_round_trip(C):
    D = fincat_from_json(fincat_to_json(C))
    assert D.objects == C.objects
    assert D.num_morphisms == C.num_morphisms
    assert all(D.compose(g, f) == C.compose(g, f) for f in range(C.num_morphisms) for g in C.morphisms_from(C.cod[f]))
    assert fincat_to_json(C)["format"].startswith("kanaudit.")


def test_functor_json_round_trip():
    _, k = build_box_prime_category(2)
    k2 = functor_from_json(functor_to_json(k))
    assert k2.object_map == k.object_map
    assert k2.morphism_map == k.morphism_map
    assert not k2.check()
