from math import comb

import pytest
from hypothesis import given

from kanaudit.cubes import cube_shape, triangulate
from kanaudit.fincat import build_box_prime_category, build_i1, identity_functor
from kanaudit.kan import coend_naive, lan, lan_by_comma, ran, restrict, restrict_map
from kanaudit.presheaf import (
    boundary,
    coproduct,
    count_homs,
    find_isomorphism,
    hom_set,
    is_iso,
    is_mono,
    terminal_presheaf,
    yoneda,
)

from strategies import monos, presheaves

I1 = build_i1(2)
I1_LOW = build_i1(1)
BOX_PRIME, K_INCL = build_box_prime_category(2)
DELTA = I1.source
BISIMPLEX = I1.target


def iso(X, Y):
    return find_isomorphism(X, Y) is not None


# -- restriction -------------------------------------------------------------------

@given(presheaves(max_cells=15))
def test_restriction_along_identity_is_unchanged(X):
    assert restrict(identity_functor(X.base), X).same_as(X)


def test_zeroth_row_of_a_representable():
    B, D = I1_LOW.target, I1_LOW.source
    Y = restrict(I1_LOW, yoneda(B, B.object_index("([1],[1])")))
    assert Y.sizes == (4, 6)
    assert iso(Y, coproduct(yoneda(D, 1), yoneda(D, 1))[0])


@pytest.mark.parametrize("obj", range(9))
def test_zeroth_row_cell_counts(obj):
    # cells at [n] are hom([n],[p]) x hom([0],[q])
    p, q = divmod(obj, 3)
    Y = restrict(I1, yoneda(BISIMPLEX, obj))
    assert BISIMPLEX.objects[obj] == f"({DELTA.objects[p]},{DELTA.objects[q]})"
    for n in range(3):
        assert Y.sizes[n] == comb(n + p + 1, n + 1) * (q + 1)


@given(monos("bisimplex", max_cells=15, level=2))
def test_restriction_preserves_monos(m):
    assert is_mono(restrict_map(I1, m))


# -- left Kan extension ----------------------------------------------------------

@pytest.mark.parametrize("f", [I1, K_INCL, identity_functor(DELTA)], ids=["i1", "k", "identity"])
def test_lan_of_a_representable_is_representable(f):
    for c in range(f.source.num_objects):
        L, _ = lan(f, yoneda(f.source, c))
        assert iso(L, yoneda(f.target, f.object_map[c]))


@given(presheaves(max_cells=15))
def test_lan_agrees_with_comma_category_colimit(X):
    L, unit = lan(I1, X)
    assert iso(L, lan_by_comma(I1, X))
    assert unit.is_natural()


@given(presheaves("box_prime", max_cells=12))
def test_lan_along_k_agrees_with_comma_category_colimit(X):
    L, _ = lan(K_INCL, X)
    assert iso(L, lan_by_comma(K_INCL, X))


@given(presheaves("cube", max_cells=15))
def test_realization_agrees_with_naive_coend(X):
    assert iso(triangulate(X, 2), coend_naive(X, cube_shape(X.base, 2)))


@given(presheaves(max_cells=15))
def test_unit_is_iso_for_a_fully_faithful_functor(X):
    _, unit = lan(I1, X)
    assert is_iso(unit)


@given(presheaves(max_cells=15))
def test_identity_extensions_are_isomorphic(X):
    f = identity_functor(X.base)
    L, unit = lan(f, X)
    R, counit = ran(f, X)
    assert iso(L, X) and iso(R, X)
    assert is_iso(unit) and is_iso(counit)


# -- right Kan extension ----------------------------------------------------------

@given(presheaves(max_cells=12, level=1, max_level=1))
def test_ran_cells_are_homs_out_of_restricted_representables(A):
    # ran(A)(d) = hom(f^* y(d), A), counted by independent enumeration
    f = I1_LOW
    R, counit = ran(f, A)
    for d in range(f.target.num_objects):
        assert R.sizes[d] == count_homs(restrict(f, yoneda(f.target, d)), A)
    assert is_iso(counit)


def test_ran_of_terminal_and_point_is_terminal():
    R, _ = ran(I1_LOW, terminal_presheaf(I1_LOW.source))
    assert R.sizes == (1, 1, 1, 1)
    R, _ = ran(I1_LOW, yoneda(I1_LOW.source, 0))
    assert R.sizes == (1, 1, 1, 1)
    R, _ = ran(K_INCL, terminal_presheaf(BOX_PRIME))
    assert iso(R, terminal_presheaf(K_INCL.target))


@given(presheaves(max_cells=12, level=1, max_level=1), presheaves("bisimplex", max_cells=12, level=1, max_level=1))
def test_restrict_ran_adjunction_counts(A, Y):
    f = I1_LOW
    R, _ = ran(f, A)
    assert count_homs(restrict(f, Y), A) == count_homs(Y, R)


@given(presheaves(max_cells=12, level=1, max_level=1), presheaves("bisimplex", max_cells=12, level=1, max_level=1))
def test_lan_restrict_adjunction_counts(A, Y):
    f = I1_LOW
    L, _ = lan(f, A)
    assert count_homs(L, Y) == count_homs(A, restrict(f, Y))


def test_unit_is_iso_on_a_boundary():
    D = I1.source
    bd, _ = boundary(D, 1)
    L, unit = lan(I1, bd)
    assert is_iso(unit)
    assert len(hom_set(bd, restrict(I1, L))) == len(hom_set(L, L))
