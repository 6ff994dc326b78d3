import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from kanaudit.cubes import nerve_of_cube
from kanaudit.fincat import build_simplex_category
from kanaudit.lifting import (
    GeneratorSet,
    LiftingProblem,
    bounded_soa_factor,
    cylinder_contraction,
    detect_fibrancy,
    fold_cylinder,
    gen_boundaries,
    gen_horns,
    has_lift,
    has_rlp,
    horn,
    lifting_squares,
    naive_lifts,
    pushout_product,
)
from kanaudit.presheaf import (
    PresheafMap,
    boundary,
    compose,
    coproduct,
    empty_presheaf,
    find_isomorphism,
    hom_set,
    identity_map,
    is_iso,
    is_mono,
    product,
    random_map,
    terminal_presheaf,
    yoneda,
    yoneda_map,
)
from kanaudit.report import FAIL, PASS
from kanaudit.weqoracle import homotopy_witness, verify_witness

from strategies import monos, presheaves

D1 = build_simplex_category(1)
D2 = build_simplex_category(2)
D3 = build_simplex_category(3)


def to_point(X):
    return PresheafMap(X, terminal_presheaf(X.base), [np.zeros(n, dtype=np.int64) for n in X.sizes])


def from_empty(X):
    return PresheafMap(empty_presheaf(X.base), X, [[] for _ in X.sizes])


# -- generators ---------------------------------------------------------------------

def test_generator_counts():
    assert len(gen_boundaries(1)) == 2
    assert [f.target.sizes for f in gen_boundaries(1).maps] == [(1, 1), (2, 3)]
    assert gen_boundaries(1).maps[0].source.sizes == (0, 0)
    assert len(gen_horns(2)) == 5
    assert len(gen_horns(2, inner_only=True)) == 1
    assert gen_horns(2, inner_only=True).labels == ["L1[2]"]
    assert len(gen_horns(3)) == 2 + 3 + 4
    assert len(gen_horns(3, inner_only=True)) == 1 + 2


def test_horn_has_all_faces_but_one():
    H, inc = horn(D2, 2, 1)
    assert [len(H.nondegenerate(c)) for c in range(3)] == [3, 2, 0]
    assert is_mono(inc)


def test_generator_sets_reject_non_monos():
    pt = terminal_presheaf(D1)
    two, _ = coproduct(pt, pt)
    with pytest.raises(ValueError):
        GeneratorSet("bad", [to_point(two)], ["fold"])


# -- lifting -------------------------------------------------------------------------

def test_inner_horn_lifts_into_the_nerve_of_a_square():
    _, i = horn(D2, 2, 1)
    p = to_point(nerve_of_cube(2, 2))
    squares = list(lifting_squares(i, p))
    assert squares
    for sq in squares:
        h = has_lift(sq)
        assert h is not None
        assert compose(h, i) == sq.top and compose(p, h) == sq.bottom


def test_no_lift_across_components():
    pt = terminal_presheaf(D1)
    two, inj = coproduct(pt, pt)
    fold = to_point(two)
    bd, i = boundary(D1, 1)
    # the two endpoints go to the two different points
    top = next(f for f in hom_set(bd, two) if list(f.components[0]) == [0, 1])
    bottom = to_point(yoneda(D1, 1))
    sq = LiftingProblem(i, fold, top, bottom)
    assert sq.commutes()
    assert has_lift(sq) is None
    assert naive_lifts(sq) == []


@given(monos(max_cells=10))
def test_isomorphisms_always_lift(i):
    p = identity_map(i.target)
    squares = list(lifting_squares(i, p, limit=5))
    assert squares
    for sq in squares:
        assert has_lift(sq) == sq.bottom


def test_non_commuting_square_is_rejected():
    bd, i = boundary(D1, 1)
    y1 = yoneda(D1, 1)
    p = identity_map(y1)
    top = next(f for f in hom_set(bd, y1) if list(f.components[0]) == [1, 0])
    with pytest.raises(ValueError):
        has_lift(LiftingProblem(i, p, top, identity_map(y1)))


@given(st.sampled_from([0, 1, 2]), presheaves(max_cells=12), presheaves(max_cells=12), st.integers(0, 2 ** 16))
def test_has_lift_agrees_with_all_fillers(which, Z, W, seed):
    rng = np.random.default_rng(seed)
    i = [boundary(D2, 1)[1], boundary(D2, 2)[1], horn(D2, 2, 1)[1]][which]
    p = random_map(Z, W, rng)
    assume(p is not None)
    for sq in lifting_squares(i, p, limit=6):
        fast = has_lift(sq)
        slow = naive_lifts(sq)
        assert (fast is not None) == bool(slow)
        if fast is not None:
            assert fast.key() in {h.key() for h in slow}


# -- pushout-product -------------------------------------------------------------

def test_pushout_product_of_boundary_and_endpoint():
    _, i = boundary(D2, 1)
    d = yoneda_map(D2, D2.hom(0, 1)[0], yoneda(D2, 0), yoneda(D2, 1))
    pp = pushout_product(i, d)
    assert is_mono(pp)
    assert [len(pp.source.nondegenerate(c)) for c in range(2)] == [4, 3]
    square, _ = product(yoneda(D2, 1), yoneda(D2, 1))
    assert find_isomorphism(pp.target, square) is not None


@given(monos(max_cells=8), monos(max_cells=8))
def test_pushout_product_of_monos_is_mono(i, j):
    assert is_mono(pushout_product(i, j))


@given(monos(max_cells=10), presheaves(max_cells=6))
def test_pushout_product_with_an_isomorphism_is_an_isomorphism(i, K):
    assert is_iso(pushout_product(i, identity_map(K)))


def test_pushout_product_from_empty_is_an_end_inclusion():
    B = yoneda(D2, 1)
    d = yoneda_map(D2, D2.hom(0, 1)[0], yoneda(D2, 0), yoneda(D2, 1))
    pp = pushout_product(from_empty(B), d)
    # B x pt -> B x I
    assert pp.source.sizes == B.sizes and is_mono(pp)


# -- fibrancy ------------------------------------------------------------------------

def test_fibrancy_examples():
    assert detect_fibrancy(terminal_presheaf(D3), gen_horns(3)).status == PASS
    bd, _ = boundary(D2, 1)
    assert detect_fibrancy(bd, gen_horns(2)).status == PASS
    for n in (1, 2):
        X = nerve_of_cube(n, 3)
        assert detect_fibrancy(X, gen_horns(3, inner_only=True), label="quasi-category").status == PASS
        kan = detect_fibrancy(X, gen_horns(3))
        assert kan.status == FAIL and kan.witness["generator"].startswith("L")
    assert "up to level 3" in detect_fibrancy(terminal_presheaf(D3), gen_horns(3)).check


def test_fibrancy_skips_generators_above_the_level():
    X = nerve_of_cube(1, 3)
    assert detect_fibrancy(X, gen_horns(3), level=0).status == PASS


def test_fibrancy_level_is_capped_by_the_truncation():
    r = detect_fibrancy(yoneda(D1, 1), gen_horns(1), level=5)
    assert r.params["level"] == 1 and r.check.endswith("up to level 1")


# -- cylinder ------------------------------------------------------------------------

@given(presheaves(max_cells=12))
def test_fold_cylinder_factors_the_fold(X):
    cyl = fold_cylinder(X)
    assert is_mono(cyl.j)
    assert compose(cyl.p, cyl.j) == cyl.fold


def test_cylinder_on_a_point_is_the_interval():
    cyl = fold_cylinder(terminal_presheaf(D2))
    assert cyl.XX.sizes == (2, 2, 2)
    assert find_isomorphism(cyl.XI, yoneda(D2, 1)) is not None


@given(presheaves(max_cells=10))
def test_cylinder_projection_is_a_homotopy_equivalence(X):
    cyl = fold_cylinder(X)
    s, H = cylinder_contraction(cyl)
    assert H.is_natural()
    assert compose(cyl.p, s) == identity_map(X)
    v, w = homotopy_witness(cyl.p)
    assert w is not None and verify_witness(w)


# -- bounded small object argument ------------------------------------------------

def test_soa_from_empty_to_a_point():
    pt = terminal_presheaf(D2)
    r = bounded_soa_factor(from_empty(pt), gen_horns(2), 2)
    assert r.rounds <= 2 and r.residual == []
    assert compose(r.right, r.left) == from_empty(pt)


def test_soa_fills_the_inner_horn():
    H, i = horn(D2, 2, 1)
    f = to_point(H)
    inner = gen_horns(2, inner_only=True)
    r0 = bounded_soa_factor(f, inner, 0)
    assert r0.rounds == 0 and r0.left == identity_map(H) and r0.right == f
    assert len(r0.residual) == 1
    r = bounded_soa_factor(f, inner, 3)
    assert r.rounds == 1 and r.attached == [1] and r.residual == []
    assert is_mono(r.left) and compose(r.right, r.left) == f
    assert has_rlp(r.right, inner)
    assert find_isomorphism(r.right.source, yoneda(D2, 2)) is not None


def test_soa_keeps_maps_that_already_lift():
    f = to_point(nerve_of_cube(2, 2))
    r = bounded_soa_factor(f, gen_horns(2, inner_only=True), 3)
    assert r.rounds == 0 and r.right == f
