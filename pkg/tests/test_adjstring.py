import pytest
from hypothesis import given, strategies as st

from kanaudit.adjstring import (
    CofibrantReplacement,
    PresheafCategory,
    WeqOracle,
    check_fully_faithful_string,
    check_homotopy_idempotent,
    check_idempotent,
    compose_adjunction,
    corrupt_unit,
    epsilon_h,
    identity_string,
    triangle_report,
    verify_adjunction,
    verify_bijections,
    verify_triangle_identities,
)
from kanaudit.corpus import CorpusSpec, gen_corpus
from kanaudit.cubes import triangulation_pair
from kanaudit.fincat import FunctorData, build_i1, build_simplex_category
from kanaudit.kan import KanString, restrict
from kanaudit.marked_bisimp import build_marked_string, flat, sharp
from kanaudit.presheaf import identity_map, terminal_presheaf
from kanaudit.report import FAIL, INCONCLUSIVE, PASS, SKIPPED, Verdict

D2 = build_simplex_category(2)
I1 = build_i1(1)
SIMPLICIAL = gen_corpus(CorpusSpec("simplex", count=6, max_cells=15, seed=3)).objects
SIMPLICIAL_1 = gen_corpus(CorpusSpec("simplex", count=6, max_cells=12, max_level=1, seed=4)).objects
BISIMPLICIAL = gen_corpus(CorpusSpec("bisimplex", count=6, max_cells=12, max_level=1, seed=5)).objects


def i1_string():
    return KanString(I1).adjoint_string()


def swap_functor(P):
    """The automorphism ``(a, b) -> (b, a)`` of a square product category."""
    C, D = P.factors
    n = D.num_objects
    obj = [b * n + a for a in range(C.num_objects) for b in range(n)]
    mor = [P.pair_index[(g, f)] for f, g in P.data]
    return FunctorData("swap", P, P, obj, mor)


def test_identity_string_passes_every_audit():
    cat = PresheafCategory(D2)
    s = identity_string(cat)
    corpus = SIMPLICIAL
    assert verify_triangle_identities(s, corpus, corpus).status == PASS
    assert verify_bijections(s, list(zip(corpus, corpus[1:])), list(zip(corpus[1:], corpus))).status == PASS
    assert check_idempotent(s, corpus).status == PASS
    assert check_fully_faithful_string(s, corpus).status == PASS
    oracle = WeqOracle("iso", lambda f: Verdict.WEQ if cat.is_iso(f) else Verdict.UNKNOWN)
    assert check_homotopy_idempotent(s, CofibrantReplacement(), oracle, corpus).status == PASS
    comp = compose_adjunction(s)
    for X in corpus:
        assert comp.left(X) is X and comp.unit(X) == identity_map(X)


@pytest.mark.parametrize("make", [lambda: identity_string(PresheafCategory(D2)), i1_string], ids=["identity", "i1"])
def test_corrupted_unit_fails_with_a_witness(make):
    s = make()
    corpus_M = SIMPLICIAL if s.M.base == D2 else SIMPLICIAL_1
    corpus_N = corpus_M if s.N.base == D2 else BISIMPLICIAL
    bad, at = corrupt_unit(s, corpus_M)
    r = verify_triangle_identities(bad, corpus_M, corpus_N)
    assert r.status == FAIL
    failing = [c for c in r.walk() if c.status == FAIL and not c.children]
    assert failing and all(c.witness is not None for c in failing)
    triangles = [c for c in failing if c.check.startswith("triangles")]
    assert triangles and corpus_M[triangles[0].witness["corpus_index"]] is at


def test_corrupt_unit_needs_a_nontrivial_endomorphism():
    s = identity_string(PresheafCategory(D2))
    with pytest.raises(ValueError):
        corrupt_unit(s, [terminal_presheaf(D2)])


def test_i1_string_audits():
    s = i1_string()
    assert verify_triangle_identities(s, SIMPLICIAL_1, BISIMPLICIAL).status == PASS
    assert verify_bijections(s, list(zip(SIMPLICIAL_1, BISIMPLICIAL)), list(zip(BISIMPLICIAL, SIMPLICIAL_1))).status == PASS
    assert check_fully_faithful_string(s, SIMPLICIAL_1).status == PASS
    assert check_idempotent(s, BISIMPLICIAL).status == PASS


def test_composite_adjunctions_satisfy_the_triangles():
    s = i1_string()
    comp = compose_adjunction(s)
    assert verify_adjunction(comp, SIMPLICIAL_1, SIMPLICIAL_1).status == PASS
    m = build_marked_string(2)
    comp = compose_adjunction(m)
    for X in SIMPLICIAL:
        # U flat = Id and U sharp = Id on the nose
        assert comp.left(X).same_as(X)
        assert comp.right(X).same_as(X)
    assert triangle_report(comp, SIMPLICIAL, SIMPLICIAL).status == PASS


def test_fully_faithful_mismatch_is_reported():
    s = i1_string()
    r = check_fully_faithful_string(s, SIMPLICIAL_1, expect=False)
    assert r.status == FAIL and r.witness is not None
    r = check_fully_faithful_string(s, SIMPLICIAL_1, expect=None)
    assert r.status == PASS and r.params["fully_faithful"] is True


@given(st.integers(0, 2 ** 16))
def test_idempotency_is_invariant_under_an_isomorphic_string(seed):
    # precompose i_1 with the swap automorphism: the zeroth column string
    P = I1.target
    sw = swap_functor(P)
    assert sw.check() == []
    col = FunctorData("i1-column", I1.source, P,
                      [sw.object_map[o] for o in I1.object_map], [sw.morphism_map[m] for m in I1.morphism_map])
    s, t = i1_string(), KanString(col).adjoint_string()
    Ys = gen_corpus(CorpusSpec("bisimplex", count=3, max_cells=10, max_level=1, seed=seed)).objects
    swapped = [restrict(sw, Y) for Y in Ys]
    for Y, Z in zip(Ys, swapped):
        assert s.F(Y).same_as(t.F(Z))
    a, b = check_idempotent(s, Ys), check_idempotent(t, swapped)
    assert a.status == b.status == PASS


def test_homotopy_idempotency_of_fully_faithful_strings():
    iso = WeqOracle("iso", lambda f: Verdict.WEQ if PresheafCategory(f.source.base).is_iso(f) else Verdict.UNKNOWN)
    s = i1_string()
    r = check_homotopy_idempotent(s, CofibrantReplacement(), iso, BISIMPLICIAL)
    assert r.status == PASS
    for X in BISIMPLICIAL:
        eh, Ac, q = epsilon_h(s, CofibrantReplacement(), X)
        assert s.M.equal(s.M.compose(s.F.mor(eh), s.eta(Ac)), q)
    markings = [flat(X) for X in SIMPLICIAL] + [sharp(X) for X in SIMPLICIAL]
    assert check_homotopy_idempotent(build_marked_string(2), CofibrantReplacement(), iso, markings).status == PASS


def test_oracle_verdicts_drive_the_status():
    s = i1_string()
    unknown = WeqOracle("unknown", lambda f: Verdict.UNKNOWN)
    never = WeqOracle("never", lambda f: Verdict.NOT_WEQ)
    assert check_homotopy_idempotent(s, CofibrantReplacement(), unknown, BISIMPLICIAL).status == INCONCLUSIVE
    assert check_homotopy_idempotent(s, CofibrantReplacement(), never, BISIMPLICIAL).status == FAIL


def test_strings_without_a_left_adjoint_skip_left_checks():
    s = triangulation_pair(1, 2).adjoint_string()
    assert s.L is None
    Ys = SIMPLICIAL
    r = check_homotopy_idempotent(s, CofibrantReplacement(), WeqOracle("u", lambda f: Verdict.UNKNOWN), Ys)
    assert r.status == SKIPPED
    statuses = {c.status for c in check_idempotent(s, gen_corpus(CorpusSpec("cube", count=3, max_cells=10, max_level=1, seed=2, level=1)).objects).walk()}
    assert SKIPPED in statuses and FAIL not in statuses
    with pytest.raises(ValueError):
        compose_adjunction(s)
