"""Named audit suites over seeded corpora, and the runner behind ``audit``."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .adjstring import (
    CofibrantReplacement, check_fully_faithful_string, check_homotopy_idempotent, check_idempotent, corrupt_unit,
    verify_bijections, verify_triangle_identities,
)
from .corpus import CorpusSpec, gen_corpus
from .cubes import (
    audit_counit_iso, audit_hott_gens_weq, audit_L_side, audit_T_preservation, audit_triangulated_representables,
    box_prime_comparison, hott_generators, triangulation_pair,
)
from .fincat import build_box_prime_category, build_i1, build_simplex_category
from .kan import KanString, lan_by_comma
from .lifting import LiftingProblem, cylinder_contraction, fold_cylinder, has_lift, naive_lifts
from .marked_bisimp import MarkedSSet, build_bisimplicial_string, build_marked_string, degenerate_edges, flat, sharp
from .modelaudit import audit_fibration_comparison, audit_mono_sandwich
from .presheaf import (
    PresheafMap, boundary, compose, find_isomorphism, hom_set, is_iso, is_mono, map_to_json, naive_hom_set,
    presheaf_to_json, random_map, yoneda,
)
from .report import FAIL, AuditReport, aggregate, skipped
from .weqoracle import ORACLES, chain_complex, homology, homotopy_witness, make_oracle, verify_witness


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    corpus_size: int = 30
    trunc_level: int = 2
    cube_level: int = 2
    oracle: str = "chain"
    search_bound: int = 64
    bisimplicial_level: int = 1
    max_cells: int = 25
    jobs: int = 1


# -- corpora --------------------------------------------------------------------------

@lru_cache(maxsize=64)
def corpus(base: str, count: int, seed: int, level: int, max_level: int, max_cells: int = 25):
    return gen_corpus(CorpusSpec(base, count, max_cells, max_level, seed, level))


def _seed(cfg: SuiteConfig, salt: int) -> int:
    return int(np.random.SeedSequence([cfg.seed, salt]).generate_state(1)[0])


def random_markings(objects, seed: int) -> list[MarkedSSet]:
    """Flat, sharp, or a random marking of each object in turn."""
    rng = np.random.default_rng(seed)
    out = []
    for k, X in enumerate(objects):
        if k % 3 == 0:
            out.append(flat(X))
        elif k % 3 == 1:
            out.append(sharp(X))
        else:
            extra = {e for e in range(X.sizes[1]) if rng.random() < 0.5}
            out.append(MarkedSSet(X, degenerate_edges(X) | extra))
    return out


@dataclass
class StringCase:
    label: str
    string: object
    corpus_M: list
    corpus_N: list
    fully_faithful: bool | None


@lru_cache(maxsize=16)
def string_cases(cfg: SuiteConfig) -> dict[str, StringCase]:
    n, K, N, nb = cfg.corpus_size, cfg.cube_level, cfg.trunc_level, cfg.bisimplicial_level
    mc = cfg.max_cells
    i1 = KanString(build_i1(nb)).adjoint_string()
    k = KanString(build_box_prime_category(K)[1]).adjoint_string()
    marked = build_marked_string(N)
    tc = triangulation_pair(K, N).adjoint_string()
    simp_b = corpus("simplex", n, _seed(cfg, 1), nb, nb, mc).objects
    bisimp = corpus("bisimplex", n, _seed(cfg, 2), nb, nb, mc).objects
    # ran along the non-full k frees every extra square of k^* y([1]^2), so
    # its corpora stay one-dimensional to keep ran finite at desk scale
    prime = corpus("box_prime", n, _seed(cfg, 3), K, 1, mc).objects
    cube_1 = corpus("cube", n, _seed(cfg, 22), K, 1, mc).objects
    cube = corpus("cube", n, _seed(cfg, 4), K, K, mc).objects
    simp = corpus("simplex", n, _seed(cfg, 5), N, min(N, 2), mc).objects
    return {
        "i_1": StringCase("i_1", i1, simp_b, bisimp, True),
        "k": StringCase("k", k, prime, cube_1, False),
        "marked": StringCase("marked", marked, simp, random_markings(simp, _seed(cfg, 6)), True),
        "T|C": StringCase("T|C", tc, simp, cube, True),
    }


# -- suites ---------------------------------------------------------------------------

def suite_bijections(cfg: SuiteConfig) -> AuditReport:
    children = []
    for case in string_cases(cfg).values():
        s = case.string
        r = verify_bijections(s, list(zip(case.corpus_M, case.corpus_N)), list(zip(case.corpus_N, case.corpus_M)))
        r.check = f"bijections {case.label}"
        children.append(r)
    return aggregate("adjunction bijections", children, corpus_size=cfg.corpus_size)


def suite_triangles(cfg: SuiteConfig) -> AuditReport:
    children = [verify_triangle_identities(c.string, c.corpus_M, c.corpus_N) for c in string_cases(cfg).values()]
    children.append(suite_negative_control(cfg, expect_fail=True))
    return aggregate("triangle identities", children, corpus_size=cfg.corpus_size)


def suite_negative_control(cfg: SuiteConfig, expect_fail: bool = False) -> AuditReport:
    """The corrupted unit must be caught. As a suite of its own it reports the
    raw (failing) audit; inside the triangle suite it passes when caught."""
    case = string_cases(cfg)["i_1"]
    bad, at = corrupt_unit(case.string, case.corpus_M)
    raw = verify_triangle_identities(bad, case.corpus_M, case.corpus_N)
    raw.check = "corrupted unit (negative control)"
    if not expect_fail:
        return raw
    r = AuditReport("corrupted unit is rejected", params={"string": bad.name})
    witnesses = [c.witness for c in raw.walk() if c.status == FAIL and c.witness is not None]
    if raw.status != FAIL:
        r.fail("corrupted unit passed the triangle identities")
    elif not witnesses:
        r.fail("corrupted unit failed without a witness")
    else:
        r.details.append(f"rejected with witness at corpus object {witnesses[0].get('corpus_index')}")
        r.witness = witnesses[0]
    return r


def suite_idempotency(cfg: SuiteConfig) -> AuditReport:
    children = []
    for key in ("i_1", "marked", "T|C"):
        c = string_cases(cfg)[key]
        children.append(check_fully_faithful_string(c.string, c.corpus_M, expect=True))
        children.append(check_idempotent(c.string, c.corpus_N))
    return aggregate("fully faithful strings are idempotent", children)


def suite_homotopy_idempotency(cfg: SuiteConfig) -> AuditReport:
    oracle = make_oracle("iso")
    children = []
    for c in string_cases(cfg).values():
        if c.fully_faithful:
            children.append(check_homotopy_idempotent(c.string, CofibrantReplacement(), oracle, c.corpus_N))
    return aggregate("homotopy idempotency, all objects cofibrant", children)


def suite_representables(cfg: SuiteConfig) -> AuditReport:
    # representables up to [1]^3 regardless of the corpus cube level
    K = max(cfg.cube_level, 3)
    return audit_triangulated_representables(K, max(cfg.trunc_level, K))


def suite_counit(cfg: SuiteConfig) -> AuditReport:
    K, N = cfg.cube_level, max(cfg.trunc_level, cfg.cube_level)
    Ys = corpus("simplex", 15, _seed(cfg, 7), N, 2, cfg.max_cells).objects
    return audit_counit_iso(Ys, K, N)


def _cube_data(cfg: SuiteConfig):
    K = cfg.cube_level
    cc = corpus("cube", 20, _seed(cfg, 8), K, K, 40)
    rng = np.random.default_rng(_seed(cfg, 9))
    objs = cc.objects
    pairs = [(objs[2 * i], objs[2 * i + 1]) for i in range(10)]
    small = corpus("cube", 20, _seed(cfg, 10), K, 1, 12)
    spans = []
    for i in range(10):
        f = small.monos[i]
        g = random_map(f.source, small.objects[(i + 7) % 20], rng) or small.monos[i]
        spans.append((f, g))
    return cc.monos, pairs, spans


def suite_T_preservation(cfg: SuiteConfig) -> AuditReport:
    monos, pairs, spans = _cube_data(cfg)
    return audit_T_preservation(monos, pairs, spans, max(cfg.trunc_level, cfg.cube_level))


def suite_hott_generators(cfg: SuiteConfig) -> AuditReport:
    K = cfg.cube_level
    small = corpus("cube", 5, _seed(cfg, 11), K, 1, 10).monos
    gens = hott_generators(small)
    return audit_hott_gens_weq(gens, max(cfg.trunc_level, K), ORACLES[cfg.oracle], cfg.search_bound)


def suite_cylinder(cfg: SuiteConfig) -> AuditReport:
    Xs = corpus("simplex", 15, _seed(cfg, 12), cfg.trunc_level, min(cfg.trunc_level, 2), 12).objects
    r = AuditReport("cylinder factorization of the fold map", params={"objects": len(Xs), "search_bound": cfg.search_bound})
    t0 = time.perf_counter()
    found = 0
    for i, X in enumerate(Xs):
        cyl = fold_cylinder(X)
        if not is_mono(cyl.j):
            r.fail(f"object {i}: j is not mono", {"corpus_index": i, "object": presheaf_to_json(X)})
            continue
        if compose(cyl.p, cyl.j) != cyl.fold:
            r.fail(f"object {i}: p . j is not the fold map", {"corpus_index": i, "object": presheaf_to_json(X)})
            continue
        v, w = homotopy_witness(cyl.p, cfg.search_bound)
        if w is not None and verify_witness(w):
            found += 1
        r.verdicts.append(f"{i}: homotopy:{v.value}")
    r.details.append(f"homotopy-equivalence witnesses found: {found}/{len(Xs)}")
    if r.status != FAIL and found < len(Xs):
        r.status = "INCONCLUSIVE"
    r.timing = time.perf_counter() - t0
    return r


def suite_oracle_regression(cfg: SuiteConfig) -> AuditReport:
    rng = np.random.default_rng(_seed(cfg, 13))
    small = corpus("simplex", 50, _seed(cfg, 14), 2, 2, 12).objects
    a = AuditReport("hom_set against brute force", params={"instances": 50})
    b = AuditReport("has_lift against brute force", params={"instances": 50})
    t0 = time.perf_counter()
    for k in range(50):
        X, Y = small[k], small[(k * 7 + 3) % 50]
        fast = {f.key() for f in hom_set(X, Y)}
        slow = {f.key() for f in naive_hom_set(X, Y)}
        if fast != slow:
            a.fail(f"instance {k}: {len(fast)} maps against {len(slow)}", {"instance": k})
    a.timing = time.perf_counter() - t0
    t0 = time.perf_counter()
    D = build_simplex_category(2)
    sources = [boundary(D, 1)[1], boundary(D, 2)[1]]
    compared, k = 0, 0
    # draw until 50 commuting squares have been compared
    while compared < 50 and k < 1000:
        k += 1
        i = sources[k % 2]
        Z = small[int(rng.integers(50))]
        p = random_map(Z, small[int(rng.integers(50))], rng)
        top = random_map(i.source, Z, rng) if p is not None else None
        if top is None:
            continue
        cands = [g for g in hom_set(i.target, p.target) if compose(g, i) == compose(p, top)]
        if not cands:
            continue
        sq = LiftingProblem(i, p, top, cands[int(rng.integers(len(cands)))])
        fast = has_lift(sq) is not None
        slow = len(naive_lifts(sq)) > 0
        compared += 1
        if fast != slow:
            b.fail(f"instance {k}: search says {fast}, brute force says {slow}", {"instance": k})
    b.params["instances"] = compared
    if compared < 50:
        b.fail(f"only {compared} commuting squares found in {k} draws")
    b.timing = time.perf_counter() - t0
    c = AuditReport("homology consistency on generated objects")
    t0 = time.perf_counter()
    seen = 0
    for cc in string_cases(cfg)["T|C"].corpus_M + small:
        seen += 1
        C = chain_complex(cc)
        h = homology(cc)
        if not C.boundary_squares_vanish():
            c.fail("boundary of boundary is not zero", {"object": presheaf_to_json(cc)})
        if h.euler_from_cells() != h.euler_from_homology():
            c.fail("Euler characteristic mismatch", {"object": presheaf_to_json(cc)})
    h = homology(boundary(D, 2)[0])
    if list(h.betti[:2]) != [1, 1] or any(h.torsion):
        c.fail(f"homology of the triangle boundary is {h.to_dict()}")
    c.params["objects"] = seen
    c.timing = time.perf_counter() - t0
    return aggregate("oracle regression", [a, b, c])


def suite_k_comparison(cfg: SuiteConfig) -> AuditReport:
    K = cfg.cube_level
    cmp = box_prime_comparison(K, max(cfg.trunc_level, K))
    monos = corpus("box_prime", 20, _seed(cfg, 15), K, K, cfg.max_cells).monos
    return aggregate("k comparison", [
        cmp.audit_representables(min(K, 2)),
        cmp.audit_triangulations(),
        cmp.audit_monos(monos),
    ])


def suite_kan_oracle(cfg: SuiteConfig) -> AuditReport:
    """The realization engine against the comma-category colimit."""
    f = build_i1(cfg.bisimplicial_level)
    r = AuditReport("lan against comma-category colimit", params={"functor": f.name})
    t0 = time.perf_counter()
    ks = KanString(f)
    for i, A in enumerate(string_cases(cfg)["i_1"].corpus_M[:10]):
        a, b = ks.lan(A), lan_by_comma(f, A)
        if not (a.same_as(b) or find_isomorphism(a, b) is not None):
            r.fail(f"object {i}: engines disagree", {"corpus_index": i, "object": presheaf_to_json(A)})
    r.timing = time.perf_counter() - t0
    return r


def suite_classes(cfg: SuiteConfig, which: str = "all") -> AuditReport:
    cases = string_cases(cfg)
    K = cfg.cube_level
    cube_monos = corpus("cube", 20, _seed(cfg, 16), K, K, cfg.max_cells).monos
    simp_monos = corpus("simplex", 20, _seed(cfg, 17), cfg.bisimplicial_level, cfg.bisimplicial_level, cfg.max_cells).monos
    prime_monos = corpus("box_prime", 20, _seed(cfg, 18), K, K, cfg.max_cells).monos
    sandwich = audit_mono_sandwich(
        cubical_monos=cube_monos, N=max(cfg.trunc_level, K), simplicial_monos=simp_monos,
        i1_string=cases["i_1"].string, marked_string=build_marked_string(cfg.bisimplicial_level),
        box_prime_monos=prime_monos, k_lan=KanString(build_box_prime_category(K)[1]).lan,
    )
    level = cfg.bisimplicial_level
    rng = np.random.default_rng(_seed(cfg, 19))
    ms = build_marked_string(level)
    simp = corpus("simplex", 20, _seed(cfg, 20), level, level, 10).objects
    marked_objs = random_markings(simp, _seed(cfg, 21))
    marked_maps = []
    for k, M in enumerate(marked_objs):
        T = marked_objs[(k + 1) % len(marked_objs)]
        maps = [f for f in ms.N.hom_set(M, T, limit=4)] or [ms.N.identity(M)]
        marked_maps.append(maps[int(rng.integers(len(maps)))])
    bis = cases["i_1"].corpus_N[:20]
    bis_maps = []
    for k, X in enumerate(bis):
        f = random_map(X, bis[(k + 3) % len(bis)], rng)
        bis_maps.append(f if f is not None else PresheafMap(X, X, [np.arange(n) for n in X.sizes]))
    children = {
        "sandwich": sandwich,
        "marked": audit_fibration_comparison(ms, marked_maps, level),
        "bisimplicial": audit_fibration_comparison(cases["i_1"].string, bis_maps, level),
    }
    if which != "all":
        children = {"sandwich": sandwich, which: children[which]}
    return aggregate("induced classes", list(children.values()))


SUITES: dict[str, Callable[[SuiteConfig], AuditReport]] = {
    "bijections": suite_bijections,
    "triangles": suite_triangles,
    "idempotency": suite_idempotency,
    "triangulated-representables": suite_representables,
    "counit": suite_counit,
    "T-preservation": suite_T_preservation,
    "hott-generators": suite_hott_generators,
    "cylinder": suite_cylinder,
    "homotopy-idempotency": suite_homotopy_idempotency,
    "oracle-regression": suite_oracle_regression,
    "k-comparison": suite_k_comparison,
    "kan-oracle": suite_kan_oracle,
    "classes": suite_classes,
    "cubical-L": lambda cfg: audit_L_side(),
    "negative-control": suite_negative_control,
}
DEFAULT_BATTERY = tuple(name for name in SUITES if name != "negative-control")


def _run_one(name: str, cfg: SuiteConfig) -> AuditReport:
    t0 = time.perf_counter()
    r = SUITES[name](cfg)
    r.check = f"{name}: {r.check}"
    r.seed = cfg.seed
    r.timing = time.perf_counter() - t0
    return r


def run_suite(names, config: SuiteConfig | None = None) -> tuple[AuditReport, int]:
    """Run the named suites; the aggregate is ordered by check name."""
    cfg = config or SuiteConfig()
    names = list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; known: {sorted(SUITES)}")
    if cfg.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            reports = list(ex.map(_run_one, names, [cfg] * len(names)))
    else:
        reports = [_run_one(n, cfg) for n in names]
    top = aggregate("audit", reports, seed=cfg.seed, corpus_size=cfg.corpus_size, trunc_level=cfg.trunc_level, cube_level=cfg.cube_level)
    top.seed = cfg.seed
    return top, top.exit_code()


def with_overrides(cfg: SuiteConfig, **kw) -> SuiteConfig:
    return replace(cfg, **{k: v for k, v in kw.items() if v is not None})
