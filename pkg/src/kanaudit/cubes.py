"""Triangulation of cubical sets, its right adjoint, and the comparison
between the two cube categories.

Triangulation sends the representable ``[1]^n`` to the nerve of the poset
``[1]^n`` and extends by colimits; it is the realization for that shape.
Its right adjoint (``cubify``) is the matching nerve. The left adjoint on
the simplicial side has no finite construction here; checks that need it
report SKIPPED-UNIMPLEMENTABLE.
"""
from __future__ import annotations

import time
from functools import lru_cache
from typing import Sequence

import numpy as np

from .adjstring import AdjointString
from .fincat import FinCat, FunctorData, build_box_prime_category, build_dedekind_cube_category, build_simplex_category
from .kan import KanString, Shape, ShapeAdjunction
from .lifting import GeneratorSet, pushout_product
from .presheaf import (
    Presheaf, PresheafMap, colimit, compose, find_isomorphism, induced_from_colimit, induced_into_limit, is_iso,
    is_mono, product, pushout, yoneda, yoneda_map,
)
from .report import FAIL, AuditReport, aggregate, skipped, verdict_status
from .weqoracle import DEFAULT_CHAIN, homology, oracle_chain


class ExactnessError(ValueError):
    pass


# -- nerves of posets ----------------------------------------------------------------

def nerve_of_poset(size: int, leq, N: int, name: str = "N(P)") -> Presheaf:
    """Simplicial set of weakly increasing chains ``x_0 <= ... <= x_k`` (k <= N)."""
    D = build_simplex_category(N)
    chains: list[list[tuple[int, ...]]] = []
    for k in range(N + 1):
        out: list[tuple[int, ...]] = []

        def grow(prefix: tuple[int, ...]) -> None:
            if len(prefix) == k + 1:
                out.append(prefix)
                return
            for y in range(size):
                if not prefix or leq(prefix[-1], y):
                    grow(prefix + (y,))

        grow(())
        chains.append(out)
    index = [{ch: i for i, ch in enumerate(cs)} for cs in chains]
    tables = {}
    for u in range(D.num_morphisms):
        a, b = D.dom[u], D.cod[u]
        t = D.data[u]
        tables[u] = np.fromiter((index[a][tuple(ch[j] for j in t)] for ch in chains[b]), dtype=np.int64, count=len(chains[b]))
    X = Presheaf(D, [len(c) for c in chains], tables, name=name)
    X.chains = chains
    X.chain_index = index
    return X


@lru_cache(maxsize=None)
def nerve_of_cube(n: int, N: int) -> Presheaf:
    """Nerve of the Boolean poset ``[1]^n`` (bitmasks ordered by inclusion)."""
    return nerve_of_poset(1 << n, lambda a, b: a & b == a, N, name=f"N([1]^{n})")


def poset_nerve_map(source: Presheaf, target: Presheaf, table: Sequence[int]) -> PresheafMap:
    """Map of nerves induced by a monotone map given as a table."""
    comps = []
    for k, chains in enumerate(source.chains):
        idx = target.chain_index[k]
        comps.append([idx[tuple(table[x] for x in ch)] for ch in chains])
    return PresheafMap(source, target, comps)


def cube_shape(base: FinCat, N: int) -> Shape:
    """``[1]^n |-> N([1]^n)`` for any cube category whose morphisms are
    monotone maps stored as tables (Dedekind cubes or the subcategory)."""
    return Shape(
        base, build_simplex_category(N),
        lambda c: nerve_of_cube(base.rank[c], N),
        lambda u, s, t: poset_nerve_map(s, t, base.data[u]),
        name=f"N([1]^-)<={N}",
    )


# -- triangulation pair ---------------------------------------------------------------

class TriangulationPair:
    """``T -| C`` between cubical sets over ``base`` and simplicial sets at level ``N``."""

    def __init__(self, base: FinCat, N: int):
        self.base = base
        self.K = max(base.rank)
        self.N = N
        self.adj = ShapeAdjunction(cube_shape(base, N), "T", "C")
        self.T = self.adj.left
        self.C = self.adj.right
        self.unit = self.adj.unit
        self.counit = self.adj.counit

    @property
    def exact(self) -> bool:
        return self.N >= self.K

    def triangulate(self, X: Presheaf) -> Presheaf:
        return self.T(X)

    def cubify(self, Y: Presheaf) -> Presheaf:
        if not self.exact:
            raise ExactnessError(f"cubify needs simplicial level N >= cube level K (N={self.N}, K={self.K})")
        return self.C(Y)

    def adjoint_string(self) -> AdjointString:
        """``F = T``, ``R = C``; the simplicial left adjoint is not constructed."""
        return AdjointString(f"T|C(K={self.K},N={self.N})", F=self.T, L=None, R=self.C, eta=None, eps=None, eta_r=self.unit, eps_r=self.counit)


@lru_cache(maxsize=None)
def triangulation_pair(K: int, N: int, prime: bool = False) -> TriangulationPair:
    base = build_box_prime_category(K)[0] if prime else build_dedekind_cube_category(K)
    return TriangulationPair(base, N)


def _pair_for(X: Presheaf, N: int) -> TriangulationPair:
    kind = (getattr(X.base, "builder", None) or {}).get("kind")
    K = max(X.base.rank)
    if kind == "dedekind_cube":
        return triangulation_pair(K, N)
    if kind == "box_prime":
        return triangulation_pair(K, N, prime=True)
    return TriangulationPair(X.base, N)


def triangulate(X: Presheaf, N: int) -> Presheaf:
    return _pair_for(X, N).T(X)


def triangulate_map(f: PresheafMap, N: int) -> PresheafMap:
    return _pair_for(f.source, N).T.mor(f)


def cubify(Y: Presheaf, K: int) -> Presheaf:
    N = max(Y.base.rank)
    if N < K:
        raise ExactnessError(f"cubify needs simplicial level N >= cube level K (N={N}, K={K})")
    return triangulation_pair(K, N).C(Y)


# -- audits -------------------------------------------------------------------------

def audit_triangulated_representables(K: int, N: int) -> AuditReport:
    """``T(y([1]^n)) = N([1]^n)`` exactly and homology of a point, for n <= K."""
    r = AuditReport("triangulated representables", params={"K": K, "N": N})
    t0 = time.perf_counter()
    pair = triangulation_pair(K, N)
    C = pair.base
    for n in range(K + 1):
        TX = pair.T(yoneda(C, n))
        ref = nerve_of_cube(n, N)
        nd = [len(TX.nondegenerate(k)) for k in range(N + 1)]
        if not (TX.same_as(ref) or find_isomorphism(TX, ref) is not None):
            r.fail(f"T(y([1]^{n})) is not isomorphic to N([1]^{n})", {"n": n})
        h = homology(TX)
        r.details.append(f"n={n}: nondegenerate {nd}, betti {h.betti}")
        if not h.is_point():
            r.fail(f"homology of T(y([1]^{n})) is not that of a point: {h.betti}", {"n": n})
    r.timing = time.perf_counter() - t0
    return r


def audit_counit_iso(corpus: Sequence[Presheaf], K: int, N: int | None = None) -> AuditReport:
    """``T C Y -> Y`` iso at each corpus object (verdict at truncation (K, N) only)."""
    N = N if N is not None else max(corpus[0].base.rank) if corpus else K
    pair = triangulation_pair(K, N)
    r = AuditReport("counit TC -> Id iso", params={"K": K, "N": N, "objects": len(corpus)})
    t0 = time.perf_counter()
    if not pair.exact:
        raise ExactnessError(f"N={N} < K={K}")
    for i, Y in enumerate(corpus):
        if not is_iso(pair.counit(Y)):
            from .presheaf import presheaf_to_json
            r.fail(f"counit is not an isomorphism at corpus object {i}", {"corpus_index": i, "object": presheaf_to_json(Y)})
    r.timing = time.perf_counter() - t0
    return r


def audit_T_preservation(monos: Sequence[PresheafMap], pairs: Sequence[tuple[Presheaf, Presheaf]],
                         spans: Sequence[tuple[PresheafMap, PresheafMap]], N: int) -> AuditReport:
    """Triangulation preserves monos, binary products and pushouts (canonical comparisons are iso).

    A k-simplex of ``TX x TY`` comes from a k-cube of ``X x Y``, so the truncated
    product comparison is only meaningful up to the cube level; products are
    compared at simplicial level ``min(N, K)``.
    """
    from .presheaf import map_to_json, presheaf_to_json

    def T(X):
        return triangulate(X, N)

    def Tm(f):
        return triangulate_map(f, N)

    a = AuditReport("T preserves monos", params={"maps": len(monos), "N": N})
    t0 = time.perf_counter()
    for i, m in enumerate(monos):
        if not is_mono(m):
            raise ValueError(f"input {i} is not a monomorphism")
        if not is_mono(Tm(m)):
            a.fail(f"T(mono {i}) is not mono", {"corpus_index": i, "map": map_to_json(m)})
    a.timing = time.perf_counter() - t0

    Np = min([N] + [max(X.base.rank) for X, _ in pairs])
    b = AuditReport("T preserves binary products", params={"pairs": len(pairs), "N": Np})
    t0 = time.perf_counter()
    for i, (X, Y) in enumerate(pairs):
        XY, (p1, p2) = product(X, Y)
        TXY, _ = product(triangulate(X, Np), triangulate(Y, Np))
        comp = induced_into_limit(TXY, [triangulate_map(p1, Np), triangulate_map(p2, Np)], triangulate(XY, Np))
        if not is_iso(comp):
            b.fail(f"pair {i}: T(XxY) -> TX x TY is not iso", {"corpus_index": i, "left": presheaf_to_json(X), "right": presheaf_to_json(Y)})
    b.timing = time.perf_counter() - t0

    c = AuditReport("T preserves pushouts", params={"spans": len(spans), "N": N})
    t0 = time.perf_counter()
    for i, (f, g) in enumerate(spans):
        P, iB, iC = pushout(f, g)
        Q, inj = colimit([T(f.source), T(f.target), T(g.target)], [(0, 1, Tm(f)), (0, 2, Tm(g))])
        comp = induced_from_colimit(Q, inj, [Tm(compose(iB, f)), Tm(iB), Tm(iC)], T(P))
        if not is_iso(comp):
            c.fail(f"span {i}: pushout of T -> T(pushout) is not iso", {"corpus_index": i, "f": map_to_json(f), "g": map_to_json(g)})
    c.timing = time.perf_counter() - t0
    return aggregate("T preservation", [a, b, c], N=N)


def cube_endpoints(C: FinCat) -> tuple[PresheafMap, PresheafMap]:
    """``y([1]^0) -> y([1]^1)`` at 0 and at 1."""
    ms = sorted(C.hom(0, 1), key=lambda m: C.data[m])
    s, t = yoneda(C, 0), yoneda(C, 1)
    return yoneda_map(C, ms[0], s, t), yoneda_map(C, ms[1], s, t)


def hott_generators(monos: Sequence[PresheafMap], C: FinCat | None = None) -> GeneratorSet:
    """Pushout-products of each mono with both endpoint inclusions.

    The product with ``[1]^1`` raises dimension by one, so the codomain of each
    mono must have no nondegenerate cells at the top cube level.
    """
    maps, labels = [], []
    for i, m in enumerate(monos):
        if not is_mono(m):
            raise ValueError(f"input {i} is not a monomorphism")
        base = C or m.source.base
        K = max(base.rank)
        if any(m.target.nondegenerate(c) for c in range(base.num_objects) if base.rank[c] == K):
            raise ValueError(f"input {i} has cells at the top cube level {K}; its product with [1]^1 would be truncated")
        for eps, d in enumerate(cube_endpoints(base)):
            maps.append(pushout_product(d, m))
            labels.append(f"d{eps} # mono{i}")
    return GeneratorSet("hott generators", maps, labels)


def audit_hott_gens_weq(gens: GeneratorSet, N: int, order: Sequence[str] = DEFAULT_CHAIN, search_bound: int = 64) -> AuditReport:
    """Oracle chain on the triangulated generators: WEQ or UNKNOWN, never NOT_WEQ."""
    r = AuditReport("HoTT generators triangulate to weak equivalences", params={"generators": len(gens), "N": N, "oracle": "->".join(order)})
    t0 = time.perf_counter()
    verdicts = []
    for label, g in gens:
        v, chain = oracle_chain(triangulate_map(g, N), order, search_bound)
        verdicts.append(v)
        r.verdicts.append(f"{label}: {' '.join(chain)}")
        if v.value == "NOT_WEQ":
            from .presheaf import map_to_json
            r.fail(f"{label} is falsified", {"generator": label, "map": map_to_json(g)})
    if r.status != FAIL:
        r.status = verdict_status(verdicts)
    r.timing = time.perf_counter() - t0
    return r


class BoxPrimeComparison:
    """Restriction and left Kan extension along the inclusion of the cube
    subcategory generated by faces, degeneracies and connections."""

    def __init__(self, K: int, N: int | None = None):
        self.K = K
        self.N = N if N is not None else K
        self.prime, self.k = build_box_prime_category(K)
        self.box = self.k.target
        self.kan = KanString(self.k)
        self.k_restrict = self.kan.restrict
        self.k_lan = self.kan.lan
        self.T = triangulation_pair(K, self.N)
        self.T_prime = triangulation_pair(K, self.N, prime=True)

    def audit_representables(self, n_max: int | None = None) -> AuditReport:
        n_max = self.K if n_max is None else n_max
        r = AuditReport("k_! of representables", params={"K": self.K, "n_max": n_max})
        t0 = time.perf_counter()
        for n in range(n_max + 1):
            L = self.k_lan(yoneda(self.prime, n))
            Y = yoneda(self.box, n)
            if not (L.same_as(Y) or find_isomorphism(L, Y) is not None):
                r.fail(f"k_!(y'([1]^{n})) is not y([1]^{n})", {"n": n, "sizes": list(L.sizes)})
        r.timing = time.perf_counter() - t0
        return r

    def audit_triangulations(self, corpus: Sequence[Presheaf] = (), n_max: int | None = None) -> AuditReport:
        """``T(k_! X)`` against the triangulation computed directly on the subcategory."""
        n_max = self.K if n_max is None else n_max
        objs = [yoneda(self.prime, n) for n in range(n_max + 1)] + list(corpus)
        r = AuditReport("T k_! = T' on objects", params={"K": self.K, "N": self.N, "objects": len(objs)})
        t0 = time.perf_counter()
        for i, X in enumerate(objs):
            a = self.T.T(self.k_lan(X))
            b = self.T_prime.T(X)
            if not (a.same_as(b) or find_isomorphism(a, b) is not None):
                r.fail(f"object {i}: T k_! X and T' X differ", {"corpus_index": i, "sizes": [list(a.sizes), list(b.sizes)]})
            elif i <= n_max and not b.same_as(nerve_of_cube(i, self.N)) and find_isomorphism(b, nerve_of_cube(i, self.N)) is None:
                r.fail(f"T'(y'([1]^{i})) is not N([1]^{i})", {"n": i})
        r.timing = time.perf_counter() - t0
        return r

    def audit_monos(self, monos: Sequence[PresheafMap]) -> AuditReport:
        r = AuditReport("k_! preserves monos", params={"maps": len(monos)})
        t0 = time.perf_counter()
        for i, m in enumerate(monos):
            if not is_mono(m):
                raise ValueError(f"input {i} is not a monomorphism")
            if not is_mono(self.k_lan.mor(m)):
                from .presheaf import map_to_json
                r.fail(f"k_!(mono {i}) is not mono", {"corpus_index": i, "map": map_to_json(m)})
        r.timing = time.perf_counter() - t0
        return r


def box_prime_comparison(K: int, N: int | None = None) -> BoxPrimeComparison:
    return BoxPrimeComparison(K, N)


def audit_L_side() -> AuditReport:
    return skipped("cubical L preserves monos", "the simplicial-to-cubical left adjoint of T has no finite construction")
