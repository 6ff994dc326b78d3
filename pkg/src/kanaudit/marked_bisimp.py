"""Marked simplicial sets with the string ``flat -| U -| sharp``, and the
bisimplicial string along the zeroth-row inclusion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjstring import AdjointString, ComputableFunctor, NatTrans, PresheafCategory
from .fincat import build_i1, build_simplex_category
from .kan import KanString
from .presheaf import (
    Presheaf, PresheafMap, compose, identity_map, is_iso, is_mono, presheaf_from_json, presheaf_to_json, search_maps,
)

FORMAT_MARKED = "kanaudit.marked/1"


def degenerate_edges(X: Presheaf) -> frozenset[int]:
    return frozenset(int(x) for x in X.table(_degeneracy(X)))


def _degeneracy(X: Presheaf) -> int:
    D = X.base
    return next(m for m in D.hom(1, 0))


@dataclass(eq=False)
class MarkedSSet:
    underlying: Presheaf
    marked: frozenset[int]

    def __post_init__(self) -> None:
        self.marked = frozenset(int(e) for e in self.marked)
        if not degenerate_edges(self.underlying) <= self.marked:
            raise ValueError("every degenerate edge must be marked")
        if any(e < 0 or e >= self.underlying.sizes[1] for e in self.marked):
            raise ValueError("marked edge out of range")

    @property
    def total_cells(self) -> int:
        return self.underlying.total_cells

    def same_as(self, other: "MarkedSSet") -> bool:
        return self.marked == other.marked and self.underlying.same_as(other.underlying)


@dataclass(eq=False)
class MarkedMap:
    source: MarkedSSet
    target: MarkedSSet
    underlying: PresheafMap

    def __post_init__(self) -> None:
        comp = self.underlying.components[1]
        if any(int(comp[e]) not in self.target.marked for e in self.source.marked):
            raise ValueError("map does not preserve the marking")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MarkedMap):
            return NotImplemented
        return self.underlying == other.underlying and self.source.marked == other.source.marked and self.target.marked == other.target.marked

    __hash__ = None


def forget_marking(M: MarkedSSet) -> Presheaf:
    return M.underlying


def flat(X: Presheaf) -> MarkedSSet:
    return MarkedSSet(X, degenerate_edges(X))


def sharp(X: Presheaf) -> MarkedSSet:
    return MarkedSSet(X, frozenset(range(X.sizes[1])))


def marked_hom_set(M: MarkedSSet, M2: MarkedSSet, limit: int | None = None) -> list[MarkedMap]:
    out = []
    marked = np.zeros(M2.underlying.sizes[1], dtype=bool)
    marked[list(M2.marked)] = True
    for comps in search_maps(M.underlying, M2.underlying):
        if all(marked[comps[1][e]] for e in M.marked):
            out.append(MarkedMap(M, M2, PresheafMap(M.underlying, M2.underlying, comps)))
            if limit is not None and len(out) >= limit:
                break
    return out


def marked_product(M: MarkedSSet, M2: MarkedSSet):
    from .presheaf import product

    P, (p1, p2) = product(M.underlying, M2.underlying)
    marks = frozenset(k for k, (a, b) in enumerate(P.tuples[1]) if a in M.marked and b in M2.marked)
    PM = MarkedSSet(P, marks)
    return PM, (MarkedMap(PM, M, p1), MarkedMap(PM, M2, p2))


def marked_pushout(f: MarkedMap, g: MarkedMap):
    from .presheaf import pushout

    P, iB, iC = pushout(f.underlying, g.underlying)
    marks = frozenset(int(iB.components[1][e]) for e in f.target.marked) | frozenset(int(iC.components[1][e]) for e in g.target.marked)
    PM = MarkedSSet(P, marks)
    return PM, MarkedMap(f.target, PM, iB), MarkedMap(g.target, PM, iC)


class MarkedCategory:
    def __init__(self, N: int):
        self.N = N
        self.base = build_simplex_category(N)
        self.name = f"sSet+<={N}"

    def hom_set(self, M, M2, limit=None):
        return marked_hom_set(M, M2, limit)

    def identity(self, M):
        return MarkedMap(M, M, identity_map(M.underlying))

    def compose(self, g, f):
        return MarkedMap(f.source, g.target, compose(g.underlying, f.underlying))

    def equal(self, f, g):
        return f == g

    def is_iso(self, f):
        if not is_iso(f.underlying):
            return False
        return {int(f.underlying.components[1][e]) for e in f.source.marked} == set(f.target.marked)

    def is_mono(self, f):
        return is_mono(f.underlying)

    def source(self, f):
        return f.source

    def target(self, f):
        return f.target

    def describe(self, M):
        return marked_to_json(M)

    def describe_map(self, f):
        return {"source": marked_to_json(f.source), "target": marked_to_json(f.target), "components": [list(map(int, c)) for c in f.underlying.components]}

    def size(self, M):
        return M.total_cells


def marked_to_json(M: MarkedSSet) -> dict:
    return {"format": FORMAT_MARKED, "simplicial": presheaf_to_json(M.underlying), "marked": sorted(M.marked)}


def marked_from_json(obj: dict) -> MarkedSSet:
    if obj.get("format") != FORMAT_MARKED:
        raise ValueError(f"unsupported format {obj.get('format')!r}")
    return MarkedSSet(presheaf_from_json(obj["simplicial"]), frozenset(obj["marked"]))


def build_marked_string(N: int) -> AdjointString:
    """``F = U`` (forget), ``L`` = minimal marking, ``R`` = maximal marking."""
    if N < 1:
        raise ValueError("marked simplicial sets need level N >= 1")
    Mk = MarkedCategory(N)
    S = PresheafCategory(build_simplex_category(N))
    U = ComputableFunctor("U", Mk, S, forget_marking, lambda f: f.underlying)
    flat_f = ComputableFunctor("flat", S, Mk, flat, None)
    sharp_f = ComputableFunctor("sharp", S, Mk, sharp, None)
    flat_f._mor_fn = lambda f: MarkedMap(flat_f(f.source), flat_f(f.target), f)
    sharp_f._mor_fn = lambda f: MarkedMap(sharp_f(f.source), sharp_f(f.target), f)
    # U flat = Id and U sharp = Id on the nose, so both unit-side maps are identities
    eta = NatTrans("eta(flat|U)", None, None, lambda A: identity_map(A))
    eps = NatTrans("eps(flat|U)", None, None, lambda M: MarkedMap(flat_f(M.underlying), M, identity_map(M.underlying)))
    eta_r = NatTrans("eta'(U|sharp)", None, None, lambda M: MarkedMap(M, sharp_f(M.underlying), identity_map(M.underlying)))
    eps_r = NatTrans("eps'(U|sharp)", None, None, lambda A: identity_map(A))
    return AdjointString(f"marked(N={N})", F=U, L=flat_f, R=sharp_f, eta=eta, eps=eps, eta_r=eta_r, eps_r=eps_r)


def build_bisimplicial_string(N: int) -> AdjointString:
    """Zeroth row ``i_1^*`` with its Kan extensions along ``[n] |-> ([n],[0])``."""
    if N < 1:
        raise ValueError("bisimplicial string needs level N >= 1")
    s = KanString(build_i1(N)).adjoint_string()
    s.name = f"bisimplicial(N={N})"
    return s
