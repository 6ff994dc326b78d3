"""Lifting problems, generating monos, fibrancy up to truncation, and the
fold-map cylinder."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .fincat import FinCat, build_simplex_category
from .presheaf import (
    Presheaf, PresheafMap, boundary, colimit, compose, coproduct, identity_map, induced_from_colimit,
    induced_into_limit, is_mono, naive_hom_set, product, product_map, search_maps, subpresheaf, terminal_presheaf, yoneda,
)
from .report import FAIL, AuditReport


@dataclass
class LiftingProblem:
    """Square ``p . top = bottom . i`` with ``i: A -> B`` and ``p: X -> Y``."""

    i: PresheafMap
    p: PresheafMap
    top: PresheafMap
    bottom: PresheafMap

    def commutes(self) -> bool:
        return compose(self.p, self.top) == compose(self.bottom, self.i)


@dataclass
class GeneratorSet:
    name: str
    maps: list[PresheafMap]
    labels: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        for f, label in zip(self.maps, self.labels or [""] * len(self.maps)):
            if not is_mono(f):
                raise ValueError(f"generator {label} is not a monomorphism")

    def __len__(self) -> int:
        return len(self.maps)

    def __iter__(self):
        return iter(zip(self.labels, self.maps))


def _lift_constraints(problem: LiftingProblem):
    i, p, top, bottom = problem.i, problem.p, problem.top, problem.bottom
    B, X = i.target, p.source
    fixed = {}
    for c in range(B.base.num_objects):
        for a, b in enumerate(i.components[c]):
            v = int(top.components[c][a])
            if fixed.setdefault((c, int(b)), v) != v:
                return None, None
    pc = p.components

    def allowed(c: int, b: int) -> np.ndarray:
        return pc[c] == bottom.components[c][b]

    return fixed, allowed


def has_lift(problem: LiftingProblem) -> PresheafMap | None:
    """A diagonal ``B -> X`` making both triangles commute, or None after
    exhausting the search over cells of ``B``."""
    if not problem.commutes():
        raise ValueError("lifting square does not commute")
    fixed, allowed = _lift_constraints(problem)
    if fixed is None:
        return None
    for comps in search_maps(problem.i.target, problem.p.source, fixed=fixed, allowed=allowed, limit=1):
        return PresheafMap(problem.i.target, problem.p.source, comps)
    return None


def naive_lifts(problem: LiftingProblem) -> list[PresheafMap]:
    """Every diagonal, by filtering all maps ``B -> X``. Oracle for tiny instances."""
    return [
        h for h in naive_hom_set(problem.i.target, problem.p.source)
        if compose(h, problem.i) == problem.top and compose(problem.p, h) == problem.bottom
    ]


def lifting_squares(i: PresheafMap, p: PresheafMap, limit: int | None = None) -> Iterator[LiftingProblem]:
    """All commuting squares from ``i`` to ``p``."""
    A, B = i.source, i.target
    X, Y = p.source, p.target
    n = 0
    for bcomps in search_maps(B, Y):
        bottom = PresheafMap(B, Y, bcomps)
        bi = compose(bottom, i)
        # the top is a map A -> X over bottom . i
        for tcomps in search_maps(A, X, allowed=lambda c, a, bi=bi: p.components[c] == bi.components[c][a]):
            yield LiftingProblem(i, p, PresheafMap(A, X, tcomps), bottom)
            n += 1
            if limit is not None and n >= limit:
                return


def unfilled_squares(i: PresheafMap, p: PresheafMap) -> Iterator[LiftingProblem]:
    for sq in lifting_squares(i, p):
        if has_lift(sq) is None:
            yield sq


def has_rlp(p: PresheafMap, gens: GeneratorSet) -> bool:
    return rlp_failure(p, gens) is None


def rlp_failure(p: PresheafMap, gens: GeneratorSet) -> tuple[str, LiftingProblem] | None:
    for label, i in gens:
        for sq in unfilled_squares(i, p):
            return label, sq
    return None


# -- pushout-product ----------------------------------------------------------

def pushout_product(i: PresheafMap, j: PresheafMap) -> PresheafMap:
    """Corner map ``(A x L) +_{A x K} (B x K) -> B x L`` for ``i: A -> B``, ``j: K -> L``."""
    A, B, K, L = i.source, i.target, j.source, j.target
    AK, _ = product(A, K)
    AL, _ = product(A, L)
    BK, _ = product(B, K)
    BL, _ = product(B, L)
    idA, idB, idK, idL = (identity_map(Z) for Z in (A, B, K, L))
    a_j = product_map(idA, j, AK, AL)
    i_k = product_map(i, idK, AK, BK)
    P, inj = colimit([AK, AL, BK], [(0, 1, a_j), (0, 2, i_k)])
    legs = [compose(product_map(i, idL, AL, BL), a_j), product_map(i, idL, AL, BL), product_map(idB, j, BK, BL)]
    return induced_from_colimit(P, inj, legs, BL)


# -- generators -----------------------------------------------------------------

def _face(D: FinCat, n: int, i: int) -> int:
    table = tuple(j if j < i else j + 1 for j in range(n))
    for m in D.hom(n - 1, n):
        if D.data[m] == table:
            return m
    raise KeyError((n, i))


def gen_boundaries(N: int, base: FinCat | None = None) -> GeneratorSet:
    """``boundary(n) -> y(n)`` for every object of rank at most ``N``."""
    D = base or build_simplex_category(N)
    maps, labels = [], []
    for n in range(D.num_objects):
        if D.rank[n] <= N:
            _, inc = boundary(D, n)
            maps.append(inc)
            labels.append(f"d{D.objects[n]}->{D.objects[n]}")
    return GeneratorSet(f"boundaries<={N}", maps, labels)


def horn(D: FinCat, n: int, k: int) -> tuple[Presheaf, PresheafMap]:
    """The horn missing the face opposite vertex ``k``, inside ``y([n])``."""
    Y = yoneda(D, n)
    faces = [(n - 1, D.hom(n - 1, n).index(_face(D, n, i))) for i in range(n + 1) if i != k]
    S, inc = subpresheaf(Y, faces)
    S.name = f"L{k}[{n}]"
    return S, inc


def gen_horns(N: int, inner_only: bool = False, base: FinCat | None = None) -> GeneratorSet:
    D = base or build_simplex_category(N)
    maps, labels = [], []
    for n in range(1, N + 1):
        for k in range(n + 1):
            if inner_only and not 0 < k < n:
                continue
            maps.append(horn(D, n, k)[1])
            labels.append(f"L{k}[{n}]")
    return GeneratorSet(f"{'inner ' if inner_only else ''}horns<={N}", maps, labels)


def detect_fibrancy(X: Presheaf, gens: GeneratorSet, level: int | None = None, label: str = "fibrant") -> AuditReport:
    """Extension of every map from each generator's domain into ``X``.

    The verdict is only ever "up to level N", and N never exceeds the
    truncation of ``X``."""
    N = min(level, max(X.base.rank)) if level is not None else max(X.base.rank)
    r = AuditReport(f"{label} up to level {N}", params={"generators": gens.name, "level": N})
    bang = PresheafMap(X, terminal_presheaf(X.base), [np.zeros(n, dtype=np.int64) for n in X.sizes])
    for name, i in gens:
        if i.target.dimension() > N:
            continue
        for sq in unfilled_squares(i, bang):
            r.fail(f"no extension along {name}", {"generator": name, "map": [list(map(int, c)) for c in sq.top.components]})
            break
    r.details.append(f"{label} up to level {N}: {r.status != FAIL}")
    return r


# -- fold cylinder ----------------------------------------------------------------

def endpoints(base: FinCat) -> tuple[int, int]:
    """The two morphisms from the rank-0 object to the rank-1 object, sorted by table."""
    zero = base.rank.index(0)
    one = base.rank.index(1)
    ms = sorted(base.hom(zero, one), key=lambda m: base.data[m])
    if len(ms) != 2:
        raise ValueError("base has no interval with two endpoints")
    return ms[0], ms[1]


def interval(base: FinCat) -> Presheaf:
    return yoneda(base, base.rank.index(1))


def constant_map(X: Presheaf, Y: Presheaf, c0: int, y: int) -> PresheafMap:
    """``X -> 1 -> Y`` through the rank-0 cell ``y`` of ``Y``."""
    comps = []
    B = X.base
    for c in range(B.num_objects):
        u = B.hom(c, c0)
        if len(u) != 1:
            raise ValueError("rank-0 object is not terminal")
        comps.append(np.full(X.sizes[c], Y.act(u[0], y), dtype=np.int64))
    return PresheafMap(X, Y, comps)


@dataclass
class Cylinder:
    X: Presheaf
    I: Presheaf
    XI: Presheaf
    XX: Presheaf
    j: PresheafMap
    p: PresheafMap
    fold: PresheafMap
    ends: tuple[PresheafMap, PresheafMap]


def cylinder(X: Presheaf, I: Presheaf | None = None) -> tuple[Presheaf, tuple[PresheafMap, PresheafMap], PresheafMap]:
    """``X x I`` with the two end inclusions and the projection to ``X``."""
    B = X.base
    I = I or interval(B)
    XI, (px, pi) = product(X, I)
    c0 = B.rank.index(0)
    e0, e1 = endpoints(B)
    one = B.rank.index(1)
    idX = identity_map(X)
    ends = tuple(
        induced_into_limit(XI, [idX, constant_map(X, I, c0, B.hom(c0, one).index(e))], X) for e in (e0, e1)
    )
    return XI, ends, px


def fold_cylinder(X: Presheaf) -> Cylinder:
    """``j: X + X -> X x I`` from the two ends and ``p: X x I -> X``."""
    XI, ends, p = cylinder(X)
    XX, inj = coproduct(X, X, base=X.base)
    j = induced_from_colimit(XX, inj, list(ends), XI)
    idX = identity_map(X)
    fold = induced_from_colimit(XX, inj, [idX, idX], X)
    return Cylinder(X, interval(X.base), XI, XX, j, p, fold, ends)


def cylinder_contraction(cyl: Cylinder) -> tuple[PresheafMap, PresheafMap]:
    """Explicit witness that ``p`` is a homotopy equivalence: the section
    ``x |-> (x, 0)`` and ``H((x, t), u) = (x, min(t, u))`` from ``s p`` to the identity."""
    X, XI, I = cyl.X, cyl.XI, cyl.I
    B = X.base
    s = cyl.ends[0]
    XII, ends2, pxi = cylinder(XI, I)
    one = B.rank.index(1)
    tmin = []
    for c in range(B.num_objects):
        homs = B.hom(c, one)
        pos = {B.data[m]: k for k, m in enumerate(homs)}
        tmin.append((homs, pos))
    comps = []
    for c in range(B.num_objects):
        homs, pos = tmin[c]
        out = []
        for (xt, u) in XII.tuples[c]:
            x, t = XI.tuples[c][xt]
            m = tuple(min(a, b) for a, b in zip(B.data[homs[t]], B.data[homs[u]]))
            out.append(_tuple_index(XI, c, (x, pos[m])))
        comps.append(out)
    H = PresheafMap(XII, XI, comps)
    return s, H


def _tuple_index(P: Presheaf, c: int, t: tuple) -> int:
    idx = P.__dict__.setdefault("_tuple_index", {})
    if c not in idx:
        idx[c] = {e: n for n, e in enumerate(P.tuples[c])}
    return idx[c][t]


# -- bounded small object argument -------------------------------------------------

@dataclass
class SoaResult:
    left: PresheafMap
    right: PresheafMap
    rounds: int
    residual: list[tuple[str, LiftingProblem]]
    attached: list[int]


def bounded_soa_factor(f: PresheafMap, gens: GeneratorSet, max_rounds: int, max_squares: int = 2000) -> SoaResult:
    """Attach a cell for every unfilled square, up to ``max_rounds`` times.

    Returns ``f = right . left`` and the squares still unfilled at the end;
    an empty residual means ``right`` lifts against ``gens`` at this truncation."""
    X, Y = f.source, f.target
    left = identity_map(X)
    right = f
    attached = []
    rounds = 0
    for _ in range(max_rounds):
        squares = _unfilled(right, gens, max_squares)
        if not squares:
            break
        Z = right.source
        objects = [Z]
        arrows = []
        for _, sq in squares:
            a = len(objects)
            objects += [sq.i.source, sq.i.target]
            arrows += [(a, 0, sq.top), (a, a + 1, sq.i)]
        P, inj = colimit(objects, arrows)
        legs = [right]
        for _, sq in squares:
            legs += [compose(right, sq.top), sq.bottom]
        right = induced_from_colimit(P, inj, legs, Y)
        left = compose(inj[0], left)
        attached.append(len(squares))
        rounds += 1
    residual = _unfilled(right, gens, max_squares)
    return SoaResult(left, right, rounds, residual, attached)


def _unfilled(p: PresheafMap, gens: GeneratorSet, cap: int) -> list[tuple[str, LiftingProblem]]:
    out = []
    for label, i in gens:
        for sq in unfilled_squares(i, p):
            out.append((label, sq))
            if len(out) > cap:
                raise RuntimeError(f"more than {cap} unfilled squares; lower the truncation or corpus size")
    return out
