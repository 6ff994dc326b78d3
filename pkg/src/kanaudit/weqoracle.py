"""Weak-equivalence verdicts for maps of finite simplicial sets.

A truncated simplicial set is read as its skeleton: no nondegenerate cells
above the truncation level. Homology is computed on normalized chains with
an integer Smith normal form; a map is falsified when it is not a homology
isomorphism in the degrees the truncation leaves intact. Positive verdicts come only from an isomorphism or an
explicit homotopy-equivalence witness, which is re-verified before use.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fincat import FinCat
from .lifting import cylinder
from .presheaf import Presheaf, PresheafMap, compose, identity_map, is_iso, search_maps
from .report import Verdict

Matrix = list[list[int]]


# -- Smith normal form ---------------------------------------------------------------

def smith_diagonal(M: Matrix) -> list[int]:
    """Nonzero invariant factors of an integer matrix, each dividing the next.

    Pivots on the entry of least absolute value; Python integers throughout."""
    A = [list(map(int, row)) for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    diag = []
    t = 0
    while t < rows and t < cols:
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = A[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if A[i][t]:
                    q = A[i][t] // p
                    if q:
                        ri, rt = A[i], A[t]
                        for j in range(t, cols):
                            ri[j] -= q * rt[j]
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, cols):
                if A[t][j]:
                    q = A[t][j] // p
                    if q:
                        for i in range(t, rows):
                            A[i][j] -= q * A[i][t]
                    if A[t][j]:
                        dirty = True
            if not dirty:
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % p), None)
                if bad is None:
                    break
                # fold the offending row in so the pivot must shrink
                i = bad[0]
                for j in range(t, cols):
                    A[t][j] += A[i][j]
                dirty = True
            # move the smallest entry of row/column t to the pivot
            cand = [(abs(A[i][t]), i, t) for i in range(t, rows) if A[i][t]] + [(abs(A[t][j]), t, j) for j in range(t, cols) if A[t][j]]
            _, i, j = min(cand)
            A[t], A[i] = A[i], A[t]
            for row in A:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def matrix_rank(M: Matrix) -> int:
    return len(smith_diagonal(M))


# -- chain complexes -------------------------------------------------------------

def is_simplicial(base: FinCat) -> bool:
    return (getattr(base, "builder", None) or {}).get("kind") == "simplex"


def _faces(D: FinCat, n: int) -> list[int]:
    out = []
    for i in range(n + 1):
        table = tuple(j if j < i else j + 1 for j in range(n))
        out.append(next(m for m in D.hom(n - 1, n) if D.data[m] == table))
    return out


@dataclass
class ChainComplexZ:
    """Normalized chains: ``basis[n]`` lists nondegenerate cells at level n,
    ``d[n]`` is the matrix of ``C_n -> C_{n-1}`` (rows index ``C_{n-1}``)."""

    basis: list[list[int]]
    d: list[Matrix]

    @property
    def ranks(self) -> list[int]:
        return [len(b) for b in self.basis]

    def boundary_squares_vanish(self) -> bool:
        for n in range(2, len(self.d)):
            A, B = self.d[n - 1], self.d[n]
            for row in A:
                for j in range(len(self.basis[n])):
                    if sum(a * B[k][j] for k, a in enumerate(row) if a):
                        return False
        return True


def chain_complex(X: Presheaf) -> ChainComplexZ:
    D = X.base
    if not is_simplicial(D):
        raise ValueError("homology needs a simplicial base")
    N = D.num_objects - 1
    basis = [X.nondegenerate(n) for n in range(N + 1)]
    pos = [{x: i for i, x in enumerate(b)} for b in basis]
    d: list[Matrix] = [[] for _ in range(N + 1)]
    for n in range(1, N + 1):
        M = [[0] * len(basis[n]) for _ in range(len(basis[n - 1]))]
        for i, face in enumerate(_faces(D, n)):
            sign = -1 if i % 2 else 1
            for col, x in enumerate(basis[n]):
                y = X.act(face, x)
                r = pos[n - 1].get(y)
                if r is not None:
                    M[r][col] += sign
        d[n] = M
    return ChainComplexZ(basis, d)


def chain_map(f: PresheafMap, CX: ChainComplexZ, CY: ChainComplexZ) -> list[Matrix]:
    out = []
    for n in range(len(CX.basis)):
        pos = {y: i for i, y in enumerate(CY.basis[n])}
        M = [[0] * len(CX.basis[n]) for _ in range(len(CY.basis[n]))]
        for col, x in enumerate(CX.basis[n]):
            r = pos.get(int(f.components[n][x]))
            if r is not None:
                M[r][col] = 1
        out.append(M)
    return out


@dataclass
class HomologySummary:
    betti: list[int]
    torsion: list[list[int]]
    ranks: list[int] = field(default_factory=list)

    def euler_from_cells(self) -> int:
        return sum((-1) ** k * r for k, r in enumerate(self.ranks))

    def euler_from_homology(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))

    def is_point(self) -> bool:
        return self.betti[:1] == [1] and not any(self.betti[1:]) and not any(self.torsion)

    def is_zero(self) -> bool:
        return not any(self.betti) and not any(self.torsion)

    def to_dict(self) -> dict:
        return {"betti": self.betti, "torsion": self.torsion, "ranks": self.ranks}


def _homology_from(ranks: list[int], mats: list[Matrix]) -> HomologySummary:
    """``mats[n]`` is ``C_n -> C_{n-1}`` for n >= 1 (``mats[0]`` unused)."""
    top = len(ranks)
    diags = [[] for _ in range(top + 1)]
    for n in range(1, top):
        if ranks[n] and ranks[n - 1]:
            diags[n] = smith_diagonal(mats[n])
    betti, torsion = [], []
    for n in range(top):
        rk_out = len(diags[n]) if n >= 1 else 0
        rk_in = len(diags[n + 1]) if n + 1 < top else 0
        betti.append(ranks[n] - rk_out - rk_in)
        torsion.append([t for t in (diags[n + 1] if n + 1 < top else []) if t > 1])
    return HomologySummary(betti, torsion, list(ranks))


def homology(X: Presheaf) -> HomologySummary:
    C = chain_complex(X)
    return _homology_from(C.ranks, C.d)


def cone_homology(f: PresheafMap) -> HomologySummary:
    """Homology of the mapping cone ``C_{n-1}(X) + C_n(Y)`` with
    ``d(a, b) = (-d a, f a + d b)``."""
    CX, CY = chain_complex(f.source), chain_complex(f.target)
    F = chain_map(f, CX, CY)
    N = len(CX.basis) - 1
    rx = CX.ranks + [0]
    ry = CY.ranks + [0]
    ranks = [(rx[n - 1] if n >= 1 else 0) + ry[n] for n in range(N + 2)]
    mats: list[Matrix] = [[]]
    for n in range(1, N + 2):
        rows = (rx[n - 2] if n >= 2 else 0) + ry[n - 1]
        cols = rx[n - 1] + ry[n]
        M = [[0] * cols for _ in range(rows)]
        ox = rx[n - 2] if n >= 2 else 0
        if n >= 2:
            for i, row in enumerate(CX.d[n - 1]):
                for j, v in enumerate(row):
                    M[i][j] = -v
        for i, row in enumerate(F[n - 1]):
            for j, v in enumerate(row):
                M[ox + i][j] = v
        if n <= N:
            for i, row in enumerate(CY.d[n]):
                for j, v in enumerate(row):
                    M[ox + i][rx[n - 1] + j] = v
        mats.append(M)
    return _homology_from(ranks, mats)


# -- oracles ----------------------------------------------------------------------

def iso_oracle(f: PresheafMap) -> Verdict:
    return Verdict.WEQ if is_iso(f) else Verdict.UNKNOWN


def homology_falsifier(f: PresheafMap) -> Verdict:
    """NOT_WEQ when ``f`` fails to be a homology isomorphism below the
    truncation level ``N``.

    Top-degree homology of a truncated object is not trusted: the missing
    higher cells would kill some of its cycles. The cone is read in degrees
    below ``N``; its vanishing there makes ``f`` onto in degree ``N - 1``,
    where it is then an isomorphism exactly when the groups agree."""
    if not is_simplicial(f.source.base):
        return Verdict.UNKNOWN
    N = f.source.base.num_objects - 1
    cone = cone_homology(f)
    if any(cone.betti[k] or cone.torsion[k] for k in range(N)):
        return Verdict.NOT_WEQ
    if N >= 1:
        hx, hy = homology(f.source), homology(f.target)
        k = N - 1
        if hx.betti[k] != hy.betti[k] or sorted(hx.torsion[k]) != sorted(hy.torsion[k]):
            return Verdict.NOT_WEQ
    return Verdict.UNKNOWN


@dataclass
class HomotopyWitness:
    """``g: Y -> X`` with elementary homotopies ``gf ~ id`` and ``fg ~ id``.

    Each homotopy is ``(H, forward)``: ``H: Z x I -> Z`` starts at the
    composite and ends at the identity when ``forward``, the reverse otherwise;
    None means the composite is already the identity."""

    f: PresheafMap
    g: PresheafMap
    left: tuple[PresheafMap, bool] | None
    right: tuple[PresheafMap, bool] | None


def _homotopy(a: PresheafMap, b: PresheafMap) -> PresheafMap | None:
    """Some ``H: Z x I -> W`` with ``H . end_0 = a`` and ``H . end_1 = b``."""
    Z, W = a.source, a.target
    ZI, (e0, e1), _ = cylinder(Z)
    fixed = {}
    for e, h in ((e0, a), (e1, b)):
        for c in range(Z.base.num_objects):
            for x in range(Z.sizes[c]):
                key = (c, int(e.components[c][x]))
                v = int(h.components[c][x])
                if fixed.setdefault(key, v) != v:
                    return None
    for comps in search_maps(ZI, W, fixed=fixed, limit=1):
        return PresheafMap(ZI, W, comps)
    return None


def _connect(comp: PresheafMap, ident: PresheafMap) -> tuple[PresheafMap, bool] | None | bool:
    if comp == ident:
        return None
    H = _homotopy(comp, ident)
    if H is not None:
        return (H, True)
    H = _homotopy(ident, comp)
    if H is not None:
        return (H, False)
    return False


def _candidates(f: PresheafMap, bound: int):
    X, Y = f.source, f.target
    seen = set()
    fc = f.components

    def sections():
        return search_maps(Y, X, allowed=lambda c, y: fc[c] == y)

    def retractions():
        fixed = {}
        for c in range(X.base.num_objects):
            for x, y in enumerate(fc[c]):
                if fixed.setdefault((c, int(y)), x) != x:
                    return iter(())
        return search_maps(Y, X, fixed=fixed)

    for source in (sections(), retractions(), search_maps(Y, X)):
        for comps in source:
            g = PresheafMap(Y, X, comps)
            k = g.key()
            if k in seen:
                continue
            seen.add(k)
            yield g
            if len(seen) >= bound:
                return


def homotopy_witness(f: PresheafMap, search_bound: int = 64) -> tuple[Verdict, HomotopyWitness | None]:
    """Search candidate inverses (sections, then retractions, then all maps)
    for elementary homotopies on both sides. WEQ only with a verified witness."""
    X, Y = f.source, f.target
    idX, idY = identity_map(X), identity_map(Y)
    for g in _candidates(f, search_bound):
        left = _connect(compose(g, f), idX)
        if left is False:
            continue
        right = _connect(compose(f, g), idY)
        if right is False:
            continue
        w = HomotopyWitness(f, g, left, right)
        if verify_witness(w):
            return Verdict.WEQ, w
    return Verdict.UNKNOWN, None


def verify_witness(w: HomotopyWitness) -> bool:
    """Independent re-check: naturality of every map and the end conditions."""
    f, g = w.f, w.g
    if not (f.is_natural() and g.is_natural()):
        return False
    for comp, ident, h in ((compose(g, f), identity_map(f.source), w.left), (compose(f, g), identity_map(f.target), w.right)):
        if h is None:
            if comp != ident:
                return False
            continue
        H, forward = h
        if not H.is_natural():
            return False
        Z = comp.source
        ZI, (e0, e1), _ = cylinder(Z)
        if not ZI.same_as(H.source):
            return False
        H = PresheafMap(ZI, H.target, H.components)
        a, b = (comp, ident) if forward else (ident, comp)
        if compose(H, e0) != a or compose(H, e1) != b:
            return False
    return True


DEFAULT_CHAIN = ("iso", "homotopy", "homology")


def oracle_chain(f: PresheafMap, order: Sequence[str] = DEFAULT_CHAIN, search_bound: int = 64) -> tuple[Verdict, list[str]]:
    """Run oracles in order until one is conclusive; returns the verdict and the chain."""
    chain = []
    for name in order:
        if name == "iso":
            v = iso_oracle(f)
        elif name == "homotopy":
            v, _ = homotopy_witness(f, search_bound)
        elif name == "homology":
            v = homology_falsifier(f)
        else:
            raise ValueError(f"unknown oracle {name!r}")
        chain.append(f"{name}:{v.value}")
        if v != Verdict.UNKNOWN:
            return v, chain
    return Verdict.UNKNOWN, chain


ORACLES: dict[str, tuple[str, ...]] = {
    "iso": ("iso",),
    "homology": ("iso", "homology"),
    "homotopy-search": ("iso", "homotopy"),
    "chain": DEFAULT_CHAIN,
}


def make_oracle(name: str, search_bound: int = 64):
    from .adjstring import WeqOracle

    if name not in ORACLES:
        raise ValueError(f"unknown oracle {name!r}; choose from {sorted(ORACLES)}")
    order = ORACLES[name]
    return WeqOracle(name, lambda f: oracle_chain(f, order, search_bound)[0])
