"""Restriction, left/right Kan extension, and the realization/nerve engine.

A *shape* is a covariant functor ``D: C -> PSh(E)``. Every presheaf ``X``
over ``C`` then has a realization ``X (x) D`` over ``E`` (a coend) and
every presheaf ``Y`` over ``E`` has a nerve ``c |-> hom(D c, Y)``. The two
are adjoint. Left Kan extension along ``f`` is the realization for the
shape ``c |-> y(f c)``; right Kan extension is the nerve for
``d |-> f^* y(d)``; triangulation is the realization for ``[1]^n |-> N([1]^n)``.

The realization is computed on a generating set of cells: every cell is
written as ``v^* g`` for a generator ``g``, and two presentations of one
cell glue the corresponding copies of ``D``. This is the coend quotient,
without iterating over every morphism of ``C``.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .adjstring import AdjointString, ComputableFunctor, NatTrans, PresheafCategory
from .fincat import FinCat, FunctorData
from .presheaf import Presheaf, PresheafMap, search_maps, yoneda, yoneda_map


class Shape:
    """Covariant functor from ``source`` into presheaves over ``target``."""

    def __init__(self, source: FinCat, target: FinCat, obj_fn: Callable[[int], Presheaf], mor_fn: Callable[[int, Presheaf, Presheaf], PresheafMap], name: str = "D"):
        self.source = source
        self.target = target
        self._obj_fn = obj_fn
        self._mor_fn = mor_fn
        self._objs: dict[int, Presheaf] = {}
        self._mors: dict[int, PresheafMap] = {}
        self.name = name

    def obj(self, c: int) -> Presheaf:
        P = self._objs.get(c)
        if P is None:
            P = self._obj_fn(c)
            self._objs[c] = P
        return P

    def mor(self, u: int) -> PresheafMap:
        m = self._mors.get(u)
        if m is None:
            m = self._mor_fn(u, self.obj(self.source.dom[u]), self.obj(self.source.cod[u]))
            self._mors[u] = m
        return m


def representable_shape(f: FunctorData) -> Shape:
    """``c |-> y(f c)`` over the target of ``f``."""
    J = f.target
    reps: dict[int, Presheaf] = {}

    def rep(d: int) -> Presheaf:
        if d not in reps:
            reps[d] = yoneda(J, d)
        return reps[d]

    return Shape(
        f.source, J,
        lambda c: rep(f.object_map[c]),
        lambda u, s, t: yoneda_map(J, f.morphism_map[u], s, t),
        name=f"y.{f.name}",
    )


def restricted_representable_shape(f: FunctorData) -> Shape:
    """``d |-> f^* y(d)`` over the source of ``f``."""
    J = f.target
    return Shape(
        J, f.source,
        lambda d: restrict(f, yoneda(J, d)),
        lambda w, s, t: restrict_map(f, yoneda_map(J, w), s, t),
        name=f"{f.name}^*.y",
    )


# -- restriction ------------------------------------------------------------

def restrict(f: FunctorData, X: Presheaf) -> Presheaf:
    if X.base != f.target:
        raise ValueError("presheaf is not over the functor's target")
    om, mm = f.object_map, f.morphism_map
    return Presheaf(
        f.source,
        [X.sizes[om[c]] for c in range(f.source.num_objects)],
        action=lambda u: X.table(mm[u]),
        cell_action=lambda u, x: X.act(mm[u], x),
        name=f"{f.name}^*{X.name}",
    )


def restrict_map(f: FunctorData, g: PresheafMap, source: Presheaf | None = None, target: Presheaf | None = None) -> PresheafMap:
    source = source or restrict(f, g.source)
    target = target or restrict(f, g.target)
    return PresheafMap(source, target, [g.components[f.object_map[c]] for c in range(f.source.num_objects)])


# -- realization ------------------------------------------------------------

class Realization:
    """``X (x) D`` with the bookkeeping needed for maps, units and counits."""

    def __init__(self, X: Presheaf, shape: Shape):
        if X.base != shape.source:
            raise ValueError("presheaf is not over the shape's source")
        self.X = X
        self.shape = shape
        E = shape.target
        self.gens = X.generating_cells()
        self.gen_index = {g: i for i, g in enumerate(self.gens)}
        self.presentations: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for gi, (c, x) in enumerate(self.gens):
            for v, d, y in X.orbit(c, x):
                self.presentations.setdefault((d, y), []).append((gi, v))
        gen_shapes = [shape.obj(c) for c, _ in self.gens]
        self.offsets: list[np.ndarray] = []
        self.node_class: list[np.ndarray] = []
        self.rep_node: list[np.ndarray] = []
        sizes = []
        for e in range(E.num_objects):
            counts = np.array([P.sizes[e] for P in gen_shapes], dtype=np.int64)
            off = np.concatenate([[0], np.cumsum(counts)])
            total = int(off[-1])
            rows, cols = [], []
            for (d, _), pres in self.presentations.items():
                if len(pres) < 2:
                    continue
                g0, v0 = pres[0]
                c0 = off[g0] + shape.mor(v0).components[e]
                for gk, vk in pres[1:]:
                    rows.append(c0)
                    cols.append(off[gk] + shape.mor(vk).components[e])
            labels = _components(total, rows, cols)
            self.offsets.append(off)
            self.node_class.append(labels)
            n = int(labels.max()) + 1 if total else 0
            rep = np.full(n, total, dtype=np.int64)
            np.minimum.at(rep, labels, np.arange(total))
            self.rep_node.append(rep)
            sizes.append(n)
        self._gen_shapes = gen_shapes
        tables = {}
        for w in range(E.num_morphisms):
            a, b = E.dom[w], E.cod[w]
            out = np.empty(sizes[b], dtype=np.int64)
            for k, node in enumerate(self.rep_node[b]):
                gi, tau = self.locate(b, int(node))
                out[k] = self.node_class[a][self.offsets[a][gi] + gen_shapes[gi].act(w, tau)]
            tables[w] = out
        self.presheaf = Presheaf(E, sizes, tables, name=f"|{X.name}|")

    def locate(self, e: int, node: int) -> tuple[int, int]:
        off = self.offsets[e]
        gi = int(np.searchsorted(off, node, side="right")) - 1
        return gi, node - int(off[gi])

    def representative(self, e: int, k: int) -> tuple[int, int]:
        """(generator index, shape cell) of the least node in class ``k``."""
        return self.locate(e, int(self.rep_node[e][k]))

    def inject(self, c: int, x: int, e: int, tau: int) -> int:
        gi, v = self.presentations[(c, x)][0]
        t = int(self.shape.mor(v).components[e][tau])
        return int(self.node_class[e][self.offsets[e][gi] + t])

    def injection(self, c: int, x: int) -> PresheafMap:
        """The coprojection ``D(c) -> |X|`` of the cell ``x``."""
        gi, v = self.presentations[(c, x)][0]
        D = self.shape.mor(v)
        comps = [self.node_class[e][self.offsets[e][gi] + D.components[e]] for e in range(self.shape.target.num_objects)]
        return PresheafMap(self.shape.obj(c), self.presheaf, comps)


def _components(total: int, rows: list, cols: list) -> np.ndarray:
    """Connected-component labels, numbered by least member."""
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.zeros(0, dtype=np.int64)
    graph = coo_matrix((np.ones(len(r), dtype=np.int32), (r, c)), shape=(total, total))
    n, labels = connected_components(graph, directed=False)
    first = np.full(n, total, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(total))
    rank = np.empty(n, dtype=np.int64)
    rank[np.argsort(first)] = np.arange(n)
    return rank[labels]


def realization_map(RX: Realization, RY: Realization, g: PresheafMap) -> PresheafMap:
    """``|g|: |X| -> |Y|`` sending ``[gen, tau]`` to ``iota_{g(gen)}(tau)``."""
    E = RX.shape.target
    comps = []
    for e in range(E.num_objects):
        out = np.empty(RX.presheaf.sizes[e], dtype=np.int64)
        for k in range(len(out)):
            gi, tau = RX.representative(e, k)
            c, x = RX.gens[gi]
            out[k] = RY.inject(c, g(c, x), e, tau)
        comps.append(out)
    return PresheafMap(RX.presheaf, RY.presheaf, comps)


# -- nerve ------------------------------------------------------------------

class Nerve:
    """``c |-> hom(D c, Y)`` with maps enumerated exhaustively."""

    def __init__(self, Y: Presheaf, shape: Shape):
        if Y.base != shape.target:
            raise ValueError("presheaf is not over the shape's target")
        self.Y = Y
        self.shape = shape
        C = shape.source
        self.maps: list[list[list[np.ndarray]]] = []
        self.index: list[dict[tuple[bytes, ...], int]] = []
        for c in range(C.num_objects):
            ms = list(search_maps(shape.obj(c), Y))
            self.maps.append(ms)
            self.index.append({_key(m): i for i, m in enumerate(ms)})
        tables = {}
        for u in range(C.num_morphisms):
            a, b = C.dom[u], C.cod[u]
            Du = shape.mor(u).components
            idx = self.index[a]
            tables[u] = np.fromiter((idx[_key([phi[e][Du[e]] for e in range(len(Du))])] for phi in self.maps[b]), dtype=np.int64, count=len(self.maps[b]))
        self.presheaf = Presheaf(C, [len(m) for m in self.maps], tables, name=f"N({Y.name})")

    def lookup(self, c: int, comps) -> int:
        return self.index[c][_key(comps)]

    def cell_map(self, c: int, i: int) -> PresheafMap:
        return PresheafMap(self.shape.obj(c), self.Y, self.maps[c][i])


def _key(comps) -> tuple[bytes, ...]:
    return tuple(np.asarray(a, dtype=np.int64).tobytes() for a in comps)


def nerve_map(NY: Nerve, NZ: Nerve, g: PresheafMap) -> PresheafMap:
    C = NY.shape.source
    comps = []
    for c in range(C.num_objects):
        comps.append([NZ.lookup(c, [g.components[e][phi[e]] for e in range(len(phi))]) for phi in NY.maps[c]])
    return PresheafMap(NY.presheaf, NZ.presheaf, comps)


# -- functors ---------------------------------------------------------------

class _Memo:
    """Per-object cache keyed by identity (objects are kept alive)."""

    def __init__(self, build: Callable):
        self.build = build
        self.store: dict[int, tuple[object, object]] = {}

    def __call__(self, X):
        hit = self.store.get(id(X))
        if hit is None:
            hit = (X, self.build(X))
            self.store[id(X)] = hit
        return hit[1]


class ShapeAdjunction:
    """Realization ``|-|`` left adjoint to nerve ``N`` for one shape."""

    def __init__(self, shape: Shape, left_name: str = "realize", right_name: str = "nerve"):
        self.shape = shape
        self.realize_data = _Memo(lambda X: Realization(X, shape))
        self.nerve_data = _Memo(lambda Y: Nerve(Y, shape))
        src = PresheafCategory(shape.source)
        tgt = PresheafCategory(shape.target)
        self.left = ComputableFunctor(
            left_name, src, tgt,
            lambda X: self.realize_data(X).presheaf,
            lambda g: realization_map(self.realize_data(g.source), self.realize_data(g.target), g),
        )
        self.right = ComputableFunctor(
            right_name, tgt, src,
            lambda Y: self.nerve_data(Y).presheaf,
            lambda g: nerve_map(self.nerve_data(g.source), self.nerve_data(g.target), g),
        )
        self.unit = NatTrans(f"unit({left_name}|{right_name})", None, None, self._unit)
        self.counit = NatTrans(f"counit({left_name}|{right_name})", None, None, self._counit)

    def _unit(self, X: Presheaf) -> PresheafMap:
        R = self.realize_data(X)
        NR = self.nerve_data(R.presheaf)
        E = self.shape.target
        comps = []
        for c in range(X.base.num_objects):
            comps.append([NR.lookup(c, R.injection(c, x).components) for x in range(X.sizes[c])])
        return PresheafMap(X, NR.presheaf, comps)

    def _counit(self, Y: Presheaf) -> PresheafMap:
        NY = self.nerve_data(Y)
        R = self.realize_data(NY.presheaf)
        comps = []
        for e in range(Y.base.num_objects):
            out = np.empty(R.presheaf.sizes[e], dtype=np.int64)
            for k in range(len(out)):
                gi, tau = R.representative(e, k)
                c, i = R.gens[gi]
                out[k] = NY.maps[c][i][e][tau]
            comps.append(out)
        return PresheafMap(R.presheaf, Y, comps)


class KanString:
    """``lan_f -| f^* -| ran_f`` for a functor ``f: I -> J``.

    As an adjoint string: ``F = f^*`` from presheaves on ``J`` to
    presheaves on ``I``, ``L = lan``, ``R = ran``.
    """

    def __init__(self, f: FunctorData):
        self.f = f
        I, J = f.source, f.target
        self.lan_adj = ShapeAdjunction(representable_shape(f), "lan", "nerve_lan")
        self.ran_adj = ShapeAdjunction(restricted_representable_shape(f), "restrict_ran", "ran")
        self.restrict_memo = _Memo(lambda X: restrict(f, X))
        pI, pJ = PresheafCategory(I), PresheafCategory(J)
        self.restrict = ComputableFunctor(
            f"{f.name}^*", pJ, pI,
            self.restrict_memo,
            lambda g: restrict_map(f, g, self.restrict_memo(g.source), self.restrict_memo(g.target)),
        )
        self.lan = self.lan_adj.left
        self.lan.name = f"lan_{f.name}"
        self.ran = self.ran_adj.right
        self.ran.name = f"ran_{f.name}"
        self.unit = NatTrans("eta(lan|restrict)", None, None, self._lan_unit)
        self.counit = NatTrans("eps(lan|restrict)", None, None, self._lan_counit)
        self.unit_r = NatTrans("eta'(restrict|ran)", None, None, self._ran_unit)
        self.counit_r = NatTrans("eps'(restrict|ran)", None, None, self._ran_counit)

    def lan_data(self, A: Presheaf) -> Realization:
        return self.lan_adj.realize_data(A)

    def ran_data(self, A: Presheaf) -> Nerve:
        return self.ran_adj.nerve_data(A)

    def _lan_unit(self, A: Presheaf) -> PresheafMap:
        f, J = self.f, self.f.target
        R = self.lan_data(A)
        FLA = self.restrict(R.presheaf)
        comps = []
        for c in range(A.base.num_objects):
            fc = f.object_map[c]
            ident = J.hom(fc, fc).index(J.identity[fc])
            comps.append([R.inject(c, x, fc, ident) for x in range(A.sizes[c])])
        return PresheafMap(A, FLA, comps)

    def _lan_counit(self, X: Presheaf) -> PresheafMap:
        f, J = self.f, self.f.target
        FX = self.restrict(X)
        R = self.lan_data(FX)
        comps = []
        for e in range(J.num_objects):
            out = np.empty(R.presheaf.sizes[e], dtype=np.int64)
            for k in range(len(out)):
                gi, tau = R.representative(e, k)
                c, x = R.gens[gi]
                out[k] = X.act(J.hom(e, f.object_map[c])[tau], x)
            comps.append(out)
        return PresheafMap(R.presheaf, X, comps)

    def _ran_unit(self, X: Presheaf) -> PresheafMap:
        f, J = self.f, self.f.target
        FX = self.restrict(X)
        NF = self.ran_data(FX)
        comps = []
        for d in range(J.num_objects):
            row = []
            for x in range(X.sizes[d]):
                # u |-> u^* x on f^* y(d)
                phi = [[X.act(u, x) for u in J.hom(f.object_map[c], d)] for c in range(f.source.num_objects)]
                row.append(NF.lookup(d, phi))
            comps.append(row)
        return PresheafMap(X, NF.presheaf, comps)

    def _ran_counit(self, A: Presheaf) -> PresheafMap:
        f, J = self.f, self.f.target
        NA = self.ran_data(A)
        FRA = self.restrict(NA.presheaf)
        comps = []
        for c in range(f.source.num_objects):
            fc = f.object_map[c]
            ident = J.hom(fc, fc).index(J.identity[fc])
            comps.append([int(phi[c][ident]) for phi in NA.maps[fc]])
        return PresheafMap(FRA, A, comps)

    def adjoint_string(self) -> AdjointString:
        return AdjointString(
            f"Kan({self.f.name})",
            F=self.restrict, L=self.lan, R=self.ran,
            eta=self.unit, eps=self.counit, eta_r=self.unit_r, eps_r=self.counit_r,
        )


def build_kan_string(f: FunctorData) -> KanString:
    return KanString(f)


def lan(f: FunctorData, X: Presheaf) -> tuple[Presheaf, PresheafMap]:
    """Left Kan extension with its unit ``X -> f^* lan X``."""
    K = KanString(f)
    return K.lan(X), K.unit(X)


def ran(f: FunctorData, X: Presheaf) -> tuple[Presheaf, PresheafMap]:
    """Right Kan extension with its counit ``f^* ran X -> X``."""
    K = KanString(f)
    return K.ran(X), K.counit_r(X)


# -- comma-category oracle ----------------------------------------------------

def lan_by_comma(f: FunctorData, X: Presheaf) -> Presheaf:
    """Left Kan extension as a colimit over every comma category ``(d | f)``.

    Independent of the generator-based engine: at each ``d`` the elements
    ``(c, x, u: d -> f c)`` are glued along every morphism ``g`` of the
    source category, ``(x, f(g) u) ~ (g^* x, u)``.
    """
    I, J = f.source, f.target
    sizes, classes, nodes_at = [], [], []
    for d in range(J.num_objects):
        nodes = [(c, x, u) for c in range(I.num_objects) for x in range(X.sizes[c]) for u in J.hom(d, f.object_map[c])]
        pos = {n: i for i, n in enumerate(nodes)}
        rows, cols = [], []
        for g in range(I.num_morphisms):
            a, b = I.dom[g], I.cod[g]
            for x in range(X.sizes[b]):
                for u in J.hom(d, f.object_map[a]):
                    rows.append(pos[(b, x, J.compose(f.morphism_map[g], u))])
                    cols.append(pos[(a, X.act(g, x), u)])
        labels = _components(len(nodes), [np.asarray(rows, dtype=np.int64)], [np.asarray(cols, dtype=np.int64)])
        sizes.append(int(labels.max()) + 1 if len(nodes) else 0)
        classes.append(labels)
        nodes_at.append(pos)
    tables = {}
    for w in range(J.num_morphisms):
        a, b = J.dom[w], J.cod[w]
        out = np.empty(sizes[b], dtype=np.int64)
        seen = np.zeros(sizes[b], dtype=bool)
        for (c, x, u), i in nodes_at[b].items():
            k = classes[b][i]
            if not seen[k]:
                out[k] = classes[a][nodes_at[a][(c, x, J.compose(u, w))]]
                seen[k] = True
        tables[w] = out
    return Presheaf(J, sizes, tables, name=f"lan_{f.name}({X.name})")


def coend_naive(X: Presheaf, shape: Shape) -> Presheaf:
    """``X (x) D`` glued along every morphism of the source category.

    Oracle for ``Realization``: elements ``(c, x, tau)`` with
    ``(b, x, D(u) tau) ~ (a, u^* x, tau)`` for every ``u: a -> b``."""
    C, E = shape.source, shape.target
    sizes, classes, offsets = [], [], []
    for e in range(E.num_objects):
        off, acc = [], 0
        for c in range(C.num_objects):
            off.append(acc)
            acc += X.sizes[c] * shape.obj(c).sizes[e]
        rows, cols = [], []
        for u in range(C.num_morphisms):
            a, b = C.dom[u], C.cod[u]
            na = shape.obj(a).sizes[e]
            nb = shape.obj(b).sizes[e]
            Du = shape.mor(u).components[e]
            tu = X.table(u)
            for x in range(X.sizes[b]):
                rows.append(off[b] + x * nb + Du)
                cols.append(off[a] + int(tu[x]) * na + np.arange(na))
        labels = _components(acc, rows, cols)
        sizes.append(int(labels.max()) + 1 if acc else 0)
        classes.append(labels)
        offsets.append(off)
    tables = {}
    for w in range(E.num_morphisms):
        a, b = E.dom[w], E.cod[w]
        out = np.empty(sizes[b], dtype=np.int64)
        for c in range(C.num_objects):
            P = shape.obj(c)
            n_b, n_a = P.sizes[b], P.sizes[a]
            for x in range(X.sizes[c]):
                for tau in range(n_b):
                    k = classes[b][offsets[b][c] + x * n_b + tau]
                    out[k] = classes[a][offsets[a][c] + x * n_a + P.act(w, tau)]
        tables[w] = out
    return Presheaf(E, sizes, tables, name=f"coend({X.name})")
