"""Finite presheaves over a FinCat, natural maps, and pointwise (co)limits.

Cells are ``(object, index)`` pairs, degenerate cells included. The action of
a morphism ``u: a -> b`` is a table ``X(b) -> X(a)`` stored as an integer
array. Representables compute their action lazily, so they stay cheap even
over large truncated cube categories.
"""
from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .fincat import FinCat, category_from_builder, fincat_from_json, fincat_to_json

FORMAT_PRESHEAF = "kanaudit.presheaf/1"
FORMAT_MAP = "kanaudit.presheaf-map/1"

Cell = tuple[int, int]


class NaturalityError(ValueError):
    pass


def _arr(values: Iterable[int]) -> np.ndarray:
    a = np.fromiter(values, dtype=np.int64)
    a.setflags(write=False)
    return a


class Presheaf:
    """Contravariant functor from ``base`` to finite sets."""

    def __init__(
        self,
        base: FinCat,
        sizes: Sequence[int],
        tables: dict[int, np.ndarray] | None = None,
        *,
        action: Callable[[int], np.ndarray] | None = None,
        cell_action: Callable[[int, int], int] | None = None,
        generators: Sequence[Cell] | None = None,
        name: str = "",
    ):
        if len(sizes) != base.num_objects:
            raise ValueError("one cell count per base object is required")
        self.base = base
        self.sizes = tuple(int(s) for s in sizes)
        self._tables: dict[int, np.ndarray] = {}
        if tables is not None:
            for u, t in tables.items():
                t = np.asarray(t, dtype=np.int64)
                t.setflags(write=False)
                self._tables[u] = t
        self._action = action
        self._cell_action = cell_action
        self._gen_hint = list(generators) if generators is not None else None
        self._orbits: dict[Cell, list[tuple[int, int, int]]] = {}
        self._generators: list[Cell] | None = None
        self.name = name

    def __repr__(self) -> str:
        label = f"{self.name} " if self.name else ""
        return f"Presheaf({label}over {self.base.name}, sizes={self.sizes})"

    @property
    def total_cells(self) -> int:
        return sum(self.sizes)

    def table(self, u: int) -> np.ndarray:
        t = self._tables.get(u)
        if t is None:
            if self._action is None:
                raise KeyError(f"no action table for morphism {u}")
            t = np.asarray(self._action(u), dtype=np.int64)
            t.setflags(write=False)
            self._tables[u] = t
        return t

    def act(self, u: int, x: int) -> int:
        t = self._tables.get(u)
        if t is not None:
            return int(t[x])
        if self._cell_action is not None:
            return self._cell_action(u, x)
        return int(self.table(u)[x])

    def cells(self) -> Iterator[Cell]:
        for c, n in enumerate(self.sizes):
            for x in range(n):
                yield (c, x)

    def orbit(self, c: int, x: int) -> list[tuple[int, int, int]]:
        """All ``(v, d, v^* x)`` for morphisms ``v: d -> c``."""
        key = (c, x)
        o = self._orbits.get(key)
        if o is None:
            B = self.base
            o = [(v, B.dom[v], self.act(v, x)) for v in B.morphisms_into(c)]
            self._orbits[key] = o
        return o

    def generating_cells(self, covered: set[Cell] | None = None) -> list[Cell]:
        """A set of cells whose orbits cover every cell not in ``covered``.

        Greedy, highest rank first. Uses the construction's hint when there
        is one and nothing is pre-covered.
        """
        if covered is None and self._generators is not None:
            return self._generators
        if covered is None and self._gen_hint is not None:
            self._generators = list(self._gen_hint)
            return self._generators
        seen: set[Cell] = set(covered) if covered else set()
        gens: list[Cell] = []
        order = sorted(range(self.base.num_objects), key=lambda c: -self.base.rank[c])
        for c in order:
            for x in range(self.sizes[c]):
                if (c, x) in seen:
                    continue
                gens.append((c, x))
                for _, d, y in self.orbit(c, x):
                    seen.add((d, y))
        if covered is None:
            self._generators = gens
        return gens

    def validate(self) -> list[str]:
        """Table scan of the presheaf laws."""
        B = self.base
        errors = []
        for u in range(B.num_morphisms):
            t = self.table(u)
            if len(t) != self.sizes[B.cod[u]]:
                errors.append(f"table of {B.describe(u)} has length {len(t)}")
                continue
            if len(t) and (t.min() < 0 or t.max() >= self.sizes[B.dom[u]]):
                errors.append(f"table of {B.describe(u)} leaves the cell set")
        if errors:
            return errors
        for c, i in enumerate(B.identity):
            if not np.array_equal(self.table(i), np.arange(self.sizes[c])):
                errors.append(f"identity acts nontrivially at {B.objects[c]}")
        for f in range(B.num_morphisms):
            tf = self.table(f)
            for g in B.morphisms_from(B.cod[f]):
                # (g o f)^* = f^* o g^*
                if not np.array_equal(self.table(B.compose(g, f)), tf[self.table(g)]):
                    errors.append(f"contravariance fails at ({B.describe(g)}) o ({B.describe(f)})")
        return errors

    def same_as(self, other: "Presheaf") -> bool:
        if self is other:
            return True
        if self.base != other.base or self.sizes != other.sizes:
            return False
        return all(np.array_equal(self.table(u), other.table(u)) for u in range(self.base.num_morphisms))

    # -- degeneracy ---------------------------------------------------------
    def nondegenerate(self, c: int) -> list[int]:
        """Cells at ``c`` not obtained from a lower-rank object along a split epi."""
        return [x for x in range(self.sizes[c]) if x not in self._degenerate_set(c)]

    def _degenerate_set(self, c: int) -> set[int]:
        B = self.base
        out: set[int] = set()
        for u in _lowering_split_epis(B, c):
            out.update(int(v) for v in self.table(u))
        return out

    def dimension(self) -> int:
        dims = [self.base.rank[c] for c in range(self.base.num_objects) if self.nondegenerate(c)]
        return max(dims) if dims else -1


def _lowering_split_epis(B: FinCat, c: int) -> list[int]:
    cache = B.__dict__.setdefault("_split_epi_cache", {})
    if c not in cache:
        cache[c] = [u for u in B.morphisms_from(c) if B.rank[B.cod[u]] < B.rank[c] and B.is_split_epi(u)]
    return cache[c]


class PresheafMap:
    """Natural transformation between presheaves over one base."""

    def __init__(self, source: Presheaf, target: Presheaf, components: Sequence[Sequence[int]]):
        if source.base != target.base:
            raise ValueError("maps must stay over one base category")
        self.source = source
        self.target = target
        comps = []
        for c, comp in enumerate(components):
            a = np.asarray(comp, dtype=np.int64).reshape(-1)
            if len(a) != source.sizes[c]:
                raise ValueError(f"component at {source.base.objects[c]} has length {len(a)}, expected {source.sizes[c]}")
            a.setflags(write=False)
            comps.append(a)
        self.components = tuple(comps)

    def __repr__(self) -> str:
        return f"PresheafMap({self.source!r} -> {self.target!r})"

    def __call__(self, c: int, x: int) -> int:
        return int(self.components[c][x])

    def key(self) -> tuple[bytes, ...]:
        return tuple(a.tobytes() for a in self.components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PresheafMap):
            return NotImplemented
        return (
            all(np.array_equal(a, b) for a, b in zip(self.components, other.components))
            and self.source.same_as(other.source)
            and self.target.same_as(other.target)
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def __matmul__(self, other: "PresheafMap") -> "PresheafMap":
        return compose(self, other)

    def naturality_failures(self, morphisms: Iterable[int] | None = None, limit: int = 5) -> list[str]:
        B = self.source.base
        bad = []
        for u in morphisms if morphisms is not None else range(B.num_morphisms):
            a, b = B.dom[u], B.cod[u]
            lhs = self.components[a][self.source.table(u)]
            rhs = self.target.table(u)[self.components[b]]
            if not np.array_equal(lhs, rhs):
                x = int(np.flatnonzero(lhs != rhs)[0])
                bad.append(f"naturality fails for {B.describe(u)} at cell {x} of {B.objects[b]}")
                if len(bad) >= limit:
                    break
        return bad

    def is_natural(self) -> bool:
        return not self.naturality_failures(limit=1)


def compose(g: PresheafMap, f: PresheafMap) -> PresheafMap:
    if not (f.target is g.source or f.target.same_as(g.source)):
        raise ValueError("maps are not composable")
    return PresheafMap(f.source, g.target, [gc[fc] for gc, fc in zip(g.components, f.components)])


def identity_map(X: Presheaf) -> PresheafMap:
    return PresheafMap(X, X, [np.arange(n) for n in X.sizes])


def is_mono(f: PresheafMap) -> bool:
    return all(len(np.unique(c)) == len(c) for c in f.components)


def is_epi(f: PresheafMap) -> bool:
    return all(len(np.unique(c)) == n for c, n in zip(f.components, f.target.sizes))


def is_iso(f: PresheafMap) -> bool:
    return f.source.sizes == f.target.sizes and is_mono(f)


def inverse(f: PresheafMap) -> PresheafMap:
    if not is_iso(f):
        raise ValueError("map is not an isomorphism")
    comps = []
    for c in f.components:
        inv = np.empty_like(c)
        inv[c] = np.arange(len(c))
        comps.append(inv)
    return PresheafMap(f.target, f.source, comps)


# -- basic objects ------------------------------------------------------------

def empty_presheaf(base: FinCat) -> Presheaf:
    return Presheaf(base, [0] * base.num_objects, {u: np.zeros(0, dtype=np.int64) for u in range(base.num_morphisms)}, generators=[], name="0")


def terminal_presheaf(base: FinCat) -> Presheaf:
    one = np.zeros(1, dtype=np.int64)
    return Presheaf(base, [1] * base.num_objects, {u: one for u in range(base.num_morphisms)}, name="1")


def yoneda(C: FinCat, c: int) -> Presheaf:
    """Representable presheaf ``hom(-, c)``; cell ``i`` at ``d`` is ``C.hom(d, c)[i]``."""
    homs = [C.hom(d, c) for d in range(C.num_objects)]
    pos = [{m: i for i, m in enumerate(h)} for h in homs]

    def cell_action(u: int, x: int) -> int:
        return pos[C.dom[u]][C.compose(homs[C.cod[u]][x], u)]

    def action(u: int) -> np.ndarray:
        src = homs[C.cod[u]]
        p = pos[C.dom[u]]
        return _arr(p[C.compose(m, u)] for m in src)

    ident = pos[c][C.identity[c]]
    return Presheaf(C, [len(h) for h in homs], action=action, cell_action=cell_action, generators=[(c, ident)], name=f"y({C.objects[c]})")


def yoneda_cell(C: FinCat, c: int, m: int) -> int:
    """Index of morphism ``m: d -> c`` as a cell of ``yoneda(C, c)``."""
    return C.hom(C.dom[m], c).index(m)


def yoneda_map(C: FinCat, u: int, source: Presheaf | None = None, target: Presheaf | None = None) -> PresheafMap:
    """Postcomposition ``y(a) -> y(b)`` for ``u: a -> b``."""
    a, b = C.dom[u], C.cod[u]
    source = source or yoneda(C, a)
    target = target or yoneda(C, b)
    comps = []
    for d in range(C.num_objects):
        pos = {m: i for i, m in enumerate(C.hom(d, b))}
        comps.append([pos[C.compose(u, m)] for m in C.hom(d, a)])
    return PresheafMap(source, target, comps)


def element_map(X: Presheaf, c: int, x: int, source: Presheaf | None = None) -> PresheafMap:
    """The map ``y(c) -> X`` classifying the cell ``x`` (Yoneda)."""
    C = X.base
    source = source or yoneda(C, c)
    return PresheafMap(source, X, [[X.act(m, x) for m in C.hom(d, c)] for d in range(C.num_objects)])


def _full_tables(base: FinCat, sizes: Sequence[int], rule: Callable[[int], np.ndarray]) -> dict[int, np.ndarray]:
    return {u: rule(u) for u in range(base.num_morphisms)}


def subpresheaf(X: Presheaf, cells: dict[int, Iterable[int]] | Iterable[Cell], *, generate: bool = True) -> tuple[Presheaf, PresheafMap]:
    """Sub-presheaf of ``X`` on the given cells (closed under the action when
    ``generate``), with its inclusion. Cells keep their relative order."""
    keep: list[set[int]] = [set() for _ in X.sizes]
    items = cells.items() if isinstance(cells, dict) else None
    if items is not None:
        for c, xs in items:
            keep[c].update(int(x) for x in xs)
    else:
        for c, x in cells:
            keep[c].add(int(x))
    gens = [(c, x) for c in range(len(keep)) for x in sorted(keep[c])]
    if generate:
        for c, x in gens:
            for _, d, y in X.orbit(c, x):
                keep[d].add(y)
    order = [sorted(k) for k in keep]
    pos = [{x: i for i, x in enumerate(o)} for o in order]
    B = X.base
    tables = {}
    for u in range(B.num_morphisms):
        t = X.table(u)
        a, b = B.dom[u], B.cod[u]
        try:
            tables[u] = _arr(pos[a][int(t[x])] for x in order[b])
        except KeyError:
            raise ValueError("cell set is not closed under the action") from None
    S = Presheaf(B, [len(o) for o in order], tables, name=f"sub({X.name})")
    return S, PresheafMap(S, X, order)


def image(f: PresheafMap) -> tuple[Presheaf, PresheafMap]:
    return subpresheaf(f.target, {c: set(int(v) for v in comp) for c, comp in enumerate(f.components)}, generate=False)


def boundary(C: FinCat, c: int) -> tuple[Presheaf, PresheafMap]:
    """Sub-presheaf of ``y(c)`` of morphisms factoring through a lower-rank object."""
    Y = yoneda(C, c)
    low = set()
    for w in C.morphisms_into(c):
        e = C.dom[w]
        if C.rank[e] < C.rank[c]:
            for v in C.morphisms_into(e):
                low.add(C.compose(w, v))
    cells = {d: [i for i, m in enumerate(C.hom(d, c)) if m in low] for d in range(C.num_objects)}
    S, inc = subpresheaf(Y, cells, generate=False)
    S.name = f"d{Y.name}"
    return S, inc


# -- colimits and limits ------------------------------------------------------

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                self.parent[rb] = ra
            else:
                self.parent[ra] = rb


def colimit(objects: Sequence[Presheaf], arrows: Sequence[tuple[int, int, PresheafMap]], base: FinCat | None = None) -> tuple[Presheaf, list[PresheafMap]]:
    """Pointwise colimit: coproduct of cells, then the quotient generated by the arrows.

    Classes are numbered by their least member (objects in diagram order,
    then cell index). Returns the colimit and the injections.
    """
    if not objects and base is None:
        raise ValueError("an empty diagram needs an explicit base")
    B = base if base is not None else objects[0].base
    offsets = []
    for c in range(B.num_objects):
        off, acc = [], 0
        for X in objects:
            off.append(acc)
            acc += X.sizes[c]
        offsets.append((off, acc))
    cls_of: list[np.ndarray] = []
    sizes = []
    for c in range(B.num_objects):
        off, total = offsets[c]
        uf = _UnionFind(total)
        for i, j, f in arrows:
            comp = f.components[c]
            for x in range(len(comp)):
                uf.union(off[i] + x, off[j] + int(comp[x]))
        roots = [uf.find(a) for a in range(total)]
        label: dict[int, int] = {}
        classes = np.empty(total, dtype=np.int64)
        for a, r in enumerate(roots):
            if r not in label:
                label[r] = len(label)
            classes[a] = label[r]
        cls_of.append(classes)
        sizes.append(len(label))
    reps = []
    for c in range(B.num_objects):
        off, total = offsets[c]
        rep = np.full(sizes[c], -1, dtype=np.int64)
        for a in range(total - 1, -1, -1):
            rep[cls_of[c][a]] = a
        reps.append(rep)

    owners = [np.repeat(np.arange(len(objects)), [X.sizes[c] for X in objects]) for c in range(B.num_objects)]

    def locate(c: int, a: int) -> tuple[int, int]:
        i = int(owners[c][a])
        return i, a - offsets[c][0][i]

    tables = {}
    for u in range(B.num_morphisms):
        a, b = B.dom[u], B.cod[u]
        out = []
        for r in reps[b]:
            i, x = locate(b, int(r))
            out.append(cls_of[a][offsets[a][0][i] + objects[i].act(u, x)])
        tables[u] = np.asarray(out, dtype=np.int64)
    L = Presheaf(B, sizes, tables, name="colim")
    injections = [
        PresheafMap(X, L, [cls_of[c][offsets[c][0][i]: offsets[c][0][i] + X.sizes[c]] for c in range(B.num_objects)])
        for i, X in enumerate(objects)
    ]
    return L, injections


def induced_from_colimit(L: Presheaf, injections: Sequence[PresheafMap], cocone: Sequence[PresheafMap], target: Presheaf) -> PresheafMap:
    """The unique map out of a colimit agreeing with a cocone; raises if the
    cocone is not compatible with the quotient."""
    comps = []
    for c in range(L.base.num_objects):
        out = np.full(L.sizes[c], -1, dtype=np.int64)
        for inj, leg in zip(injections, cocone):
            for x, k in enumerate(inj.components[c]):
                v = leg.components[c][x]
                if out[k] == -1:
                    out[k] = v
                elif out[k] != v:
                    raise ValueError("cocone does not factor through the colimit")
        comps.append(out)
    return PresheafMap(L, target, comps)


def limit(objects: Sequence[Presheaf], arrows: Sequence[tuple[int, int, PresheafMap]], base: FinCat | None = None) -> tuple[Presheaf, list[PresheafMap]]:
    """Pointwise limit: compatible tuples in the product, lexicographic order."""
    B = base if base is not None else objects[0].base
    k = len(objects)
    elems: list[list[tuple[int, ...]]] = []
    for c in range(B.num_objects):
        rows = []
        constraints = [[] for _ in range(k)]
        for i, j, f in arrows:
            constraints[max(i, j)].append((i, j, f.components[c]))
        cur = [0] * k

        def rec(pos: int) -> None:
            if pos == k:
                rows.append(tuple(cur))
                return
            for x in range(objects[pos].sizes[c]):
                cur[pos] = x
                if all(int(comp[cur[i]]) == cur[j] for i, j, comp in constraints[pos]):
                    rec(pos + 1)

        rec(0)
        elems.append(rows)
    index = [{e: n for n, e in enumerate(rows)} for rows in elems]
    tables = {}
    for u in range(B.num_morphisms):
        a, b = B.dom[u], B.cod[u]
        tabs = [X.table(u) for X in objects]
        tables[u] = np.asarray([index[a][tuple(int(t[x]) for t, x in zip(tabs, e))] for e in elems[b]], dtype=np.int64)
    L = Presheaf(B, [len(r) for r in elems], tables, name="lim")
    projections = [PresheafMap(L, X, [[e[i] for e in elems[c]] for c in range(B.num_objects)]) for i, X in enumerate(objects)]
    L.tuples = elems
    return L, projections


def induced_into_limit(L: Presheaf, cone: Sequence[PresheafMap], source: Presheaf) -> PresheafMap:
    comps = []
    idx = [{e: n for n, e in enumerate(rows)} for rows in L.tuples]
    for c in range(L.base.num_objects):
        comps.append([idx[c][tuple(int(leg.components[c][x]) for leg in cone)] for x in range(source.sizes[c])])
    return PresheafMap(source, L, comps)


def coproduct(*objs: Presheaf, base: FinCat | None = None) -> tuple[Presheaf, list[PresheafMap]]:
    return colimit(objs, [], base=base)


def product(*objs: Presheaf, base: FinCat | None = None) -> tuple[Presheaf, list[PresheafMap]]:
    return limit(objs, [], base=base)


def pushout(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap, PresheafMap]:
    """Pushout of ``B <-f- A -g-> C``; returns (P, B -> P, C -> P)."""
    if not (f.source is g.source or f.source.same_as(g.source)):
        raise ValueError("span legs need a common source")
    P, inj = colimit([f.source, f.target, g.target], [(0, 1, f), (0, 2, g)])
    return P, inj[1], inj[2]


def pullback(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap, PresheafMap]:
    """Pullback of ``B -f-> D <-g- C``; returns (P, P -> B, P -> C)."""
    P, proj = limit([f.source, g.source, f.target], [(0, 2, f), (1, 2, g)])
    return P, proj[0], proj[1]


def coequalizer(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap]:
    X, Y = f.source, f.target
    # identify f(x) ~ x ~ g(x) through a copy of X
    Q, inj = colimit([X, Y], [(0, 1, f), (0, 1, g)])
    return Q, inj[1]


def equalizer(f: PresheafMap, g: PresheafMap) -> tuple[Presheaf, PresheafMap]:
    X = f.source
    keep = {c: [x for x in range(X.sizes[c]) if f.components[c][x] == g.components[c][x]] for c in range(X.base.num_objects)}
    return subpresheaf(X, keep, generate=False)


def product_map(f: PresheafMap, g: PresheafMap, source: Presheaf | None = None, target: Presheaf | None = None) -> PresheafMap:
    """``f x g`` between (lexicographic) binary products."""
    if source is None:
        source, _ = product(f.source, g.source)
    if target is None:
        target, _ = product(f.target, g.target)
    idx = [{e: n for n, e in enumerate(rows)} for rows in target.tuples]
    comps = [
        [idx[c][(int(f.components[c][a]), int(g.components[c][b]))] for a, b in source.tuples[c]]
        for c in range(source.base.num_objects)
    ]
    return PresheafMap(source, target, comps)


# -- category of elements -----------------------------------------------------

def category_of_elements(X: Presheaf) -> tuple[FinCat, "FunctorData"]:
    """Objects ``(c, x)``; morphisms ``(c,x) -> (c',x')`` are base morphisms
    ``g: c -> c'`` with ``g^* x' = x``. Returns the category and its projection."""
    from .fincat import FunctorData

    B = X.base
    objs = list(X.cells())
    oidx = {o: i for i, o in enumerate(objs)}
    morphisms, data, index = [], [], {}
    for j, (c2, x2) in enumerate(objs):
        for g in B.morphisms_into(c2):
            src = oidx[(B.dom[g], X.act(g, x2))]
            index[(g, j)] = len(morphisms)
            morphisms.append((src, j))
            data.append((g, j))
    identity = [index[(B.identity[c], oidx[(c, x)])] for c, x in objs]
    table = {}
    for f_id, (g, j) in enumerate(data):
        for h_id in range(len(data)):
            h, k = data[h_id]
            if morphisms[h_id][0] == j:
                table[(h_id, f_id)] = index[(B.compose(h, g), k)]
    E = FinCat.explicit(f"el({X.name})", [f"{B.objects[c]}:{x}" for c, x in objs], morphisms, identity, table, data=data, rank=[B.rank[c] for c, _ in objs])
    proj = FunctorData(f"pi_{X.name}", E, B, [c for c, _ in objs], [g for g, _ in data])
    E.elements = objs
    return E, proj


# -- hom enumeration ------------------------------------------------------------

def search_maps(
    X: Presheaf,
    Y: Presheaf,
    *,
    fixed: dict[Cell, int] | None = None,
    allowed: Callable[[int, int], np.ndarray | None] | None = None,
    limit: int | None = None,
    rng: np.random.Generator | None = None,
) -> Iterator[list[np.ndarray]]:
    """Enumerate natural maps ``X -> Y`` as component arrays.

    Backtracks over a generating set of cells of ``X`` (relative to the
    cells in ``fixed``), always branching on the generator with the fewest
    remaining candidates. Assigning a generator propagates along its whole
    orbit; forward checking keeps the other generators' candidate masks
    consistent. ``allowed(c, x)`` may return a boolean mask over ``Y(c)``
    restricting the image of generator ``(c, x)``. With ``rng`` the
    candidates of each branch are tried in random order.
    """
    if X.base != Y.base:
        raise ValueError("presheaves over different bases")
    assign = [np.full(n, -1, dtype=np.int64) for n in X.sizes]
    fixed = fixed or {}
    for (c, x), v in fixed.items():
        if assign[c][x] != -1 and assign[c][x] != v:
            return
        assign[c][x] = v
    gens = X.generating_cells(covered=set(fixed)) if fixed else X.generating_cells()
    ng = len(gens)
    orbits = [X.orbit(c, x) for c, x in gens]
    masks: list[np.ndarray] = []
    watch: dict[Cell, list[tuple[int, int]]] = {}
    for gi, ((c, x), orb) in enumerate(zip(gens, orbits)):
        m = np.ones(Y.sizes[c], dtype=bool)
        if allowed is not None:
            extra = allowed(c, x)
            if extra is not None:
                m &= extra
        first: dict[Cell, int] = {}
        for v, d, y in orb:
            tv = Y.table(v)
            cur = assign[d][y]
            if cur != -1:
                m &= tv == cur
            prev = first.get((d, y))
            if prev is None:
                first[(d, y)] = v
                watch.setdefault((d, y), []).append((gi, v))
            else:
                m &= tv == Y.table(prev)
        masks.append(m)
    if any(not m.any() for m in masks):
        return
    done = [False] * ng
    produced = 0

    def rec(depth: int) -> Iterator[list[np.ndarray]]:
        nonlocal produced
        if depth == ng:
            produced += 1
            yield [a.copy() for a in assign]
            return
        best, best_n = -1, None
        for gi in range(ng):
            if not done[gi]:
                n = int(masks[gi].sum())
                if best_n is None or n < best_n:
                    best, best_n = gi, n
                    if n <= 1:
                        break
        gi = best
        done[gi] = True
        cands = np.flatnonzero(masks[gi])
        if rng is not None:
            cands = rng.permutation(cands)
        for y in cands:
            trail: list[Cell] = []
            saved: list[tuple[int, np.ndarray]] = []
            ok = True
            for v, d, z in orbits[gi]:
                val = Y.table(v)[y]
                cur = assign[d][z]
                if cur == -1:
                    assign[d][z] = val
                    trail.append((d, z))
                elif cur != val:
                    ok = False
                    break
            if ok:
                for d, z in trail:
                    val = assign[d][z]
                    for g2, v2 in watch.get((d, z), ()):
                        if not done[g2]:
                            saved.append((g2, masks[g2]))
                            masks[g2] = masks[g2] & (Y.table(v2) == val)
                            if not masks[g2].any():
                                ok = False
                                break
                    if not ok:
                        break
            if ok:
                yield from rec(depth + 1)
            for g2, m in reversed(saved):
                masks[g2] = m
            for d, z in trail:
                assign[d][z] = -1
            if limit is not None and produced >= limit:
                break
        done[gi] = False

    yield from rec(0)


def random_map(X: Presheaf, Y: Presheaf, rng: np.random.Generator, **kw) -> PresheafMap | None:
    for comps in search_maps(X, Y, rng=rng, limit=1, **kw):
        return PresheafMap(X, Y, comps)
    return None


def hom_set(X: Presheaf, Y: Presheaf, limit: int | None = None) -> list[PresheafMap]:
    return [PresheafMap(X, Y, comps) for comps in search_maps(X, Y, limit=limit)]


def count_homs(X: Presheaf, Y: Presheaf) -> int:
    return sum(1 for _ in search_maps(X, Y))


def naive_hom_set(X: Presheaf, Y: Presheaf) -> list[PresheafMap]:
    """Oracle for ``hom_set``: try every image for a covering set of cells,
    extend by the action, then filter by naturality. No propagation or
    pruning, so it shares nothing with the search beyond the tables."""
    B = X.base
    cover, seen = [], set()
    order = sorted(range(B.num_objects), key=lambda c: -B.rank[c])
    # nondegenerate cells first; anything still uncovered afterwards joins the cover
    for pool in ([(c, X.nondegenerate(c)) for c in order], [(c, range(X.sizes[c])) for c in order]):
        for c, xs in pool:
            for x in xs:
                if (c, x) not in seen:
                    cover.append((c, x))
                    seen.update((B.dom[v], X.act(v, x)) for v in B.morphisms_into(c))
    out = []
    for values in itertools.product(*(range(Y.sizes[c]) for c, _ in cover)):
        comps = [np.full(n, -1, dtype=np.int64) for n in X.sizes]
        consistent = True
        for (c, x), y in zip(cover, values):
            for v in B.morphisms_into(c):
                d, a, b = B.dom[v], X.act(v, x), Y.act(v, y)
                if comps[d][a] not in (-1, b):
                    consistent = False
                    break
                comps[d][a] = b
            if not consistent:
                break
        if not consistent:
            continue
        f = PresheafMap(X, Y, comps)
        if f.is_natural():
            out.append(f)
    return out


def find_isomorphism(X: Presheaf, Y: Presheaf) -> PresheafMap | None:
    if X.sizes != Y.sizes:
        return None
    for comps in search_maps(X, Y):
        f = PresheafMap(X, Y, comps)
        if is_iso(f):
            return f
    return None


# -- JSON ---------------------------------------------------------------------

def base_ref(B: FinCat) -> dict:
    b = getattr(B, "builder", None)
    return {"builder": b} if b is not None else {"category": fincat_to_json(B)}


def base_from_ref(ref: dict) -> FinCat:
    if "builder" in ref:
        return category_from_builder(ref["builder"])
    return fincat_from_json(ref["category"])


def presheaf_to_json(X: Presheaf) -> dict:
    B = X.base
    return {
        "format": FORMAT_PRESHEAF,
        "name": X.name,
        "base_ref": base_ref(B),
        "cells": {B.objects[c]: list(range(n)) for c, n in enumerate(X.sizes)},
        "action": {str(u): [int(v) for v in X.table(u)] for u in range(B.num_morphisms)},
    }


def presheaf_from_json(obj: dict, base: FinCat | None = None) -> Presheaf:
    if obj.get("format") != FORMAT_PRESHEAF:
        raise ValueError(f"unsupported format {obj.get('format')!r}")
    B = base or base_from_ref(obj["base_ref"])
    sizes = [len(obj["cells"][o]) for o in B.objects]
    tables = {int(u): np.asarray(t, dtype=np.int64) for u, t in obj["action"].items()}
    X = Presheaf(B, sizes, tables, name=obj.get("name", ""))
    problems = X.validate()
    if problems:
        raise ValueError("invalid presheaf: " + "; ".join(problems[:3]))
    return X


def map_to_json(f: PresheafMap) -> dict:
    B = f.source.base
    return {
        "format": FORMAT_MAP,
        "source": presheaf_to_json(f.source),
        "target": presheaf_to_json(f.target),
        "components": {B.objects[c]: [int(v) for v in comp] for c, comp in enumerate(f.components)},
    }


def map_from_json(obj: dict) -> PresheafMap:
    if obj.get("format") != FORMAT_MAP:
        raise ValueError(f"unsupported format {obj.get('format')!r}")
    S = presheaf_from_json(obj["source"])
    T = presheaf_from_json(obj["target"], base=S.base)
    f = PresheafMap(S, T, [obj["components"][o] for o in S.base.objects])
    bad = f.naturality_failures(limit=1)
    if bad:
        raise NaturalityError(bad[0])
    return f
