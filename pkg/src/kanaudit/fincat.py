"""Finite categories with explicit composition, functors between them, and
builders for the index categories: truncated simplex category, the Dedekind
cube category (all monotone maps between Boolean cubes), its wide subcategory
generated by faces/degeneracies/connections, and products.

Morphisms are integer ids. Concrete categories store each morphism as a
function table on the carrier of its domain, and equality is table equality.
"""
from __future__ import annotations

import itertools
from collections import deque
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Sequence

FORMAT_FINCAT = "kanaudit.fincat/1"
FORMAT_FUNCTOR = "kanaudit.functor/1"


class CompositionError(ValueError):
    pass


class FinCat:
    """A finite category.

    ``compose(g, f)`` is ``g o f`` and is defined exactly when
    ``cod(f) == dom(g)``. Composition is either an explicit table or, for
    concrete categories, computed from morphism payloads and memoized.
    """

    def __init__(
        self,
        name: str,
        objects: Sequence[str],
        dom: Sequence[int],
        cod: Sequence[int],
        identity: Sequence[int],
        *,
        data: Sequence[Hashable] | None = None,
        compose_table: dict[tuple[int, int], int] | None = None,
        compose_fn: Callable[[int, int], int] | None = None,
        rank: Sequence[int] | None = None,
        key: Hashable = None,
    ):
        if (compose_table is None) == (compose_fn is None):
            raise ValueError("exactly one of compose_table / compose_fn is required")
        self.name = name
        self.objects = tuple(objects)
        self.dom = tuple(dom)
        self.cod = tuple(cod)
        self.identity = tuple(identity)
        self.data = tuple(data) if data is not None else tuple(range(len(self.dom)))
        self.rank = tuple(rank) if rank is not None else tuple(range(len(self.objects)))
        self.key = key if key is not None else ("explicit", name, id(self))
        self._table = compose_table
        self._fn = compose_fn
        self._cache: dict[tuple[int, int], int] = {}
        self._obj_index = {o: i for i, o in enumerate(self.objects)}
        hom: dict[tuple[int, int], list[int]] = {}
        into: dict[int, list[int]] = {i: [] for i in range(len(self.objects))}
        out: dict[int, list[int]] = {i: [] for i in range(len(self.objects))}
        for m, (a, b) in enumerate(zip(self.dom, self.cod)):
            hom.setdefault((a, b), []).append(m)
            into[b].append(m)
            out[a].append(m)
        self._hom = {k: tuple(v) for k, v in hom.items()}
        self._into = {k: tuple(v) for k, v in into.items()}
        self._out = {k: tuple(v) for k, v in out.items()}
        self._identity_set = frozenset(self.identity)

    # -- basic structure -------------------------------------------------
    def __repr__(self) -> str:
        return f"FinCat({self.name!r}, {len(self.objects)} objects, {len(self.dom)} morphisms)"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FinCat) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    @property
    def num_objects(self) -> int:
        return len(self.objects)

    @property
    def num_morphisms(self) -> int:
        return len(self.dom)

    def object_index(self, label: str | int) -> int:
        if isinstance(label, int):
            if not 0 <= label < len(self.objects):
                raise KeyError(label)
            return label
        return self._obj_index[label]

    def hom(self, a: int, b: int) -> tuple[int, ...]:
        return self._hom.get((a, b), ())

    def morphisms_into(self, b: int) -> tuple[int, ...]:
        return self._into[b]

    def morphisms_from(self, a: int) -> tuple[int, ...]:
        return self._out[a]

    def is_identity(self, m: int) -> bool:
        return m in self._identity_set

    def compose(self, g: int, f: int) -> int:
        if self.cod[f] != self.dom[g]:
            raise CompositionError(f"cannot compose {g} after {f}: cod {self.cod[f]} != dom {self.dom[g]}")
        if self._table is not None:
            return self._table[(g, f)]
        k = (g, f)
        h = self._cache.get(k)
        if h is None:
            h = self._fn(g, f)
            self._cache[k] = h
        return h

    def describe(self, m: int) -> str:
        return f"{self.objects[self.dom[m]]}->{self.objects[self.cod[m]]}:{self.data[m]}"

    # -- derived predicates ----------------------------------------------
    def inverse(self, m: int) -> int | None:
        a, b = self.dom[m], self.cod[m]
        for n in self.hom(b, a):
            if self.compose(n, m) == self.identity[a] and self.compose(m, n) == self.identity[b]:
                return n
        return None

    def is_iso(self, m: int) -> bool:
        return self.inverse(m) is not None

    def is_split_epi(self, m: int) -> bool:
        a, b = self.dom[m], self.cod[m]
        return any(self.compose(m, s) == self.identity[b] for s in self.hom(b, a))

    def check(self, max_triples: int | None = None) -> list[str]:
        """Scan identities and associativity; returns violation messages.

        ``max_triples`` bounds the associativity scan for large categories.
        """
        errors = []
        for a, i in enumerate(self.identity):
            if self.dom[i] != a or self.cod[i] != a:
                errors.append(f"identity of {self.objects[a]} has wrong endpoints")
        for m in range(self.num_morphisms):
            a, b = self.dom[m], self.cod[m]
            if self.compose(m, self.identity[a]) != m or self.compose(self.identity[b], m) != m:
                errors.append(f"identity law fails at {self.describe(m)}")
        seen = 0
        for f in range(self.num_morphisms):
            for g in self.morphisms_from(self.cod[f]):
                gf = self.compose(g, f)
                for h in self.morphisms_from(self.cod[g]):
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                        errors.append(f"associativity fails at ({h},{g},{f})")
                    seen += 1
                    if max_triples is not None and seen >= max_triples:
                        return errors
        return errors

    @classmethod
    def from_tables(
        cls,
        name: str,
        objects: Sequence[str],
        carrier_sizes: Sequence[int],
        morphisms: Iterable[tuple[int, int, tuple[int, ...]]],
        *,
        rank: Sequence[int] | None = None,
        key: Hashable = None,
    ) -> "FinCat":
        """Concrete category whose morphisms are functions between finite carriers."""
        dom, cod, data = [], [], []
        index: dict[tuple[int, int, tuple[int, ...]], int] = {}
        for a, b, t in morphisms:
            k = (a, b, tuple(t))
            if k in index:
                continue
            index[k] = len(dom)
            dom.append(a)
            cod.append(b)
            data.append(k[2])
        identity = []
        for a, n in enumerate(carrier_sizes):
            k = (a, a, tuple(range(n)))
            if k not in index:
                raise ValueError(f"missing identity on {objects[a]}")
            identity.append(index[k])

        def compose(g: int, f: int) -> int:
            gt = data[g]
            return index[(dom[f], cod[g], tuple(gt[i] for i in data[f]))]

        cat = cls(name, objects, dom, cod, identity, data=data, compose_fn=compose, rank=rank, key=key)
        cat.carrier_sizes = tuple(carrier_sizes)
        cat.table_index = index
        return cat

    @classmethod
    def explicit(
        cls,
        name: str,
        objects: Sequence[str],
        morphisms: Sequence[tuple[int, int]],
        identity: Sequence[int],
        compose_table: dict[tuple[int, int], int],
        *,
        data: Sequence[Hashable] | None = None,
        rank: Sequence[int] | None = None,
        key: Hashable = None,
    ) -> "FinCat":
        dom = [a for a, _ in morphisms]
        cod = [b for _, b in morphisms]
        return cls(name, objects, dom, cod, identity, data=data, compose_table=dict(compose_table), rank=rank, key=key)


class FunctorData:
    """A functor between finite categories given by object and morphism maps."""

    def __init__(self, name: str, source: FinCat, target: FinCat, object_map: Sequence[int], morphism_map: Sequence[int], key: Hashable = None):
        self.name = name
        self.source = source
        self.target = target
        self.object_map = tuple(object_map)
        self.morphism_map = tuple(morphism_map)
        self.key = key if key is not None else ("explicit-functor", name, id(self))

    def __repr__(self) -> str:
        return f"FunctorData({self.name!r}: {self.source.name} -> {self.target.name})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FunctorData) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def check(self) -> list[str]:
        S, T = self.source, self.target
        errors = []
        if len(self.object_map) != S.num_objects or len(self.morphism_map) != S.num_morphisms:
            return ["object/morphism map has the wrong length"]
        for m in range(S.num_morphisms):
            fm = self.morphism_map[m]
            if T.dom[fm] != self.object_map[S.dom[m]] or T.cod[fm] != self.object_map[S.cod[m]]:
                errors.append(f"endpoints not preserved at {S.describe(m)}")
        for a, i in enumerate(S.identity):
            if self.morphism_map[i] != T.identity[self.object_map[a]]:
                errors.append(f"identity not preserved at {S.objects[a]}")
        for f in range(S.num_morphisms):
            for g in S.morphisms_from(S.cod[f]):
                if self.morphism_map[S.compose(g, f)] != T.compose(self.morphism_map[g], self.morphism_map[f]):
                    errors.append(f"composition not preserved at ({g},{f})")
        return errors


def identity_functor(C: FinCat) -> FunctorData:
    return FunctorData(f"id_{C.name}", C, C, range(C.num_objects), range(C.num_morphisms), key=("identity", C.key))


def is_faithful(F: FunctorData) -> tuple[bool, tuple[int, int] | None]:
    S = F.source
    for (a, b), ms in S._hom.items():
        if len({F.morphism_map[m] for m in ms}) != len(ms):
            return False, (a, b)
    return True, None


def is_fully_faithful(F: FunctorData) -> tuple[bool, tuple[int, int] | None]:
    """True iff every induced hom-set map is a bijection; else a witness pair
    of source objects whose hom-set map is not bijective."""
    S, T = F.source, F.target
    for a in range(S.num_objects):
        for b in range(S.num_objects):
            src = S.hom(a, b)
            image = {F.morphism_map[m] for m in src}
            if len(image) != len(src) or len(image) != len(T.hom(F.object_map[a], F.object_map[b])):
                return False, (a, b)
    return True, None


def fullness_report(F: FunctorData) -> dict[tuple[str, str], tuple[int, int]]:
    """Per source hom-pair: (size of image, size of target hom-set)."""
    S, T = F.source, F.target
    out = {}
    for a in range(S.num_objects):
        for b in range(S.num_objects):
            image = {F.morphism_map[m] for m in S.hom(a, b)}
            out[(S.objects[a], S.objects[b])] = (len(image), len(T.hom(F.object_map[a], F.object_map[b])))
    return out


# -- builders -------------------------------------------------------------

def _monotone_chain_maps(m: int, n: int) -> list[tuple[int, ...]]:
    """Monotone maps [m] -> [n] as tables."""
    return [tuple(c) for c in itertools.combinations_with_replacement(range(n + 1), m + 1)]


@lru_cache(maxsize=None)
def build_simplex_category(N: int) -> FinCat:
    if N < 0:
        raise ValueError("truncation level must be >= 0")
    objects = [f"[{n}]" for n in range(N + 1)]
    morphisms = [(m, n, t) for m in range(N + 1) for n in range(N + 1) for t in _monotone_chain_maps(m, n)]
    cat = FinCat.from_tables(f"Delta<={N}", objects, [n + 1 for n in range(N + 1)], morphisms, rank=range(N + 1), key=("simplex", N))
    cat.builder = {"kind": "simplex", "N": N}
    return cat


def cube_leq(a: int, b: int) -> bool:
    return a & ~b == 0


def monotone_cube_maps(m: int, n: int) -> list[tuple[int, ...]]:
    """All monotone maps 2^m -> 2^n; elements are bitmasks, coordinate i is bit i."""
    size, target = 1 << m, 1 << n
    preds = [[x ^ (1 << t) for t in range(m) if x >> t & 1] for x in range(size)]
    out: list[tuple[int, ...]] = []
    cur = [0] * size

    def rec(x: int) -> None:
        if x == size:
            out.append(tuple(cur))
            return
        for y in range(target):
            if all(cube_leq(cur[p], y) for p in preds[x]):
                cur[x] = y
                rec(x + 1)

    rec(0)
    return out


@lru_cache(maxsize=None)
def build_dedekind_cube_category(K: int) -> FinCat:
    if K < 0:
        raise ValueError("truncation level must be >= 0")
    objects = [f"[1]^{n}" for n in range(K + 1)]
    morphisms = [(m, n, t) for m in range(K + 1) for n in range(K + 1) for t in monotone_cube_maps(m, n)]
    cat = FinCat.from_tables(f"Box<={K}", objects, [1 << n for n in range(K + 1)], morphisms, rank=range(K + 1), key=("dedekind_cube", K))
    cat.builder = {"kind": "dedekind_cube", "K": K}
    return cat


def _insert_bit(x: int, i: int, eps: int) -> int:
    low = x & ((1 << i) - 1)
    return low | (eps << i) | ((x >> i) << (i + 1))


def _drop_bit(x: int, i: int) -> int:
    low = x & ((1 << i) - 1)
    return low | ((x >> (i + 1)) << i)


def box_prime_generators(K: int) -> list[tuple[str, int, int, tuple[int, ...]]]:
    """Faces, degeneracies and both connections in each dimension <= K,
    as (label, dom, cod, table) on bitmask carriers."""
    gens = []
    for n in range(K):
        src, big = 1 << n, 1 << (n + 1)
        for i in range(n + 1):
            for eps in (0, 1):
                gens.append((f"face{i},{eps}", n, n + 1, tuple(_insert_bit(x, i, eps) for x in range(src))))
            gens.append((f"degen{i}", n + 1, n, tuple(_drop_bit(x, i) for x in range(big))))
        for i in range(n):
            def merge(x: int, op: str, i: int = i) -> int:
                a, b = x >> i & 1, x >> (i + 1) & 1
                v = (a & b) if op == "and" else (a | b)
                rest = _drop_bit(x, i + 1)
                return (rest & ~(1 << i)) | (v << i)
            gens.append((f"conn{i},and", n + 1, n, tuple(merge(x, "and") for x in range(big))))
            gens.append((f"conn{i},or", n + 1, n, tuple(merge(x, "or") for x in range(big))))
    return gens


@lru_cache(maxsize=None)
def build_box_prime_category(K: int) -> tuple[FinCat, FunctorData]:
    """Wide subcategory of the Dedekind cube category closed under the
    generators, plus its inclusion functor."""
    box = build_dedekind_cube_category(K)
    gens = [box.table_index[(a, b, t)] for _, a, b, t in box_prime_generators(K)]
    reached = set(box.identity)
    queue = deque(box.identity)
    while queue:
        m = queue.popleft()
        for g in gens:
            if box.dom[g] == box.cod[m]:
                h = box.compose(g, m)
                if h not in reached:
                    reached.add(h)
                    queue.append(h)
    members = sorted(reached)
    sub = FinCat.from_tables(
        f"BoxPrime<={K}",
        box.objects,
        box.carrier_sizes,
        [(box.dom[m], box.cod[m], box.data[m]) for m in members],
        rank=box.rank,
        key=("box_prime", K),
    )
    sub.builder = {"kind": "box_prime", "K": K}
    mor_map = [box.table_index[(sub.dom[m], sub.cod[m], sub.data[m])] for m in range(sub.num_morphisms)]
    k = FunctorData(f"k<={K}", sub, box, range(K + 1), mor_map, key=("box_prime_inclusion", K))
    return sub, k


@lru_cache(maxsize=None)
def product_category(C: FinCat, D: FinCat) -> FinCat:
    objects = [f"({a},{b})" for a in C.objects for b in D.objects]
    nd = D.num_objects
    dom, cod, data = [], [], []
    index: dict[tuple[int, int], int] = {}
    for f in range(C.num_morphisms):
        for g in range(D.num_morphisms):
            index[(f, g)] = len(dom)
            dom.append(C.dom[f] * nd + D.dom[g])
            cod.append(C.cod[f] * nd + D.cod[g])
            data.append((f, g))
    identity = [index[(C.identity[a], D.identity[b])] for a in range(C.num_objects) for b in range(nd)]

    def compose(x: int, y: int) -> int:
        (f1, g1), (f2, g2) = data[x], data[y]
        return index[(C.compose(f1, f2), D.compose(g1, g2))]

    rank = [C.rank[a] + D.rank[b] for a in range(C.num_objects) for b in range(nd)]
    cat = FinCat(f"{C.name}x{D.name}", objects, dom, cod, identity, data=data, compose_fn=compose, rank=rank, key=("product", C.key, D.key))
    cat.pair_index = index
    cat.factors = (C, D)
    cat.builder = {"kind": "product", "left": getattr(C, "builder", None), "right": getattr(D, "builder", None)}
    return cat


@lru_cache(maxsize=None)
def terminal_category() -> FinCat:
    cat = FinCat.explicit("1", ["*"], [(0, 0)], [0], {(0, 0): 0}, key=("terminal",))
    cat.builder = {"kind": "terminal"}
    return cat


@lru_cache(maxsize=None)
def build_i1(N: int) -> FunctorData:
    """[n] -> ([n],[0]) into the product of two truncated simplex categories."""
    D = build_simplex_category(N)
    P = product_category(D, D)
    zero = D.identity[0]
    obj_map = [n * (N + 1) for n in range(N + 1)]
    mor_map = [P.pair_index[(m, zero)] for m in range(D.num_morphisms)]
    return FunctorData(f"i1<={N}", D, P, obj_map, mor_map, key=("i1", N))


def product_embedding(C: FinCat, D: FinCat, d: int) -> FunctorData:
    """c -> (c, d) with morphisms paired with id_d."""
    P = product_category(C, D)
    nd = D.num_objects
    obj_map = [a * nd + d for a in range(C.num_objects)]
    mor_map = [P.pair_index[(m, D.identity[d])] for m in range(C.num_morphisms)]
    return FunctorData(f"{C.name}x{D.objects[d]}", C, P, obj_map, mor_map, key=("embedding", C.key, D.key, d))


# -- JSON -----------------------------------------------------------------

def category_from_builder(spec: dict) -> FinCat:
    kind = spec["kind"]
    if kind == "simplex":
        return build_simplex_category(int(spec["N"]))
    if kind == "dedekind_cube":
        return build_dedekind_cube_category(int(spec["K"]))
    if kind == "box_prime":
        return build_box_prime_category(int(spec["K"]))[0]
    if kind == "product":
        return product_category(category_from_builder(spec["left"]), category_from_builder(spec["right"]))
    if kind == "terminal":
        return terminal_category()
    raise ValueError(f"unknown category builder {kind!r}")


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x


def fincat_to_json(C: FinCat) -> dict:
    out = {
        "format": FORMAT_FINCAT,
        "name": C.name,
        "builder": getattr(C, "builder", None),
        "objects": list(C.objects),
        "rank": list(C.rank),
        "morphisms": [
            {"id": m, "dom": C.objects[C.dom[m]], "cod": C.objects[C.cod[m]], "table": _jsonable(C.data[m])}
            for m in range(C.num_morphisms)
        ],
    }
    if out["builder"] is None:
        out["identity"] = list(C.identity)
        out["compose"] = [
            [g, f, C.compose(g, f)] for f in range(C.num_morphisms) for g in C.morphisms_from(C.cod[f])
        ]
    return out


def fincat_from_json(obj: dict) -> FinCat:
    if obj.get("format") != FORMAT_FINCAT:
        raise ValueError(f"unsupported format {obj.get('format')!r}")
    if obj.get("builder"):
        cat = category_from_builder(obj["builder"])
        if list(cat.objects) != obj["objects"] or cat.num_morphisms != len(obj["morphisms"]):
            raise ValueError("serialized category does not match its builder")
        return cat
    objects = obj["objects"]
    idx = {o: i for i, o in enumerate(objects)}
    morphisms = [(idx[m["dom"]], idx[m["cod"]]) for m in obj["morphisms"]]
    table = {(g, f): h for g, f, h in obj["compose"]}
    return FinCat.explicit(obj["name"], objects, morphisms, obj["identity"], table, data=[_hashable(m["table"]) for m in obj["morphisms"]], rank=obj.get("rank"))


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(v) for v in x)
    return x


def functor_to_json(F: FunctorData) -> dict:
    kind = F.key[0] if isinstance(F.key, tuple) else None
    builder = None
    if kind == "i1":
        builder = {"kind": "i1", "N": F.key[1]}
    elif kind == "box_prime_inclusion":
        builder = {"kind": "box_prime_inclusion", "K": F.key[1]}
    elif kind == "identity" and getattr(F.source, "builder", None):
        builder = {"kind": "identity", "category": F.source.builder}
    return {
        "format": FORMAT_FUNCTOR,
        "name": F.name,
        "builder": builder,
        "source": fincat_to_json(F.source),
        "target": fincat_to_json(F.target),
        "object_map": list(F.object_map),
        "morphism_map": list(F.morphism_map),
    }


def functor_from_json(obj: dict) -> FunctorData:
    if obj.get("format") != FORMAT_FUNCTOR:
        raise ValueError(f"unsupported format {obj.get('format')!r}")
    b = obj.get("builder")
    if b:
        if b["kind"] == "i1":
            return build_i1(int(b["N"]))
        if b["kind"] == "box_prime_inclusion":
            return build_box_prime_category(int(b["K"]))[1]
        if b["kind"] == "identity":
            return identity_functor(category_from_builder(b["category"]))
    S, T = fincat_from_json(obj["source"]), fincat_from_json(obj["target"])
    return FunctorData(obj["name"], S, T, obj["object_map"], obj["morphism_map"])
