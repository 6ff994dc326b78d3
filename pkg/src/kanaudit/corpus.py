"""Seeded random presheaves built by attaching cells along boundaries."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .fincat import FinCat, build_box_prime_category, build_dedekind_cube_category, build_simplex_category, product_category
from .presheaf import (
    Presheaf, PresheafMap, boundary, compose, empty_presheaf, map_from_json, map_to_json, presheaf_from_json, presheaf_to_json,
    pushout, random_map,
)

BASES = ("simplex", "cube", "box_prime", "bisimplex")


class CorpusBudgetError(RuntimeError):
    """The requested corpus cannot be produced within the cell budget."""


@dataclass(frozen=True)
class CorpusSpec:
    base: str = "simplex"
    count: int = 10
    max_cells: int = 25
    max_level: int = 2
    seed: int = 0
    level: int | None = None
    max_attachments: int = 4

    def __post_init__(self) -> None:
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}; choose from {BASES}")
        if self.count < 0 or self.max_cells < 1 or self.max_level < 0 or self.max_attachments < 1:
            raise ValueError("corpus sizes must be positive")
        if self.level is not None and self.level < self.max_level:
            raise ValueError("truncation level must be at least the maximal cell level")

    @property
    def truncation(self) -> int:
        return self.level if self.level is not None else max(self.max_level, 1)

    def category(self) -> FinCat:
        n = self.truncation
        if self.base == "simplex":
            return build_simplex_category(n)
        if self.base == "cube":
            return build_dedekind_cube_category(n)
        if self.base == "box_prime":
            return build_box_prime_category(n)[0]
        D = build_simplex_category(n)
        return product_category(D, D)


@dataclass
class Corpus:
    spec: CorpusSpec
    objects: list[Presheaf] = field(default_factory=list)
    monos: list[PresheafMap] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "format": "kanaudit.corpus/1",
            "spec": asdict(self.spec),
            "objects": [presheaf_to_json(X) for X in self.objects],
            "monos": [map_to_json(m) for m in self.monos],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Corpus":
        if obj.get("format") != "kanaudit.corpus/1":
            raise ValueError(f"unsupported format {obj.get('format')!r}")
        return cls(CorpusSpec(**obj["spec"]), [presheaf_from_json(X) for X in obj["objects"]], [map_from_json(m) for m in obj["monos"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def _attach(X: Presheaf, C: FinCat, c: int, rng: np.random.Generator) -> tuple[Presheaf, PresheafMap] | None:
    """Glue ``y(c)`` onto ``X`` along a random map from its boundary."""
    B, inc = boundary(C, c)
    a = random_map(B, X, rng)
    if a is None:
        return None
    P, _, iX = pushout(inc, a)
    return P, iX


def random_presheaf(C: FinCat, rng: np.random.Generator, *, max_cells: int, max_level: int, attachments: int) -> tuple[Presheaf, list[PresheafMap]]:
    """Attach ``attachments`` cells of rank at most ``max_level``, never
    exceeding ``max_cells``; returns the object and its stage inclusions."""
    ranks = [c for c in range(C.num_objects) if C.rank[c] <= max_level]
    weights = np.array([C.rank[c] + 1.0 for c in ranks])
    weights /= weights.sum()
    points = [c for c in ranks if C.rank[c] == 0]
    X = empty_presheaf(C)
    stages: list[PresheafMap] = []
    tries = 0
    while len(stages) < attachments and tries < 8 * attachments:
        tries += 1
        # nothing to attach along yet: start from a cell with empty boundary
        c = int(rng.choice(points)) if X.total_cells == 0 else int(rng.choice(ranks, p=weights))
        step = _attach(X, C, c, rng)
        if step is None or step[0].total_cells > max_cells:
            continue
        X, iX = step
        stages.append(iX)
    if not stages:
        raise CorpusBudgetError(f"no cell of rank <= {max_level} fits in {max_cells} cells over {C.name}")
    X.name = f"X[{X.total_cells}]"
    return X, stages


def gen_corpus(spec: CorpusSpec) -> Corpus:
    """Deterministic per spec: each object draws from its own spawned stream."""
    C = spec.category()
    out = Corpus(spec)
    children = np.random.SeedSequence(spec.seed).spawn(spec.count)
    for child in children:
        rng = np.random.default_rng(child)
        n = int(rng.integers(min(2, spec.max_attachments), spec.max_attachments + 1))
        X, stages = random_presheaf(C, rng, max_cells=spec.max_cells, max_level=spec.max_level, attachments=n)
        out.objects.append(X)
        # the inclusion of a random earlier stage, composed up to X
        k = int(rng.integers(0, len(stages)))
        m = stages[k]
        for later in stages[k + 1:]:
            m = compose(later, m)
        out.monos.append(m)
    return out
