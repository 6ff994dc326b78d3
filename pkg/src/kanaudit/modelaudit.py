"""Classes of maps created by a functor into simplicial sets, and the
containment audits between them.

A map ``f`` of the induced category is a cofibration when ``F(f)`` is a
monomorphism, a weak equivalence when the oracle accepts ``F(f)``, and a
fibration (approximately) when ``F(f)`` lifts against the horn generators
up to a truncation level. Fibration verdicts always carry their level.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

from .adjstring import AdjointString, WeqOracle
from .lifting import GeneratorSet, LiftingProblem, gen_horns, has_lift, lifting_squares, naive_lifts, rlp_failure
from .presheaf import PresheafMap, is_mono, map_to_json
from .report import FAIL, AuditReport, Verdict, aggregate, skipped


@dataclass
class FibrationVerdict:
    holds: bool
    level: int
    generator: str | None = None
    witness: Any = None

    def __bool__(self) -> bool:
        return self.holds

    def __str__(self) -> str:
        return f"{'fibration' if self.holds else 'not a fibration'} up to level {self.level}"


def horns_up_to(gens: GeneratorSet, N: int) -> GeneratorSet:
    maps = [(label, i) for label, i in gens if i.target.dimension() <= N]
    return GeneratorSet(f"{gens.name}|<={N}", [i for _, i in maps], [label for label, _ in maps])


def base_fibration_approx(p: PresheafMap, N: int, gens: GeneratorSet | None = None) -> FibrationVerdict:
    """Right lifting against the horn generators of dimension at most ``N``."""
    gens = gens if gens is not None else gen_horns(max(p.source.base.rank), base=p.source.base)
    failure = rlp_failure(p, horns_up_to(gens, N))
    if failure is None:
        return FibrationVerdict(True, N)
    label, sq = failure
    return FibrationVerdict(False, N, label, {"generator": label, "top": map_to_json(sq.top), "bottom": map_to_json(sq.bottom)})


@dataclass
class InducedClasses:
    """Cofibrations, weak equivalences and fibrations created by ``functor``."""

    functor: Any
    oracle: WeqOracle
    generators: GeneratorSet | None = None
    cofibration: Callable[[PresheafMap], bool] = field(default=is_mono)

    def image(self, f) -> PresheafMap:
        return self.functor.mor(f)

    def is_left_induced_cofibration(self, f) -> bool:
        return bool(self.cofibration(self.image(f)))

    def is_induced_weq(self, f) -> Verdict:
        return self.oracle(self.image(f))

    def is_right_induced_fibration_approx(self, f, N: int) -> FibrationVerdict:
        return base_fibration_approx(self.image(f), N, self.generators)


def is_left_induced_cofibration(classes: InducedClasses, f) -> bool:
    return classes.is_left_induced_cofibration(f)


def is_induced_weq(classes: InducedClasses, f) -> Verdict:
    return classes.is_induced_weq(f)


def is_right_induced_fibration_approx(classes: InducedClasses, f, N: int) -> FibrationVerdict:
    return classes.is_right_induced_fibration_approx(f, N)


# -- audits -------------------------------------------------------------------------

def _mono_audit(check: str, fn: Callable[[PresheafMap], PresheafMap], monos: Sequence[PresheafMap], **params) -> AuditReport:
    r = AuditReport(check, params={"maps": len(monos), **params})
    t0 = time.perf_counter()
    for i, m in enumerate(monos):
        if not is_mono(m):
            raise ValueError(f"input {i} is not a monomorphism")
        if not is_mono(fn(m)):
            r.fail(f"image of mono {i} is not mono", {"corpus_index": i, "map": map_to_json(m)})
    r.timing = time.perf_counter() - t0
    return r


def audit_mono_sandwich(*, cubical_monos: Sequence[PresheafMap] = (), N: int = 2,
                        simplicial_monos: Sequence[PresheafMap] = (), i1_string: AdjointString | None = None,
                        marked_string: AdjointString | None = None,
                        box_prime_monos: Sequence[PresheafMap] = (), k_lan=None) -> AuditReport:
    """Monos sit inside the left-induced cofibrations, and the available left
    adjoints send monos to monos."""
    from .cubes import triangulate_map

    children = []
    if cubical_monos:
        children.append(_mono_audit("cubical monos are left-induced cofibrations", lambda m: triangulate_map(m, N), cubical_monos, N=N))
    if i1_string is not None and simplicial_monos:
        children.append(_mono_audit("(i_1)_! preserves monos", i1_string.L.mor, simplicial_monos))
    if marked_string is not None and simplicial_monos:
        children.append(_mono_audit("flat preserves monos", lambda m: marked_string.L.mor(m).underlying, simplicial_monos))
    if k_lan is not None and box_prime_monos:
        children.append(_mono_audit("k_! preserves monos", k_lan.mor, box_prime_monos))
    children.append(skipped("cubical L preserves monos", "the simplicial-to-cubical left adjoint of T has no finite construction"))
    return aggregate("mono sandwich", children)


def _underlying(f) -> PresheafMap:
    return f.underlying if hasattr(f, "underlying") and not isinstance(f, PresheafMap) else f


def lifts_against_image(i: PresheafMap, f, L) -> bool:
    """Does ``f`` lift against ``L(i)`` in the induced category?

    Squares and fillers are searched on underlying presheaves; for marked
    objects a filler must also preserve the marking."""
    Li = L.mor(i)
    ui, uf = _underlying(Li), _underlying(f)
    marked = getattr(Li.target, "marked", None) if not isinstance(Li, PresheafMap) else None
    target_marked = getattr(f.source, "marked", None) if not isinstance(f, PresheafMap) else None
    for sq in lifting_squares(ui, uf):
        if marked is None:
            if has_lift(sq) is None:
                return False
            continue
        if not all(int(sq.top.components[1][e]) in target_marked for e in getattr(Li.source, "marked", ())):
            continue
        if not all(int(sq.bottom.components[1][e]) in f.target.marked for e in marked):
            continue
        ok = any(all(int(d.components[1][e]) in target_marked for e in marked) for d in naive_lifts(sq))
        if not ok:
            return False
    return True


def audit_fibration_comparison(s: AdjointString, maps: Sequence, N: int, gens: GeneratorSet | None = None) -> AuditReport:
    """Right-induced fibration verdicts are exactly the base verdicts on
    ``F(f)``; when the left adjoint exists, ``F(f)`` lifts against a
    generator ``i`` iff ``f`` lifts against ``L(i)``."""
    r = AuditReport("fibration comparison", params={"string": s.name, "maps": len(maps), "level": N})
    t0 = time.perf_counter()
    for idx, f in enumerate(maps):
        Ff = s.F.mor(f)
        base_gens = gens if gens is not None else gen_horns(max(Ff.source.base.rank), base=Ff.source.base)
        classes = InducedClasses(s.F, WeqOracle("unused", lambda g: Verdict.UNKNOWN), base_gens)
        induced = classes.is_right_induced_fibration_approx(f, N)
        direct = base_fibration_approx(Ff, N, base_gens)
        if induced.holds != direct.holds:
            r.fail(f"map {idx}: induced and base verdicts disagree", {"corpus_index": idx})
            continue
        r.verdicts.append(f"map {idx}: {induced}")
        if s.L is None:
            continue
        for label, i in horns_up_to(base_gens, N):
            base_side = all(has_lift(sq) is not None for sq in lifting_squares(i, Ff))
            if base_side != lifts_against_image(i, f, s.L):
                r.fail(f"map {idx}: lifting against {label} and against L({label}) disagree",
                       {"corpus_index": idx, "generator": label, "base_lifts": base_side})
                break
    if s.L is None:
        r.details.append("left adjoint unavailable: adjoint lifting cross-check skipped")
    r.timing = time.perf_counter() - t0
    return r


def iso_stability_failures(classes: InducedClasses, f, isos_before: Sequence, isos_after: Sequence, compose: Callable, N: int) -> list[str]:
    """Predicates of ``f`` agree with those of ``b . f . a`` for isos ``a``, ``b``."""
    out = []
    ref = (classes.is_left_induced_cofibration(f), classes.is_induced_weq(f), classes.is_right_induced_fibration_approx(f, N).holds)
    for a in isos_before:
        for b in isos_after:
            g = compose(b, compose(f, a))
            got = (classes.is_left_induced_cofibration(g), classes.is_induced_weq(g), classes.is_right_induced_fibration_approx(g, N).holds)
            if got != ref:
                out.append(f"predicates changed under isomorphism: {ref} -> {got}")
    return out
