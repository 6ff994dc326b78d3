"""Adjoint strings ``L -| F -| R`` and their audits.

``F`` goes from N to M, ``L`` and ``R`` from M to N. The four structure
maps are ``eta: Id_M => FL``, ``eps: LF => Id_N``, ``eta_r: Id_N => RF``
and ``eps_r: FR => Id_M``. A string may be missing its left half
(``L``, ``eta``, ``eps`` all None); checks that need it are skipped.
"""
from __future__ import annotations

import time
from typing import Any, Callable, Iterable, Sequence

from . import presheaf as ps
from .presheaf import Presheaf, PresheafMap
from .report import FAIL, AuditReport, Verdict, aggregate, skipped, verdict_status


# -- categories -----------------------------------------------------------------

class PresheafCategory:
    """Presheaves over a fixed base, as a category of objects and maps."""

    def __init__(self, base):
        self.base = base
        self.name = f"PSh({base.name})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PresheafCategory) and self.base == other.base

    def __hash__(self) -> int:
        return hash(("psh", self.base.key))

    def hom_set(self, X: Presheaf, Y: Presheaf, limit: int | None = None) -> list[PresheafMap]:
        return ps.hom_set(X, Y, limit=limit)

    def identity(self, X: Presheaf) -> PresheafMap:
        return ps.identity_map(X)

    def compose(self, g: PresheafMap, f: PresheafMap) -> PresheafMap:
        return ps.compose(g, f)

    def equal(self, f: PresheafMap, g: PresheafMap) -> bool:
        return f == g

    def is_iso(self, f: PresheafMap) -> bool:
        return ps.is_iso(f)

    def is_mono(self, f: PresheafMap) -> bool:
        return ps.is_mono(f)

    def source(self, f: PresheafMap) -> Presheaf:
        return f.source

    def target(self, f: PresheafMap) -> Presheaf:
        return f.target

    def describe(self, X: Presheaf) -> dict:
        return ps.presheaf_to_json(X)

    def describe_map(self, f: PresheafMap) -> dict:
        return ps.map_to_json(f)

    def size(self, X: Presheaf) -> int:
        return X.total_cells


# -- functors and transformations ------------------------------------------------

class ComputableFunctor:
    def __init__(self, name: str, source, target, obj_fn: Callable, mor_fn: Callable):
        self.name = name
        self.source = source
        self.target = target
        self._obj_fn = obj_fn
        self._mor_fn = mor_fn
        self._objs: dict[int, tuple[Any, Any]] = {}

    def __repr__(self) -> str:
        return f"ComputableFunctor({self.name})"

    def obj(self, X):
        hit = self._objs.get(id(X))
        if hit is None:
            hit = (X, self._obj_fn(X))
            self._objs[id(X)] = hit
        return hit[1]

    __call__ = obj

    def mor(self, f):
        return self._mor_fn(f)

    def functoriality_failures(self, maps: Iterable, limit: int = 5) -> list[str]:
        """Checks identities and every composable pair among ``maps``."""
        maps = list(maps)
        cat = self.target
        bad = []
        for f in maps:
            for X in (self.source.source(f), self.source.target(f)):
                if not cat.equal(self.mor(self.source.identity(X)), cat.identity(self.obj(X))):
                    bad.append(f"{self.name} does not preserve an identity")
        for f in maps:
            for g in maps:
                if self.source.source(g) is self.source.target(f):
                    lhs = self.mor(self.source.compose(g, f))
                    rhs = cat.compose(self.mor(g), self.mor(f))
                    if not cat.equal(lhs, rhs):
                        bad.append(f"{self.name} does not preserve a composite")
            if len(bad) >= limit:
                break
        return bad[:limit]


def identity_functor(cat) -> ComputableFunctor:
    return ComputableFunctor(f"Id_{cat.name}", cat, cat, lambda X: X, lambda f: f)


def compose_functors(G: ComputableFunctor, F: ComputableFunctor) -> ComputableFunctor:
    """``G o F``."""
    return ComputableFunctor(f"{G.name}{F.name}", F.source, G.target, lambda X: G.obj(F.obj(X)), lambda f: G.mor(F.mor(f)))


class NatTrans:
    def __init__(self, name: str, source: ComputableFunctor | None, target: ComputableFunctor | None, component_fn: Callable):
        self.name = name
        self.source = source
        self.target = target
        self._fn = component_fn
        self._cache: dict[int, tuple[Any, Any]] = {}

    def __repr__(self) -> str:
        return f"NatTrans({self.name})"

    def component(self, X):
        hit = self._cache.get(id(X))
        if hit is None:
            hit = (X, self._fn(X))
            self._cache[id(X)] = hit
        return hit[1]

    __call__ = component

    def naturality_failure(self, f) -> str | None:
        """Checks the square ``G(f) alpha_X = alpha_Y F(f)`` for ``f: X -> Y``."""
        cat = self.target.target
        src = self.source.source
        X, Y = src.source(f), src.target(f)
        lhs = cat.compose(self.target.mor(f), self.component(X))
        rhs = cat.compose(self.component(Y), self.source.mor(f))
        if not cat.equal(lhs, rhs):
            return f"{self.name} is not natural"
        return None


class Adjunction:
    """``left -| right`` with ``unit: Id => right.left`` and ``counit: left.right => Id``."""

    def __init__(self, name: str, left: ComputableFunctor, right: ComputableFunctor, unit: NatTrans, counit: NatTrans):
        self.name = name
        self.left = left
        self.right = right
        self.unit = unit
        self.counit = counit
        if unit.source is None:
            unit.source = identity_functor(left.source)
            unit.target = compose_functors(right, left)
        if counit.source is None:
            counit.source = compose_functors(left, right)
            counit.target = identity_functor(right.source)

    def transpose_right(self, A, phi):
        """``phi: left A -> X`` to ``right(phi) . unit_A: A -> right X``."""
        return _transpose_right(self, A, phi)

    def transpose_left(self, X, psi):
        """``psi: A -> right X`` to ``counit_X . left(psi): left A -> X``."""
        return _transpose_left(self, X, psi)


def _transpose_right(adj: Adjunction, A, phi):
    return adj.left.source.compose(adj.right.mor(phi), adj.unit(A))


def _transpose_left(adj: Adjunction, X, psi):
    return adj.right.source.compose(adj.counit(X), adj.left.mor(psi))


def compose_adjunctions(first: Adjunction, second: Adjunction, name: str | None = None) -> Adjunction:
    """``L1 -| R1`` (L1: A -> B) then ``L2 -| R2`` (L2: B -> C) gives ``L2 L1 -| R1 R2``."""
    L = compose_functors(second.left, first.left)
    R = compose_functors(first.right, second.right)
    unit = NatTrans(
        f"unit({L.name}|{R.name})", None, None,
        lambda A: first.left.source.compose(first.right.mor(second.unit(first.left(A))), first.unit(A)),
    )
    counit = NatTrans(
        f"counit({L.name}|{R.name})", None, None,
        lambda C: second.right.source.compose(second.counit(C), second.left.mor(first.counit(second.right(C)))),
    )
    return Adjunction(name or f"{L.name}|{R.name}", L, R, unit, counit)


class AdjointString:
    def __init__(self, name: str, *, F: ComputableFunctor, L: ComputableFunctor | None, R: ComputableFunctor,
                 eta: NatTrans | None, eps: NatTrans | None, eta_r: NatTrans, eps_r: NatTrans):
        self.name = name
        self.F, self.L, self.R = F, L, R
        self.eta, self.eps, self.eta_r, self.eps_r = eta, eps, eta_r, eps_r
        self.N = F.source
        self.M = F.target
        self.left = Adjunction(f"{L.name}|{F.name}", L, F, eta, eps) if L is not None else None
        self.right = Adjunction(f"{F.name}|{R.name}", F, R, eta_r, eps_r)

    @property
    def has_left(self) -> bool:
        return self.L is not None

    def with_unit(self, eta: NatTrans) -> "AdjointString":
        return AdjointString(self.name + "[unit replaced]", F=self.F, L=self.L, R=self.R, eta=eta, eps=self.eps, eta_r=self.eta_r, eps_r=self.eps_r)


def identity_string(cat) -> AdjointString:
    I = identity_functor(cat)

    def ident(X):
        return cat.identity(X)

    return AdjointString(
        f"Id({cat.name})", F=I, L=I, R=I,
        eta=NatTrans("id", None, None, ident), eps=NatTrans("id", None, None, ident),
        eta_r=NatTrans("id", None, None, ident), eps_r=NatTrans("id", None, None, ident),
    )


def corrupt_unit(s: AdjointString, corpus_M: Sequence) -> tuple[AdjointString, Any]:
    """Negative control: precompose the unit with a non-identity endomorphism
    at the first corpus object that has one. Returns the string and that object."""
    M = s.M
    for A in corpus_M:
        for e in M.hom_set(A, A, limit=4):
            if not M.equal(e, M.identity(A)):
                bad_at = A
                bad_map = e
                break
        else:
            continue
        break
    else:
        raise ValueError("no corpus object has a non-identity endomorphism")
    eta = s.eta

    def component(X):
        if X is bad_at:
            return M.compose(eta(X), bad_map)
        return eta(X)

    return s.with_unit(NatTrans(eta.name + "~corrupt", None, None, component)), bad_at


# -- audits ------------------------------------------------------------------------

def _witness(cat, X, index: int, **extra) -> dict:
    w = {"corpus_index": index, "object": cat.describe(X)}
    w.update(extra)
    return w


def naturality_report(adj: Adjunction, corpus_left: Sequence, corpus_right: Sequence, samples: int = 2) -> AuditReport:
    """Naturality squares of unit and counit on a few maps between corpus objects."""
    r = AuditReport(f"naturality {adj.name}", params={"samples": samples})
    t0 = time.perf_counter()
    for trans, cat, corpus in ((adj.unit, adj.left.source, corpus_left), (adj.counit, adj.right.source, corpus_right)):
        for i, X in enumerate(corpus):
            Y = corpus[(i + 1) % len(corpus)]
            for f in cat.hom_set(X, Y, limit=samples) + cat.hom_set(X, X, limit=samples):
                msg = trans.naturality_failure(f)
                if msg:
                    r.fail(f"{msg} at corpus object {i}", _witness(cat, X, i, map=cat.describe_map(f)))
                    break
    r.timing = time.perf_counter() - t0
    return r


def triangle_report(adj: Adjunction, corpus_left: Sequence, corpus_right: Sequence) -> AuditReport:
    """``counit_{LA} . L(unit_A) = id`` and ``R(counit_X) . unit_{RX} = id``, exactly."""
    r = AuditReport(f"triangles {adj.name}")
    t0 = time.perf_counter()
    N, M = adj.right.source, adj.left.source
    for i, A in enumerate(corpus_left):
        LA = adj.left(A)
        lhs = N.compose(adj.counit(LA), adj.left.mor(adj.unit(A)))
        if not N.equal(lhs, N.identity(LA)):
            r.fail(f"counit.L(unit) is not the identity at left corpus object {i}", _witness(M, A, i, side="left"))
    for i, X in enumerate(corpus_right):
        RX = adj.right(X)
        lhs = M.compose(adj.right.mor(adj.counit(X)), adj.unit(RX))
        if not M.equal(lhs, M.identity(RX)):
            r.fail(f"R(counit).unit is not the identity at right corpus object {i}", _witness(N, X, i, side="right"))
    r.timing = time.perf_counter() - t0
    return r


def bijection_report(adj: Adjunction, pairs: Sequence[tuple[Any, Any]]) -> AuditReport:
    """For each ``(A, X)``: ``|hom(LA, X)| = |hom(A, RX)|`` and the two
    transposes are mutually inverse on every element."""
    r = AuditReport(f"bijection {adj.name}", params={"pairs": len(pairs)})
    t0 = time.perf_counter()
    N, M = adj.right.source, adj.left.source
    sizes = []
    for i, (A, X) in enumerate(pairs):
        LA, RX = adj.left(A), adj.right(X)
        lhs = N.hom_set(LA, X)
        rhs = M.hom_set(A, RX)
        sizes.append((len(lhs), len(rhs)))
        if len(lhs) != len(rhs):
            r.fail(f"pair {i}: |hom(LA,X)|={len(lhs)} but |hom(A,RX)|={len(rhs)}", _witness(M, A, i, target=N.describe(X)))
            continue
        for phi in lhs:
            back = _transpose_left(adj, X, _transpose_right(adj, A, phi))
            if not N.equal(back, phi):
                r.fail(f"pair {i}: transpose round trip fails on hom(LA,X)", _witness(M, A, i, target=N.describe(X)))
                break
        for psi in rhs:
            back = _transpose_right(adj, A, _transpose_left(adj, X, psi))
            if not M.equal(back, psi):
                r.fail(f"pair {i}: transpose round trip fails on hom(A,RX)", _witness(M, A, i, target=N.describe(X)))
                break
    r.details.append(f"hom-set sizes: {sizes}")
    r.timing = time.perf_counter() - t0
    return r


def verify_adjunction(adj: Adjunction, corpus_left: Sequence, corpus_right: Sequence, *, samples: int = 2) -> AuditReport:
    return aggregate(f"adjunction {adj.name}", [
        naturality_report(adj, corpus_left, corpus_right, samples),
        triangle_report(adj, corpus_left, corpus_right),
    ])


def verify_triangle_identities(s: AdjointString, corpus_M: Sequence, corpus_N: Sequence, *, samples: int = 2) -> AuditReport:
    """Naturality (reported separately) and both triangle identities of both adjunctions."""
    children = []
    if s.left is not None:
        children.append(naturality_report(s.left, corpus_M, corpus_N, samples))
        children.append(triangle_report(s.left, corpus_M, corpus_N))
    else:
        children.append(skipped(f"triangles L|{s.F.name}", "left adjoint not constructed"))
    children.append(naturality_report(s.right, corpus_N, corpus_M, samples))
    children.append(triangle_report(s.right, corpus_N, corpus_M))
    return aggregate(f"triangle identities {s.name}", children)


def verify_bijections(s: AdjointString, pairs_MN: Sequence, pairs_NM: Sequence) -> AuditReport:
    children = []
    if s.left is not None:
        children.append(bijection_report(s.left, pairs_MN))
    else:
        children.append(skipped(f"bijection L|{s.F.name}", "left adjoint not constructed"))
    children.append(bijection_report(s.right, pairs_NM))
    return aggregate(f"adjunction bijections {s.name}", children)


def check_idempotent(s: AdjointString, corpus_N: Sequence) -> AuditReport:
    """``eta F``, ``F eps``, ``F eta_r`` and ``eps_r F`` isomorphisms at each object.

    The four maps are expected to be all isomorphisms or none; a split
    verdict at any object is reported as a failure of that claim.
    """
    r = AuditReport(f"idempotent {s.name}")
    t0 = time.perf_counter()
    M = s.M
    flags = []
    for i, X in enumerate(corpus_N):
        FX = s.F(X)
        verdicts = {}
        if s.has_left:
            verdicts["eta F"] = M.is_iso(s.eta(FX))
            verdicts["F eps"] = M.is_iso(s.F.mor(s.eps(X)))
        verdicts["F eta'"] = M.is_iso(s.F.mor(s.eta_r(X)))
        verdicts["eps' F"] = M.is_iso(s.eps_r(FX))
        flags.append(verdicts)
        if len(set(verdicts.values())) > 1:
            r.fail(f"object {i}: idempotency maps disagree {verdicts}", _witness(s.N, X, i, verdicts=verdicts))
        elif not all(verdicts.values()):
            r.fail(f"object {i}: idempotency maps are not isomorphisms", _witness(s.N, X, i, verdicts=verdicts))
    iso_all = all(all(v.values()) for v in flags)
    r.details.append(f"idempotent on corpus: {iso_all}")
    r.timing = time.perf_counter() - t0
    children = [r]
    if not s.has_left:
        children.append(skipped(f"idempotent {s.name} (L side)", "left adjoint not constructed; eta F and F eps not checked"))
    return aggregate(f"idempotent {s.name}", children) if len(children) > 1 else r


def check_fully_faithful_string(s: AdjointString, corpus_M: Sequence, *, expect: bool | None = True) -> AuditReport:
    """L fully faithful iff ``eta`` iso; R fully faithful iff ``eps_r`` iso.

    The two verdicts must coincide. With ``expect=None`` the verdict itself
    is only recorded; otherwise a mismatch with ``expect`` fails.
    """
    r = AuditReport(f"fully faithful {s.name}")
    t0 = time.perf_counter()
    M = s.M
    right_ok = [M.is_iso(s.eps_r(A)) for A in corpus_M]
    right_ff = all(right_ok)
    r.details.append(f"R fully faithful on corpus: {right_ff}")
    if s.has_left:
        left_ok = [M.is_iso(s.eta(A)) for A in corpus_M]
        left_ff = all(left_ok)
        r.details.append(f"L fully faithful on corpus: {left_ff}")
        if left_ff != right_ff:
            i = next(k for k, (a, b) in enumerate(zip(left_ok, right_ok)) if a != b)
            r.fail("L and R disagree on fully faithfulness", _witness(M, corpus_M[i], i, left=left_ok[i], right=right_ok[i]))
    verdict = right_ff
    r.params["fully_faithful"] = verdict
    if expect is not None and verdict != expect and r.status != FAIL:
        i = right_ok.index(False) if False in right_ok else 0
        r.fail(f"expected fully faithful={expect}, found {verdict}", _witness(M, corpus_M[i], i) if corpus_M else None)
    r.timing = time.perf_counter() - t0
    if not s.has_left:
        return aggregate(f"fully faithful {s.name}", [r, skipped(f"fully faithful {s.name} (L side)", "left adjoint not constructed")])
    return r


def compose_adjunction(s: AdjointString) -> Adjunction:
    """``FL -| FR`` from the two halves of the string."""
    if s.left is None:
        raise ValueError("string has no left adjoint")
    return compose_adjunctions(s.left, s.right, name=f"{s.F.name}{s.L.name}|{s.F.name}{s.R.name}")


# -- homotopy idempotency --------------------------------------------------------

class WeqOracle:
    def __init__(self, name: str, fn: Callable[[Any], Verdict]):
        self.name = name
        self._fn = fn

    def __call__(self, f) -> Verdict:
        return self._fn(f)


class CofibrantReplacement:
    """``(FX)^c -> FX``; the default is the identity (every object cofibrant)."""

    def __init__(self, name: str = "identity", fn: Callable | None = None):
        self.name = name
        self._fn = fn

    def __call__(self, cat, A):
        if self._fn is None:
            return A, cat.identity(A)
        return self._fn(A)

    def validate(self, cat, A) -> bool:
        """Identity components are trivially valid; others must be acyclic
        fibrations up to truncation (lifts against boundary inclusions)."""
        Ac, q = self(cat, A)
        if cat.is_iso(q):
            return True
        from .lifting import gen_boundaries, has_rlp

        N = max(q.source.base.rank)
        return has_rlp(q, gen_boundaries(N, q.source.base))


def epsilon_h(s: AdjointString, c: CofibrantReplacement, X):
    """``eps_X . L(q)``: ``L((FX)^c) -> X``."""
    Ac, q = c(s.M, s.F(X))
    return s.N.compose(s.eps(X), s.L.mor(q)), Ac, q


def check_homotopy_idempotent(s: AdjointString, c: CofibrantReplacement, oracle: WeqOracle, corpus_N: Sequence) -> AuditReport:
    if not s.has_left:
        return skipped(f"homotopy idempotent {s.name}", "left adjoint not constructed")
    r = AuditReport(f"homotopy idempotent {s.name}", params={"oracle": oracle.name, "replacement": c.name})
    t0 = time.perf_counter()
    M = s.M
    verdicts = []
    for i, X in enumerate(corpus_N):
        FX = s.F(X)
        if not c.validate(M, FX):
            r.fail(f"object {i}: replacement is not an acyclic fibration", _witness(s.N, X, i))
            continue
        eh, Ac, q = epsilon_h(s, c, X)
        Feh = s.F.mor(eh)
        eta_c = s.eta(Ac)
        if not M.equal(M.compose(Feh, eta_c), q):
            r.fail(f"object {i}: F(eps^h).eta does not equal the replacement map", _witness(s.N, X, i))
            continue
        v1, v2 = oracle(Feh), oracle(eta_c)
        r.verdicts.append(f"{i}: F(eps^h)={v1.value} eta={v2.value}")
        verdicts += [v1, v2]
        if Verdict.UNKNOWN not in (v1, v2) and v1 != v2:
            r.fail(f"object {i}: oracle verdicts disagree ({v1.value} vs {v2.value})", _witness(s.N, X, i))
        elif Verdict.NOT_WEQ in (v1, v2):
            r.fail(f"object {i}: oracle reports NOT_WEQ", _witness(s.N, X, i))
    if r.status != FAIL:
        r.status = verdict_status(verdicts)
    r.timing = time.perf_counter() - t0
    return r
