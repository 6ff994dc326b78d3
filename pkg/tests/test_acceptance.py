"""The acceptance criteria, each at its stated scale and time limit.

Every test prints one ``criterion N: PASS|FAIL`` line; the lines are also
collected into a summary section at the end of the pytest run. Running this
file directly (``python3 tests/test_acceptance.py``) prints the same lines
without pytest.
"""
import time

from kanaudit.report import FAIL, INCONCLUSIVE, PASS, SKIPPED
from kanaudit.suites import (
    DEFAULT_BATTERY,
    SuiteConfig,
    run_suite,
    string_cases,
    suite_bijections,
    suite_counit,
    suite_cylinder,
    suite_homotopy_idempotency,
    suite_hott_generators,
    suite_idempotency,
    suite_k_comparison,
    suite_oracle_regression,
    suite_representables,
    suite_T_preservation,
    suite_triangles,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:
    ACCEPTANCE_LINES = []

CFG = SuiteConfig()


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def record(n, title, problems, elapsed):
    status = "PASS" if not problems else "FAIL"
    line = f"criterion {n}: {status} {title} ({elapsed:.1f}s)"
    if problems:
        line += " -- " + "; ".join(problems)
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert not problems, line


def leaves(report):
    return [c for c in report.walk() if not c.children]


def is_triangulation_left_side(check):
    # T has no constructible left adjoint, so its L-side checks are skipped
    return "L|T" in check or ("T|C" in check and ("L side" in check or "homotopy idempotent" in check))


def status_problems(report):
    out = []
    for c in leaves(report):
        if c.status == PASS or (c.status == SKIPPED and is_triangulation_left_side(c.check)):
            continue
        out.append(f"{c.check}: {c.status}")
    return out


def right_side_passes(report):
    """At least one T|C check on the right-adjoint side ran and passed."""
    return any(c.status == PASS and ("T|C" in c.check or "C|T" in c.check) for c in leaves(report))


def test_criterion_01_adjunction_bijections():
    cases = string_cases(CFG)
    r, dt = timed(suite_bijections, CFG)
    problems = status_problems(r)
    assert set(cases) == {"i_1", "k", "marked", "T|C"}
    for c in cases.values():
        if len(c.corpus_M) != 30 or len(c.corpus_N) != 30:
            problems.append(f"{c.label}: corpus sizes {len(c.corpus_M)}/{len(c.corpus_N)}")
        too_big = [X for X in list(c.corpus_M) + list(c.corpus_N) if X.total_cells > 25]
        if too_big:
            problems.append(f"{c.label}: {len(too_big)} objects above 25 cells")
    if not right_side_passes(r):
        problems.append("no T|C bijection was checked")
    if dt >= 120:
        problems.append(f"took {dt:.1f}s, limit 120s")
    record(1, "hom-set bijections and transposes on four strings", problems, dt)


def test_criterion_02_triangle_identities():
    r, dt = timed(suite_triangles, CFG)
    problems = status_problems(r)
    control = next(c for c in r.children if c.check == "corrupted unit is rejected")
    if control.witness is None:
        problems.append("negative control has no witness")
    if len(r.children) != 5:
        problems.append(f"expected four strings and the control, got {len(r.children)} checks")
    if not right_side_passes(r):
        problems.append("no T|C triangle was checked")
    if dt >= 30:
        problems.append(f"took {dt:.1f}s, limit 30s")
    record(2, "triangle identities, corrupted unit rejected with a witness", problems, dt)


def test_criterion_03_fully_faithful_strings_are_idempotent():
    r, dt = timed(suite_idempotency, CFG)
    problems = status_problems(r)
    if len(r.children) != 6:
        problems.append(f"expected six checks, got {len(r.children)}")
    if not right_side_passes(r):
        problems.append("no T|C idempotency check ran")
    violations = sum(1 for c in r.walk() if c.status == FAIL)
    if violations:
        problems.append(f"{violations} idempotency violations")
    record(3, "fully faithful strings are idempotent, zero split verdicts", problems, dt)


def test_criterion_04_triangulated_representables():
    r, dt = timed(suite_representables, CFG)
    problems = status_problems(r)
    if not any(d.startswith("n=2: nondegenerate [4, 5, 2") for d in r.details):
        problems.append(f"square cell counts: {r.details}")
    if r.params["K"] < 3:
        problems.append("representables not checked up to [1]^3")
    if dt >= 60:
        problems.append(f"took {dt:.1f}s, limit 60s")
    record(4, "T of representables is the nerve, homology of a point", problems, dt)


def test_criterion_05_counit_iso():
    r, dt = timed(suite_counit, CFG)
    problems = status_problems(r)
    if r.params["objects"] != 15 or r.params["K"] != 2 or r.params["N"] < 2:
        problems.append(f"parameters {r.params}")
    record(5, "counit TC -> Id is iso on 15 objects at K=2", problems, dt)


def test_criterion_06_T_preservation():
    r, dt = timed(suite_T_preservation, CFG)
    problems = status_problems(r)
    counts = {c.check: c.params for c in r.children}
    if counts["T preserves monos"]["maps"] != 20:
        problems.append("expected 20 monos")
    if counts["T preserves binary products"]["pairs"] != 10:
        problems.append("expected 10 pairs")
    if counts["T preserves pushouts"]["spans"] != 10:
        problems.append("expected 10 spans")
    record(6, "T preserves monos, products and pushouts", problems, dt)


def test_criterion_07_hott_generators():
    r, dt = timed(suite_hott_generators, CFG)
    problems = []
    if r.params["generators"] != 10:
        problems.append(f"{r.params['generators']} generators")
    falsified = [v for v in r.verdicts if "NOT_WEQ" in v.split()[-1]]
    if falsified:
        problems.append(f"NOT_WEQ: {falsified}")
    if r.exit_code() not in (0, 2):
        problems.append(f"exit code {r.exit_code()}")
    record(7, f"HoTT generators triangulate to weak equivalences ({r.status})", problems, dt)


def test_criterion_08_cylinder():
    r, dt = timed(suite_cylinder, CFG)
    problems = [f"{c.check}: {c.status}" for c in leaves(r) if c.status == FAIL]
    if r.params["objects"] != 15:
        problems.append(f"{r.params['objects']} objects")
    found = next(d for d in r.details if d.startswith("homotopy-equivalence witnesses"))
    if not found.endswith("15/15"):
        # witness search may be inconclusive; report it without failing
        print(f"criterion 8 note: {found}")
    record(8, f"cylinder j mono, p j = fold, {found.split(': ')[1]} witnesses", problems, dt)


def test_criterion_09_homotopy_idempotency():
    r, dt = timed(suite_homotopy_idempotency, CFG)
    problems = status_problems(r)
    if len(r.children) != 3:
        problems.append(f"expected three fully faithful strings, got {len(r.children)}")
    record(9, "homotopy idempotency with identity replacement and iso oracle", problems, dt)


def test_criterion_10_oracle_regression():
    r, dt = timed(suite_oracle_regression, CFG)
    problems = status_problems(r)
    params = {c.check: c.params for c in r.children}
    if params["hom_set against brute force"]["instances"] != 50:
        problems.append("hom_set instances")
    if params["has_lift against brute force"]["instances"] != 50:
        problems.append("has_lift instances")
    record(10, "hom_set and has_lift match brute force, homology consistent", problems, dt)


def test_criterion_11_k_comparison():
    r, dt = timed(suite_k_comparison, CFG)
    problems = status_problems(r)
    mono = next(c for c in r.children if c.check == "k_! preserves monos")
    if mono.params["maps"] != 20:
        problems.append("expected 20 monos")
    record(11, "k_! on representables, triangulations and monos", problems, dt)


def test_full_battery():
    (report, code), dt = timed(run_suite, DEFAULT_BATTERY, CFG)
    problems = []
    if code not in (0, 2):
        problems.append(f"exit code {code}")
    cubical_l = [c for c in report.walk() if c.check.startswith("cubical L")]
    if not cubical_l or any(c.status != SKIPPED for c in cubical_l):
        problems.append("cubical L checks are not SKIPPED")
    if dt >= 300:
        problems.append(f"took {dt:.1f}s, limit 300s")
    inconclusive = sum(1 for c in leaves(report) if c.status == INCONCLUSIVE)
    line = f"full battery: {'PASS' if not problems else 'FAIL'} exit {code}, {inconclusive} inconclusive ({dt:.1f}s)"
    print(line)
    assert not problems, problems


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
