import json

import pytest

from kanaudit.adjstring import corrupt_unit, verify_triangle_identities
from kanaudit.cli import main
from kanaudit.corpus import Corpus, CorpusBudgetError, CorpusSpec, gen_corpus
from kanaudit.fincat import build_dedekind_cube_category, build_simplex_category
from kanaudit.presheaf import boundary, map_to_json, presheaf_from_json, presheaf_to_json, yoneda
from kanaudit.report import FAIL, PASS, SKIPPED, AuditReport
from kanaudit.suites import DEFAULT_BATTERY, SUITES, SuiteConfig, run_suite, string_cases, with_overrides

SMALL = SuiteConfig(corpus_size=6)


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


# -- corpus generation ------------------------------------------------------------

def test_corpus_is_deterministic():
    spec = CorpusSpec("simplex", count=5, seed=42)
    assert gen_corpus(spec).to_json() == gen_corpus(spec).to_json()
    other = gen_corpus(CorpusSpec("simplex", count=5, seed=43)).to_json()
    assert other != gen_corpus(spec).to_json()


def test_gen_command_is_byte_for_byte_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["gen", "--seed", "7", "--corpus-size", "4", "--format", "json", "-o", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["format"] == "kanaudit.corpus/1"


def test_empty_and_low_dimensional_corpora():
    assert gen_corpus(CorpusSpec("cube", count=0)).objects == []
    c = gen_corpus(CorpusSpec("simplex", count=6, max_level=1, seed=3, level=2))
    assert all(X.dimension() <= 1 for X in c.objects)
    assert len(c.monos) == len(c.objects)


def test_corpus_json_round_trip():
    c = gen_corpus(CorpusSpec("bisimplex", count=3, max_cells=10, max_level=1, seed=1))
    back = Corpus.from_json(json.loads(json.dumps(c.to_json())))
    assert all(X.same_as(Y) for X, Y in zip(back.objects, c.objects))
    assert all(f == g for f, g in zip(back.monos, c.monos))


def test_corpus_budget_and_spec_errors():
    with pytest.raises(CorpusBudgetError):
        gen_corpus(CorpusSpec("simplex", count=1, max_cells=1, max_level=1))
    with pytest.raises(ValueError):
        CorpusSpec("globular")
    with pytest.raises(ValueError):
        CorpusSpec("simplex", max_level=3, level=2)


def test_gen_reports_budget_errors(capsys):
    assert main(["gen", "--max-cells", "1", "--max-level", "1", "--trunc-level", "1"]) == 3
    assert "error" in capsys.readouterr().err


# -- suites -----------------------------------------------------------------------

def test_empty_suite_list_passes():
    report, code = run_suite([], SMALL)
    assert code == 0 and report.status == PASS


def test_negative_control_fails_with_a_witness():
    report, code = run_suite(["negative-control"], SMALL)
    assert code == 1
    assert any(c.witness is not None for c in report.walk() if c.status == FAIL)


def test_negative_control_is_not_in_the_default_battery():
    assert "negative-control" not in DEFAULT_BATTERY
    assert set(DEFAULT_BATTERY) | {"negative-control"} == set(SUITES)


def test_unknown_suite_is_rejected():
    with pytest.raises(KeyError):
        run_suite(["bijections", "nonsense"], SMALL)


def test_failure_witness_replays():
    report, _ = run_suite(["negative-control"], SMALL)
    leaf = next(c for c in report.walk() if c.status == FAIL and c.check.startswith("triangles"))
    X = presheaf_from_json(leaf.witness["object"])
    case = string_cases(SMALL)["i_1"]
    assert X.same_as(case.corpus_M[leaf.witness["corpus_index"]])
    bad, at = corrupt_unit(case.string, case.corpus_M)
    assert verify_triangle_identities(bad, [at], case.corpus_N[:1]).status == FAIL


def test_report_json_round_trip():
    report, _ = run_suite(["negative-control", "cubical-L"], SMALL)
    back = AuditReport.from_json(report.to_json())
    assert back.to_dict() == report.to_dict()
    assert back.exit_code() == 1
    assert any(c.status == SKIPPED for c in back.walk())


def test_overrides_ignore_missing_values():
    cfg = with_overrides(SMALL, seed=3, oracle=None)
    assert cfg.seed == 3 and cfg.oracle == SMALL.oracle


# -- command line -----------------------------------------------------------------

def test_audit_suite_command(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["audit", "suite", "cubical-L", "triangulated-representables", "--format", "json", "-o", str(out)]) == 0
    report = AuditReport.from_json(out.read_text())
    assert {c.status for c in report.children} == {PASS, SKIPPED}
    assert main(["report", str(out)]) == 0
    assert "SKIPPED" in capsys.readouterr().out


def test_audit_suite_exit_codes(capsys):
    assert main(["audit", "suite", "negative-control", "--corpus-size", "6"]) == 1
    assert main(["audit", "suite", "nonsense"]) == 3
    assert "unknown suite" in capsys.readouterr().err


def test_audit_string_command(capsys):
    assert main(["audit", "string", "--string", "i_1", "--corpus-size", "4"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_audit_classes_command(capsys):
    assert main(["audit", "classes", "--string", "marked", "--corpus-size", "4"]) == 0
    assert "cubical L preserves monos" in capsys.readouterr().out


def test_triangulate_and_cubify_commands(tmp_path, capsys):
    C1 = build_dedekind_cube_category(1)
    cube = write(tmp_path, "cube.json", presheaf_to_json(yoneda(C1, 1)))
    assert main(["triangulate", cube, "--level", "2"]) == 0
    assert "T(X): sizes [2, 3, 4]" in capsys.readouterr().out
    simp = write(tmp_path, "simp.json", presheaf_to_json(yoneda(build_simplex_category(1), 1)))
    assert main(["cubify", simp, "--cube-level", "1"]) == 0
    assert "C(Y): sizes [2, 3]" in capsys.readouterr().out
    assert main(["cubify", simp, "--cube-level", "2"]) == 3


def test_homology_command_reads_corpora(tmp_path, capsys):
    bd, _ = boundary(build_simplex_category(2), 2)
    path = write(tmp_path, "circle.json", presheaf_to_json(bd))
    assert main(["homology", path, "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["betti"] == [1, 1, 0]
    corpus = tmp_path / "corpus.json"
    main(["gen", "--corpus-size", "2", "--format", "json", "-o", str(corpus)])
    assert main(["homology", str(corpus), "--index", "1"]) == 0
    assert "betti" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(["homology", str(corpus)])


def test_fibrancy_and_lift_commands(tmp_path, capsys):
    D2 = build_simplex_category(2)
    y1 = write(tmp_path, "y1.json", presheaf_to_json(yoneda(D2, 1)))
    assert main(["fibrancy", y1, "--horns", "inner"]) == 0
    assert main(["fibrancy", y1]) == 1
    _, i = boundary(D2, 1)
    left = write(tmp_path, "i.json", map_to_json(i))
    from kanaudit.presheaf import identity_map

    right = write(tmp_path, "id.json", map_to_json(identity_map(yoneda(D2, 1))))
    assert main(["lift", left, right]) == 0
    capsys.readouterr()


def test_kan_command(tmp_path, capsys):
    D1 = build_simplex_category(1)
    path = write(tmp_path, "pt.json", presheaf_to_json(yoneda(D1, 0)))
    assert main(["kan", "lan", path, "--trunc-level", "1"]) == 0
    assert "sizes [1, 1, 1, 1]" in capsys.readouterr().out
    assert main(["kan", "ran", path, "--trunc-level", "1"]) == 0


def test_bad_input_is_a_user_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["homology", str(bad)]) == 3
    assert main(["homology", str(tmp_path / "missing.json")]) == 3
    assert main(["homology", write(tmp_path, "x.json", {"format": "other"})]) == 3
    capsys.readouterr()
