"""Command line: corpus generation, audits, and single-object computations.

All files are versioned JSON (presheaf, map, corpus, report). Audit commands
exit 0 when every check passes, 1 on any FAIL, 2 when nothing failed but
some check was inconclusive; skipped checks are listed and never count.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from .corpus import BASES, Corpus, CorpusBudgetError, CorpusSpec, gen_corpus
from .report import AuditReport, aggregate
from .suites import DEFAULT_BATTERY, SUITES, SuiteConfig, run_suite

__all__ = ["main", "build_parser", "gen_corpus", "run_suite", "CorpusSpec", "SuiteConfig"]

STRINGS = ("i_1", "k", "marked", "T|C")


def _load(path: str) -> dict:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    return json.loads(text)


def _load_presheaf(path: str, index: int | None):
    from .presheaf import presheaf_from_json

    obj = _load(path)
    if obj.get("format") == "kanaudit.corpus/1":
        if index is None:
            raise SystemExit("input is a corpus; pass --index to pick an object")
        obj = obj["objects"][index]
    return presheaf_from_json(obj)


def _load_map(path: str, index: int | None):
    from .presheaf import map_from_json

    obj = _load(path)
    if obj.get("format") == "kanaudit.corpus/1":
        if index is None:
            raise SystemExit("input is a corpus; pass --index to pick a mono")
        obj = obj["monos"][index]
    return map_from_json(obj)


def _emit(args, payload: Any, text: str) -> None:
    out = json.dumps(payload, sort_keys=True) if args.format == "json" else text
    if getattr(args, "output", None):
        Path(args.output).write_text(out + "\n")
    else:
        print(out)


def _emit_report(args, report: AuditReport) -> int:
    out = report.to_json(sort_keys=True) if args.format == "json" else report.to_text()
    if getattr(args, "output", None):
        Path(args.output).write_text(out + "\n")
    else:
        print(out)
    return report.exit_code()


def _config(args) -> SuiteConfig:
    return SuiteConfig(
        seed=args.seed, corpus_size=args.corpus_size, trunc_level=args.trunc_level, cube_level=args.cube_level,
        oracle=args.oracle, search_bound=args.search_bound, jobs=getattr(args, "jobs", 1),
    )


# -- commands -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    spec = CorpusSpec(args.base, args.corpus_size, args.max_cells, args.max_level, args.seed, args.trunc_level)
    try:
        corpus = gen_corpus(spec)
    except CorpusBudgetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    lines = [f"{len(corpus.objects)} objects over {args.base}"]
    lines += [f"  {i}: sizes {list(X.sizes)} dimension {X.dimension()}" for i, X in enumerate(corpus.objects)]
    _emit(args, corpus.to_json(), "\n".join(lines))
    return 0


def cmd_audit_suite(args) -> int:
    names = args.suites or list(DEFAULT_BATTERY)
    try:
        report, code = run_suite(names, _config(args))
    except KeyError as e:
        print(f"error: {e.args[0]}", file=sys.stderr)
        return 3
    _emit_report(args, report)
    return code


def cmd_audit_string(args) -> int:
    from .adjstring import (
        CofibrantReplacement, check_fully_faithful_string, check_homotopy_idempotent, check_idempotent,
        verify_bijections, verify_triangle_identities,
    )
    from .suites import string_cases
    from .weqoracle import make_oracle

    case = string_cases(_config(args))[args.string]
    s, M, N = case.string, case.corpus_M, case.corpus_N
    children = [
        verify_bijections(s, list(zip(M, N)), list(zip(N, M))),
        verify_triangle_identities(s, M, N),
        check_fully_faithful_string(s, M, expect=case.fully_faithful),
    ]
    if case.fully_faithful:
        children.append(check_idempotent(s, N))
        children.append(check_homotopy_idempotent(s, CofibrantReplacement(), make_oracle(args.oracle, args.search_bound), N))
    report = aggregate(f"string {s.name}", children, seed=args.seed, corpus_size=args.corpus_size)
    report.seed = args.seed
    return _emit_report(args, report)


def cmd_audit_classes(args) -> int:
    from .suites import suite_classes

    cfg = SuiteConfig(seed=args.seed, corpus_size=args.corpus_size, bisimplicial_level=args.level, cube_level=args.cube_level)
    report = suite_classes(cfg, args.string)
    report.seed = args.seed
    return _emit_report(args, report)


def cmd_triangulate(args) -> int:
    from .cubes import triangulate
    from .presheaf import presheaf_to_json

    X = _load_presheaf(_input_path(args), args.index)
    TX = triangulate(X, args.trunc_level)
    _emit(args, presheaf_to_json(TX), f"T(X): sizes {list(TX.sizes)}, nondegenerate {[len(TX.nondegenerate(c)) for c in range(TX.base.num_objects)]}")
    return 0


def cmd_cubify(args) -> int:
    from .cubes import ExactnessError, cubify
    from .presheaf import presheaf_to_json

    Y = _load_presheaf(_input_path(args), args.index)
    try:
        CY = cubify(Y, args.cube_level)
    except ExactnessError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    _emit(args, presheaf_to_json(CY), f"C(Y): sizes {list(CY.sizes)}")
    return 0


def cmd_lift(args) -> int:
    from .lifting import unfilled_squares
    from .presheaf import map_to_json

    left, right = args.left_flag or args.left_pos, args.right_flag or args.right_pos
    if left is None or right is None:
        raise SystemExit("lift needs a left and a right map")
    i = _load_map(left, args.left_index)
    p = _load_map(right, args.right_index)
    report = AuditReport("left lifting property", params={"left": i.source.name, "right": p.source.name})
    for sq in unfilled_squares(i, p):
        report.fail("square without a diagonal filler", {"top": map_to_json(sq.top), "bottom": map_to_json(sq.bottom)})
        break
    return _emit_report(args, report)


def cmd_fibrancy(args) -> int:
    from .lifting import detect_fibrancy, gen_horns

    X = _load_presheaf(_input_path(args), args.index)
    inner = args.inner or args.horns == "inner"
    gens = gen_horns(max(X.base.rank), inner_only=inner, base=X.base)
    label = "quasi-category" if inner else "Kan complex"
    return _emit_report(args, detect_fibrancy(X, gens, args.trunc_level, label))


def cmd_homology(args) -> int:
    from .weqoracle import homology

    X = _load_presheaf(_input_path(args), args.index)
    h = homology(X)
    _emit(args, h.to_dict(), f"betti {list(h.betti)} torsion {[list(t) for t in h.torsion]} euler {h.euler_from_homology()}")
    return 0


def cmd_kan(args) -> int:
    from .fincat import build_box_prime_category, build_i1
    from .kan import KanString
    from .presheaf import presheaf_to_json

    if args.functor == "i_1":
        f = build_i1(args.trunc_level)
    elif args.functor == "k":
        f = build_box_prime_category(args.cube_level)[1]
    else:
        from .fincat import functor_from_json

        f = functor_from_json(_load(args.functor))
    ks = KanString(f)
    X = _load_presheaf(_input_path(args), args.index)
    fn = {"lan": ks.lan, "ran": ks.ran, "restrict": ks.restrict}[args.op]
    out = fn(X)
    _emit(args, presheaf_to_json(out), f"{args.op} along {f.name}: sizes {list(out.sizes)}")
    return 0


def cmd_report(args) -> int:
    report = AuditReport.from_json(Path(args.input).read_text())
    return _emit_report(args, report)


# -- parser ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corpus-size", type=int, default=30)
    p.add_argument("--trunc-level", type=int, default=2, help="simplicial truncation level N")
    p.add_argument("--cube-level", type=int, default=2, help="cubical truncation level K")
    p.add_argument("--oracle", default="chain", choices=["iso", "homology", "homotopy-search", "chain"])
    p.add_argument("--search-bound", type=int, default=64)
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.add_argument("-o", "--output", help="write to this file instead of stdout")


def _input(p: argparse.ArgumentParser, *flags: str) -> None:
    p.add_argument("input", nargs="?", help="presheaf or corpus JSON ('-' for stdin)")
    p.add_argument("--presheaf", *flags, dest="input_flag", help="same as the positional input")
    p.add_argument("--index", type=int, help="object index when the input is a corpus")


def _input_path(args) -> str:
    path = args.input_flag or args.input
    if path is None:
        raise SystemExit("no input file given")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kanaudit", description="Audits for adjoint strings of presheaf categories.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded corpus")
    _common(p)
    p.add_argument("--base", default="simplex", choices=BASES)
    p.add_argument("--max-cells", type=int, default=25)
    p.add_argument("--max-level", type=int, default=2)
    p.set_defaults(func=cmd_gen)

    audit = sub.add_parser("audit", help="run audits").add_subparsers(dest="what", required=True)
    p = audit.add_parser("suite", help="named suites (default: the full battery)")
    _common(p)
    p.add_argument("suites", nargs="*", help=f"any of: {', '.join(SUITES)}")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_audit_suite)
    p = audit.add_parser("string", help="adjunction, triangle and idempotency audits of one string")
    _common(p)
    p.add_argument("--string", required=True, choices=STRINGS)
    p.set_defaults(func=cmd_audit_string)
    p = audit.add_parser("classes", help="induced cofibrations and fibration comparisons")
    _common(p)
    p.add_argument("--level", type=int, default=1)
    p.add_argument("--string", default="all", choices=["all", "marked", "bisimplicial"])
    p.set_defaults(func=cmd_audit_classes)

    for name, func, help_, flags in (
        ("triangulate", cmd_triangulate, "triangulate a cubical set", ("--cubical",)),
        ("cubify", cmd_cubify, "cubical nerve of a simplicial set", ("--simplicial",)),
        ("homology", cmd_homology, "integral homology of a simplicial set", ()),
    ):
        p = sub.add_parser(name, help=help_)
        _common(p)
        _input(p, *flags)
        if name == "triangulate":
            p.add_argument("--level", dest="trunc_level", type=int, default=argparse.SUPPRESS, help="alias of --trunc-level")
        p.set_defaults(func=func)

    p = sub.add_parser("fibrancy", help="horn extension up to the truncation level")
    _common(p)
    _input(p)
    p.add_argument("--inner", action="store_true", help="inner horns only (quasi-category test)")
    p.add_argument("--horns", choices=["inner", "all"], help="inner horns (quasi-category) or all horns (Kan)")
    p.add_argument("--level", dest="trunc_level", type=int, default=argparse.SUPPRESS, help="alias of --trunc-level")
    p.set_defaults(func=cmd_fibrancy)

    p = sub.add_parser("lift", help="does LEFT have the left lifting property against RIGHT?")
    _common(p)
    p.add_argument("left_pos", nargs="?", metavar="left")
    p.add_argument("right_pos", nargs="?", metavar="right")
    p.add_argument("--left", dest="left_flag")
    p.add_argument("--right", dest="right_flag")
    p.add_argument("--left-index", type=int)
    p.add_argument("--right-index", type=int)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("kan", help="Kan extensions and restriction along i_1 or k")
    _common(p)
    p.add_argument("op", choices=["lan", "ran", "restrict"])
    _input(p)
    p.add_argument("--functor", default="i_1", help="i_1, k, or a functor JSON file")
    p.set_defaults(func=cmd_kan)

    p = sub.add_parser("report", help="re-render a saved report")
    p.add_argument("input")
    p.add_argument("--format", default="text", choices=["text", "json"])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
