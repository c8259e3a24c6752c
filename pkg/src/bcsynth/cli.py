"""Command-line front end.

Subcommands:

* ``synth <problem.json>``: run the synthesis pipeline, write an outcome JSON.
* ``bench <dir>``: run the three-method comparison over a suite directory.
* ``export-sdpa <problem.json> --degree d``: compile one program and write
  the SDP in SDPA sparse format.
* ``verify <problem.json> --certificate <cert.json>``: verify an externally
  supplied certificate.
* ``plot-data <problem.json> --certificate <cert.json>``: CSV of certificate
  values over a grid (2-D problems), for external plotting.

Exit codes: 0 success/verified, 1 no certificate (or falsified), 2 input
error, 3 internal failure.  Diagnostics go to stderr; artifacts go to stdout
or ``--out``.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from bcsynth.bench import emit_table, load_bench_dir, packaged_instance_dir, pattern_match_rate, run_suite
from bcsynth.compiler import CompileError, compile_program
from bcsynth.driver import SUCCESS, synthesize
from bcsynth.problem import METHODS, ProblemError
from bcsynth.problem_io import (
    ProblemFileError,
    load_certificate,
    load_problem,
    outcome_to_dict,
    report_to_dict,
)
from bcsynth.programs import build_program
from bcsynth.sdp.sdpa import export_sdpa
from bcsynth.verify import VERIFIED, sample_falsify

EXIT_OK = 0
EXIT_NO_CERTIFICATE = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL = 3


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_synth(args) -> int:
    problem = load_problem(args.problem)
    method = args.method or problem.options.method
    outcome = synthesize(problem, method)
    payload = json.dumps(outcome_to_dict(outcome, problem), indent=2) + "\n"
    _emit(payload, args.out)
    if outcome.status == SUCCESS:
        return EXIT_OK
    print(f"synthesis failed: {outcome.status}", file=sys.stderr)
    return EXIT_NO_CERTIFICATE


def _cmd_bench(args) -> int:
    directory = args.directory or packaged_instance_dir()
    instances = load_bench_dir(directory)
    rows = run_suite(instances, include_3d=args.include_3d)
    table = emit_table(rows, args.format, include_times=not args.no_times)
    match, total = pattern_match_rate(rows, instances)
    _emit(table, args.out)
    if total:
        print(
            f"expected-pattern match: {match}/{total} cells "
            f"({100.0 * match / max(total, 1):.0f}%)",
            file=sys.stderr,
        )
    return EXIT_OK


def _cmd_export_sdpa(args) -> int:
    problem = load_problem(args.problem)
    method = args.method or problem.options.method
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        program = build_program(problem, args.degree, method)
    instance = compile_program(program)
    _emit(export_sdpa(instance), args.out)
    summary = instance.summary()
    print(
        f"{method} degree {args.degree}: {summary['rows']} rows, "
        f"blocks {summary['block_sizes']}, {summary['free_vars']} free variables",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_verify(args) -> int:
    problem = load_problem(args.problem)
    cert = load_certificate(args.certificate, problem)
    report = sample_falsify(problem, cert, problem.options.sampling)
    payload = json.dumps(report_to_dict(report), indent=2) + "\n"
    _emit(payload, args.out)
    if report.verdict == VERIFIED:
        return EXIT_OK
    print(f"verification verdict: {report.verdict}", file=sys.stderr)
    return EXIT_NO_CERTIFICATE


def _cmd_plot_data(args) -> int:
    problem = load_problem(args.problem)
    if len(problem.vars) != 2:
        raise ProblemFileError("plot-data requires a 2-D problem")
    cert = load_certificate(args.certificate, problem)
    grid = np.linspace(-args.box, args.box, args.grid)
    lines = ["x1,x2,B"]
    for x2 in grid:
        for x1 in grid:
            value = cert.evaluate((float(x1), float(x2)))
            lines.append(f"{x1!r},{x2!r},{value!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcsynth",
        description="Barrier certificate synthesis over unbounded domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a certificate for a problem file")
    p.add_argument("problem")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench", help="run the benchmark suite")
    p.add_argument("directory", nargs="?", help="instance directory (defaults to packaged suite)")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--include-3d", action="store_true")
    p.add_argument("--no-times", action="store_true", help="omit timing columns (deterministic output)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("export-sdpa", help="compile one program and export SDPA sparse format")
    p.add_argument("problem")
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_export_sdpa)

    p = sub.add_parser("verify", help="verify an externally supplied certificate")
    p.add_argument("problem")
    p.add_argument("--certificate", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("plot-data", help="emit certificate values over a 2-D grid as CSV")
    p.add_argument("problem")
    p.add_argument("--certificate", required=True)
    p.add_argument("--box", type=float, default=10.0)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProblemFileError, ProblemError, CompileError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
