"""Benchmark suite: named problem instances, three-method comparison runs,
and table emission in the style of the experimental-results table.

Instance files are ordinary problem JSON files plus a ``bench`` section:

    "bench": {
      "dim": 2,
      "unbounded": "I,U,X",
      "exclude_from_ci": false,
      "source": "paper-table" | "derived" | "none",
      "note": "re-encoded from ...",
      "expected": {"thm3": {"success": false, "degree": null}, ...},
      "method_degree_max": {"thm6": 3}
    }

Expected patterns record where each encoding is supposed to succeed and at
which minimal degree; rows that disagree are flagged in a trailing deviation
column rather than silently passed, because re-encoded instances are
best-effort transcriptions from cited sources.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Optional

from bcsynth.driver import SUCCESS, SynthesisOutcome, synthesize
from bcsynth.problem import METHODS, SynthesisProblem
from bcsynth.problem_io import ProblemFileError, problem_from_dict

BENCH_KEYS = {"dim", "unbounded", "exclude_from_ci", "source", "note", "expected", "method_degree_max"}
SOURCES = ("paper-table", "derived", "none")


@dataclass(frozen=True)
class ExpectedCell:
    success: Optional[bool] = None
    degree: Optional[int] = None


@dataclass(frozen=True)
class BenchmarkInstance:
    name: str
    problem: SynthesisProblem
    dim: int
    unbounded: str
    source: str
    note: str = ""
    exclude_from_ci: bool = False
    expected: dict[str, ExpectedCell] = dc_field(default_factory=dict)
    method_degree_max: dict[str, int] = dc_field(default_factory=dict)


@dataclass
class MethodResult:
    status: str = ""
    success: bool = False
    degree: Optional[int] = None
    sdp_time: float = 0.0
    verify_time: float = 0.0
    verdict: str = ""


@dataclass
class ResultRow:
    name: str
    dim: int
    unbounded: str
    source: str
    results: dict[str, MethodResult] = dc_field(default_factory=dict)
    deviations: list[str] = dc_field(default_factory=list)
    error: str = ""


def load_bench_file(path: str) -> BenchmarkInstance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: {exc}") from exc
    bench = data.pop("bench", {})
    unknown = set(bench) - BENCH_KEYS
    if unknown:
        raise ProblemFileError(f"{path}: unknown keys in bench section: {sorted(unknown)}")
    problem = problem_from_dict(data)
    source = bench.get("source", "none")
    if source not in SOURCES:
        raise ProblemFileError(f"{path}: unknown expected-pattern source {source!r}")
    expected = {}
    for method, cell in bench.get("expected", {}).items():
        if method not in METHODS:
            raise ProblemFileError(f"{path}: unknown method {method!r} in expected")
        expected[method] = ExpectedCell(cell.get("success"), cell.get("degree"))
    return BenchmarkInstance(
        name=problem.name or os.path.splitext(os.path.basename(path))[0],
        problem=problem,
        dim=len(problem.vars),
        unbounded=bench.get("unbounded", ""),
        source=source,
        note=bench.get("note", ""),
        exclude_from_ci=bool(bench.get("exclude_from_ci", False)),
        expected=expected,
        method_degree_max={
            m: int(v) for m, v in bench.get("method_degree_max", {}).items()
        },
    )


def load_bench_dir(path: str) -> list[BenchmarkInstance]:
    names = sorted(n for n in os.listdir(path) if n.endswith(".json"))
    return [load_bench_file(os.path.join(path, n)) for n in names]


def packaged_instance_dir() -> str:
    return os.path.join(os.path.dirname(__file__), "bench_instances", "v1")


def _run_instance(inst: BenchmarkInstance) -> ResultRow:
    row = ResultRow(inst.name, inst.dim, inst.unbounded, inst.source)
    for method in METHODS:
        problem = inst.problem
        cap = inst.method_degree_max.get(method)
        if cap is not None:
            opts = replace(problem.options, degree_max=min(problem.options.degree_max, cap))
            problem = replace(problem, options=opts)
        try:
            outcome = synthesize(problem, method)
        except Exception as exc:  # isolate per-instance failures into the row
            row.results[method] = MethodResult(status="error", verdict=str(exc)[:120])
            row.error = f"{method}: {exc}"
            continue
        res = MethodResult(
            status=outcome.status,
            success=outcome.status == SUCCESS,
            degree=outcome.degree,
            sdp_time=sum(a.solve_time for a in outcome.trace),
            verify_time=sum(a.verify_time for a in outcome.trace),
            verdict=outcome.report.verdict if outcome.report else "",
        )
        row.results[method] = res
        cell = inst.expected.get(method)
        if cell is not None:
            if cell.success is not None and cell.success != res.success:
                row.deviations.append(
                    f"{method}: expected {'success' if cell.success else 'failure'}, got {res.status}"
                )
            elif cell.success and res.success and cell.degree is not None and cell.degree != res.degree:
                row.deviations.append(
                    f"{method}: expected degree {cell.degree}, got {res.degree}"
                )
    return row


def run_suite(instances: list[BenchmarkInstance], include_3d: bool = False) -> list[ResultRow]:
    """Run the comparison on every instance, in declaration order."""
    rows = []
    for inst in instances:
        if inst.exclude_from_ci and not include_3d:
            continue
        rows.append(_run_instance(inst))
    return rows


def _fmt_time(t: float) -> str:
    return f"{t:.2f}"


def emit_table(rows: list[ResultRow], fmt: str = "markdown", include_times: bool = True) -> str:
    """Render result rows; stable column order mirroring the comparison table."""
    if fmt not in ("markdown", "csv"):
        raise ValueError(f"unknown table format {fmt!r}")
    header = ["instance", "dim", "unbounded"]
    for m in METHODS:
        header += [f"{m}_deg", f"{m}_succ"]
        if include_times:
            header += [f"{m}_sdp_time", f"{m}_verify_time"]
    header.append("deviation")

    body = []
    for row in rows:
        cells = [row.name, str(row.dim), row.unbounded]
        for m in METHODS:
            r = row.results.get(m, MethodResult())
            cells.append("" if r.degree is None else str(r.degree))
            cells.append("yes" if r.success else "no")
            if include_times:
                cells += [_fmt_time(r.sdp_time), _fmt_time(r.verify_time)]
        cells.append("; ".join(row.deviations) if row.deviations else "")
        body.append(cells)

    if fmt == "csv":
        import csv
        import io

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buf.getvalue()

    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(header)]
    def mk(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    lines = [mk(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [mk(r) for r in body]
    return "\n".join(lines) + "\n"


def pattern_match_rate(rows: list[ResultRow], instances: list[BenchmarkInstance]) -> tuple[int, int]:
    """(matching cells, total cells) over success flags with paper-table source."""
    by_name = {i.name: i for i in instances}
    match = total = 0
    for row in rows:
        inst = by_name.get(row.name)
        if inst is None or inst.source != "paper-table":
            continue
        for m in METHODS:
            cell = inst.expected.get(m)
            if cell is None or cell.success is None or m not in row.results:
                continue
            total += 1
            if cell.success == row.results[m].success:
                match += 1
    return match, total
