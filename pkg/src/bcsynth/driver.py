"""End-to-end synthesis: degree sweep -> build -> compile -> solve ->
extract -> verify, stopping at the first candidate the verifier accepts.

Solutions of the relaxed encodings are only epsilon-close to certificates,
so when a raw candidate fails verification the sweep retries rationally
rounded variants (increasing denominator bounds); rounding often snaps a
near-certificate onto an exact one, and the verifier alone decides.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

from bcsynth.certificate import Certificate, round_certificate
from bcsynth.compiler import CompileError, compile_program, extract_certificate
from bcsynth.problem import METHODS, SynthesisProblem
from bcsynth.programs import build_program
from bcsynth.sdp.solver import (
    PRIMAL_INFEASIBLE,
    SOLVED_STATUSES,
    SolverConfig,
    solve,
)
from bcsynth.verify import (
    FALSIFIED,
    INCONCLUSIVE,
    VERIFIED,
    SamplingConfig,
    VerificationReport,
    identity_residual,
    sample_falsify,
)

SUCCESS = "success"
NO_CERTIFICATE = "no-certificate-in-range"
SOLVER_FAILURE = "solver-failure"
FALSIFIED_ALL = "falsified-all-candidates"

ROUNDING_BOUNDS = (1, 10, 100, 10**4, 10**6)

# B1/B2 sweeps beyond this degree explode the lifted drift constraint; the
# default search caps there unless the requested range already sits higher.
SEMIALG_DEFAULT_DEGREE_CAP = 4


@dataclass
class DegreeAttempt:
    degree: int
    solver_status: str = ""
    iterations: int = 0
    residual: Optional[float] = None
    verdict: str = ""
    rounded_bound: Optional[int] = None
    build_error: str = ""
    solve_time: float = 0.0
    verify_time: float = 0.0


@dataclass
class SynthesisOutcome:
    status: str
    method: str
    certificate: Optional[Certificate] = None
    report: Optional[VerificationReport] = None
    trace: list[DegreeAttempt] = dc_field(default_factory=list)

    @property
    def degree(self) -> Optional[int]:
        return self.certificate.degree if self.certificate else None


def _degree_range(problem: SynthesisProblem, method: str) -> range:
    lo = problem.options.degree_min
    hi = problem.options.degree_max
    if method == "thm6":
        hi = min(hi, max(lo, SEMIALG_DEFAULT_DEGREE_CAP))
    return range(lo, hi + 1)


def synthesize(problem: SynthesisProblem, method: Optional[str] = None) -> SynthesisOutcome:
    """Sweep degrees for the configured method; first verified wins."""
    if not problem.validated:
        raise ValueError("problem must pass validate_problem before synthesis")
    method = method or problem.options.method
    solver_cfg = problem.options.solver or SolverConfig()
    sampling_cfg = problem.options.sampling or SamplingConfig(seed=problem.options.seed)

    trace: list[DegreeAttempt] = []
    saw_candidate = False
    saw_infeasible = False
    saw_failure = False

    for d in _degree_range(problem, method):
        attempt = DegreeAttempt(degree=d)
        trace.append(attempt)
        t0 = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                program = build_program(problem, d, method)
            instance = compile_program(program)
        except CompileError as exc:
            attempt.solver_status = "compile-skip"
            attempt.build_error = str(exc)
            continue
        solution = solve(instance, solver_cfg)
        attempt.solve_time = time.perf_counter() - t0
        attempt.solver_status = solution.status
        attempt.iterations = solution.iterations
        if solution.status not in SOLVED_STATUSES:
            if solution.status == PRIMAL_INFEASIBLE:
                saw_infeasible = True
            else:
                saw_failure = True
            continue

        saw_candidate = True
        t1 = time.perf_counter()
        residuals = identity_residual(program, instance, solution)
        attempt.residual = max(residuals.values(), default=0.0)
        raw = extract_certificate(program, solution)

        candidates: list[tuple[Optional[int], Certificate]] = [(None, raw)]
        seen = {(raw.kind, tuple(sorted(raw.b.terms.items())),
                 tuple(sorted(raw.b2.terms.items())) if raw.b2 is not None else None)}
        for bound in ROUNDING_BOUNDS:
            rounded = round_certificate(raw, bound)
            key = (rounded.kind, tuple(sorted(rounded.b.terms.items())),
                   tuple(sorted(rounded.b2.terms.items())) if rounded.b2 is not None else None)
            if key in seen:
                continue
            seen.add(key)
            candidates.append((bound, rounded))

        best_report = None
        for bound, cand in candidates:
            report = sample_falsify(problem, cand, sampling_cfg)
            if report.verdict == VERIFIED and attempt.residual > sampling_cfg.residual_tol and bound is None:
                # an identity this loose does not certify the raw candidate
                report.verdict = INCONCLUSIVE
            if bound is None:
                report.identity_residuals = residuals
                best_report = report
            if report.verdict == VERIFIED:
                attempt.verdict = VERIFIED
                attempt.rounded_bound = bound
                attempt.verify_time = time.perf_counter() - t1
                return SynthesisOutcome(
                    status=SUCCESS,
                    method=method,
                    certificate=cand,
                    report=report,
                    trace=trace,
                )
        attempt.verdict = best_report.verdict if best_report else FALSIFIED
        attempt.verify_time = time.perf_counter() - t1

    if saw_candidate:
        status = FALSIFIED_ALL
    elif saw_failure:
        status = SOLVER_FAILURE
    elif saw_infeasible:
        status = NO_CERTIFICATE
    else:
        status = NO_CERTIFICATE
    return SynthesisOutcome(status=status, method=method, trace=trace)


def run_method_comparison(problem: SynthesisProblem) -> dict[str, SynthesisOutcome]:
    """Run the sweep under each encoding with shared options."""
    out: dict[str, SynthesisOutcome] = {}
    for method in METHODS:
        out[method] = synthesize(problem, method)
    return out
