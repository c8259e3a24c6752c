"""JSON problem files (schema 1) and outcome serialization.

A problem file declares variables, the vector field, the three sets as
polynomial strings under the grammar in ``parsing``, closed-at-infinity
assertions, and options.  Unknown keys are rejected everywhere so typos fail
loudly instead of silently changing semantics.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from typing import Optional

from bcsynth.certificate import Certificate, POLYNOMIAL, SEMIALGEBRAIC
from bcsynth.driver import SynthesisOutcome
from bcsynth.parsing import format_polynomial, parse_polynomial
from bcsynth.poly import Polynomial, VectorField
from bcsynth.problem import (
    ProblemError,
    SemialgebraicSet,
    SynthesisOptions,
    SynthesisProblem,
    validate_problem,
)
from bcsynth.sdp.solver import SolverConfig
from bcsynth.verify import SamplingConfig, VerificationReport

SCHEMA_VERSION = 1


class ProblemFileError(ValueError):
    """Malformed problem or certificate file."""


def _require_keys(obj: dict, allowed: set[str], context: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ProblemFileError(f"unknown keys in {context}: {sorted(unknown)}")


def _parse_set(obj: Optional[dict], variables, context: str, closed: bool) -> SemialgebraicSet:
    if obj is None:
        return SemialgebraicSet((), (), closed)
    if not isinstance(obj, dict):
        raise ProblemFileError(f"{context} must be an object with 'ineqs'/'eqs'")
    _require_keys(obj, {"ineqs", "eqs"}, context)
    try:
        ineqs = tuple(parse_polynomial(s, variables) for s in obj.get("ineqs", []))
        eqs = tuple(parse_polynomial(s, variables) for s in obj.get("eqs", []))
    except ValueError as exc:
        raise ProblemFileError(f"in {context}: {exc}") from exc
    return SemialgebraicSet(ineqs, eqs, closed)


_OPTION_KEYS = {
    "lambda",
    "eps_e",
    "eps",
    "eps_placement",
    "method",
    "degree",
    "seed",
    "solver",
    "sampling",
}

_SOLVER_KEYS = {"feas_tol", "gap_tol", "max_iter", "step_fraction", "infeas_tol", "min_step"}
_SAMPLING_KEYS = {
    "samples",
    "box_radius",
    "sphere_floor",
    "tol",
    "residual_tol",
    "seed",
    "boundary_mag_low",
    "boundary_mag_high",
}


def _parse_options(obj: Optional[dict]) -> SynthesisOptions:
    if obj is None:
        return SynthesisOptions()
    _require_keys(obj, _OPTION_KEYS, "options")
    degree = obj.get("degree", [1, 6])
    if not (isinstance(degree, list) and len(degree) == 2):
        raise ProblemFileError("options.degree must be [min, max]")
    solver = None
    if "solver" in obj:
        _require_keys(obj["solver"], _SOLVER_KEYS, "options.solver")
        solver = SolverConfig(**obj["solver"])
    sampling = None
    if "sampling" in obj:
        _require_keys(obj["sampling"], _SAMPLING_KEYS, "options.sampling")
        sampling = SamplingConfig(**obj["sampling"])
    seed = int(obj.get("seed", 0))
    if sampling is None and seed:
        sampling = SamplingConfig(seed=seed)
    return SynthesisOptions(
        lam=float(obj.get("lambda", -1.0)),
        eps_e=float(obj.get("eps_e", 1e-5)),
        eps=float(obj.get("eps", 0.0)),
        eps_placement=obj.get("eps_placement", "homogeneous"),
        degree_min=int(degree[0]),
        degree_max=int(degree[1]),
        method=obj.get("method", "thm3"),
        seed=seed,
        solver=solver,
        sampling=sampling,
    )


_TOP_KEYS = {
    "schema",
    "name",
    "variables",
    "field",
    "domain",
    "init",
    "unsafe",
    "closed_at_infinity",
    "options",
    # benchmark metadata (expected patterns etc.); parsed by bench, ignored here
    "bench",
}


def problem_from_dict(data: dict) -> SynthesisProblem:
    if not isinstance(data, dict):
        raise ProblemFileError("problem file must contain a JSON object")
    _require_keys(data, _TOP_KEYS, "problem file")
    schema = data.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ProblemFileError(f"unsupported schema version {schema!r}")
    variables = data.get("variables")
    if not variables or not isinstance(variables, list):
        raise ProblemFileError("'variables' must be a nonempty list of names")
    variables = tuple(str(v) for v in variables)
    field_strs = data.get("field")
    if not isinstance(field_strs, list) or len(field_strs) != len(variables):
        raise ProblemFileError(
            f"'field' must list one polynomial per variable ({len(variables)} expected)"
        )
    try:
        components = [parse_polynomial(s, variables) for s in field_strs]
    except ValueError as exc:
        raise ProblemFileError(f"in field: {exc}") from exc

    closed = data.get("closed_at_infinity", {})
    if closed:
        _require_keys(closed, {"domain", "init", "unsafe"}, "closed_at_infinity")
    problem = SynthesisProblem(
        field=VectorField(variables, components),
        domain=_parse_set(data.get("domain"), variables, "domain", bool(closed.get("domain", False))),
        init=_parse_set(data.get("init"), variables, "init", bool(closed.get("init", False))),
        unsafe=_parse_set(data.get("unsafe"), variables, "unsafe", bool(closed.get("unsafe", False))),
        options=_parse_options(data.get("options")),
        name=str(data.get("name", "")),
    )
    try:
        return validate_problem(problem)
    except ProblemError as exc:
        raise ProblemFileError(str(exc)) from exc


def load_problem(path: str) -> SynthesisProblem:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: {exc}") from exc
    try:
        return problem_from_dict(data)
    except ProblemFileError as exc:
        raise ProblemFileError(f"{path}: {exc}") from exc


# -- certificates -----------------------------------------------------------


def certificate_to_dict(cert: Certificate) -> dict:
    out = {
        "kind": cert.kind,
        "method": cert.method,
        "degree": cert.degree,
        "lambda": cert.lam,
        "eps_e": cert.eps_e,
    }
    if cert.kind == SEMIALGEBRAIC:
        out["b1"] = format_polynomial(cert.b)
        out["b2"] = format_polynomial(cert.b2)
    else:
        out["b"] = format_polynomial(cert.b)
    if cert.rounding:
        out["rounding"] = dict(cert.rounding)
    return out


_CERT_KEYS = {"kind", "b", "b1", "b2", "method", "degree", "lambda", "eps_e", "rounding"}


def certificate_from_dict(data: dict, problem: SynthesisProblem) -> Certificate:
    if not isinstance(data, dict):
        raise ProblemFileError("certificate file must contain a JSON object")
    _require_keys(data, _CERT_KEYS, "certificate")
    kind = data.get("kind", POLYNOMIAL)
    opts = problem.options
    lam = float(data.get("lambda", opts.lam))
    eps_e = float(data.get("eps_e", opts.eps_e))
    try:
        if kind == SEMIALGEBRAIC:
            b = parse_polynomial(data["b1"], problem.vars)
            b2 = parse_polynomial(data["b2"], problem.vars)
            return Certificate(kind, b, b2, data.get("method", ""), int(data.get("degree", 0)), lam, eps_e)
        key = "b" if "b" in data else "b1"
        b = parse_polynomial(data[key], problem.vars)
        return Certificate(POLYNOMIAL, b, None, data.get("method", ""), int(data.get("degree", 0)), lam, eps_e)
    except KeyError as exc:
        raise ProblemFileError(f"certificate file missing key {exc}") from exc
    except ValueError as exc:
        raise ProblemFileError(f"in certificate: {exc}") from exc


def load_certificate(path: str, problem: SynthesisProblem) -> Certificate:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFileError(f"{path}: {exc}") from exc
    return certificate_from_dict(data, problem)


# -- outcomes ----------------------------------------------------------------


def report_to_dict(report: Optional[VerificationReport]) -> Optional[dict]:
    if report is None:
        return None
    return {
        "verdict": report.verdict,
        "samples_per_condition": report.samples_per_condition,
        "identity_residuals": report.identity_residuals,
        "conditions": [
            {
                "name": c.name,
                "accepted": c.accepted,
                "worst_slack": None if c.witness is None else c.worst_slack,
                "falsified": c.falsified,
                "witness": list(c.witness) if c.witness is not None else None,
                "strategy": c.witness_strategy,
            }
            for c in report.conditions
        ],
    }


def outcome_to_dict(outcome: SynthesisOutcome, problem: SynthesisProblem) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "problem": problem.name,
        "status": outcome.status,
        "method": outcome.method,
        "degree": outcome.degree,
        "certificate": certificate_to_dict(outcome.certificate) if outcome.certificate else None,
        "verification": report_to_dict(outcome.report),
        "trace": [
            {
                "degree": a.degree,
                "solver_status": a.solver_status,
                "iterations": a.iterations,
                "identity_residual": a.residual,
                "verdict": a.verdict,
                "rounded_denominator_bound": a.rounded_bound,
                "build_error": a.build_error,
                "solve_time": a.solve_time,
                "verify_time": a.verify_time,
            }
            for a in outcome.trace
        ],
    }
