"""Barrier certificate synthesis over unbounded domains via SOS programming."""

from bcsynth.poly import NEG_INF, Polynomial, VectorField, lie_derivative
from bcsynth.problem import (
    SemialgebraicSet,
    SynthesisOptions,
    SynthesisProblem,
    homogenize_set,
    lift_point,
    project_point,
    validate_problem,
)

__version__ = "0.1.0"

__all__ = [
    "NEG_INF",
    "Polynomial",
    "VectorField",
    "lie_derivative",
    "SemialgebraicSet",
    "SynthesisOptions",
    "SynthesisProblem",
    "homogenize_set",
    "lift_point",
    "project_point",
    "validate_problem",
    "__version__",
]
