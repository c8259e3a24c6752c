"""Synthesis problems and the compactification of unbounded sets.

A problem bundles a polynomial vector field, three closed basic semialgebraic
sets (domain / initial / unsafe) and solver options.  Unbounded sets are
handled by lifting points onto the unit sphere one dimension up:

    x  ->  (1, x) / sqrt(1 + |x|^2)

which maps a set K bijectively onto the positive-cap part of its homogenized
counterpart.  ``homogenize_set`` builds that counterpart: each generator is
homogenized to its own degree, the generator x0 >= 0 is added, and the sphere
equality |x|^2 + x0^2 - 1 = 0 pins everything to the unit sphere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from bcsynth.poly import Polynomial, VectorField

METHODS = ("thm3", "thm5", "thm6")

MEMBERSHIP_GUARD = 1e-12  # float slack when deciding closed-set membership
EQUALITY_TOL = 1e-9


class ProblemError(ValueError):
    """Raised when a synthesis problem is structurally invalid."""


@dataclass(frozen=True)
class SemialgebraicSet:
    """Closed basic semialgebraic set {g >= 0 for g in ineqs, h = 0 for h in eqs}."""

    ineqs: tuple[Polynomial, ...] = ()
    eqs: tuple[Polynomial, ...] = ()
    closed_at_infinity: bool = False

    def generators(self) -> tuple[Polynomial, ...]:
        return self.ineqs + self.eqs

    def contains(self, point, guard: float = MEMBERSHIP_GUARD) -> bool:
        for g in self.ineqs:
            if float(g.evaluate(point)) < -guard:
                return False
        for h in self.eqs:
            if abs(float(h.evaluate(point))) > EQUALITY_TOL:
                return False
        return True

    def contains_batch(self, points, guard: float = MEMBERSHIP_GUARD):
        """Vectorized membership mask for an (N, n) array of points."""
        pts = np.asarray(points, dtype=float)
        mask = np.ones(pts.shape[0], dtype=bool)
        for g in self.ineqs:
            mask &= g.evaluate_batch(pts) >= -guard
        for h in self.eqs:
            mask &= np.abs(h.evaluate_batch(pts)) <= EQUALITY_TOL
        return mask

    def align_to(self, variables: Sequence[str]) -> "SemialgebraicSet":
        return SemialgebraicSet(
            tuple(g.align_to(variables) for g in self.ineqs),
            tuple(h.align_to(variables) for h in self.eqs),
            self.closed_at_infinity,
        )


@dataclass(frozen=True)
class HomogenizedSet:
    """Compactified set on the unit (x, x0)-sphere.

    ``ineqs`` always contains x0 as its last entry; ``eqs`` always contains
    the sphere equality as its last entry.  All other generators are
    homogeneous.
    """

    vars: tuple[str, ...]  # original variables followed by x0
    x0: str
    ineqs: tuple[Polynomial, ...]
    eqs: tuple[Polynomial, ...]

    def generators(self) -> tuple[Polynomial, ...]:
        return self.ineqs + self.eqs

    def contains_lifted(self, y, guard: float = MEMBERSHIP_GUARD) -> bool:
        """Membership of a lifted point given in Lemma-style order (x0 first)."""
        point = {self.x0: y[0]}
        for name, val in zip(self.vars[:-1], y[1:]):
            point[name] = val
        for g in self.ineqs:
            if float(g.evaluate(point)) < -guard:
                return False
        for h in self.eqs:
            if abs(float(h.evaluate(point))) > EQUALITY_TOL:
                return False
        return True


def fresh_var(base: str, taken: Sequence[str]) -> str:
    name = base
    while name in taken:
        name = "_" + name
    return name


def lift_point(x) -> np.ndarray:
    """Map x in R^n to the unit sphere in R^(n+1): (1, x) / sqrt(1 + |x|^2).

    The x0 coordinate comes first and is always in (0, 1].
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("lift_point requires finite coordinates")
    scale = 1.0 / math.sqrt(1.0 + float(np.dot(x, x)))
    return np.concatenate(([scale], scale * x))


def project_point(y) -> np.ndarray:
    """Inverse of lift_point: (x0, x) on the sphere with x0 > 0 maps to x / x0."""
    y = np.asarray(y, dtype=float)
    if y[0] <= 0.0:
        raise ValueError("point at infinity (x0 <= 0) is not projectable")
    norm = float(np.linalg.norm(y))
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"expected a unit-sphere point, got norm {norm}")
    y = y / norm
    return y[1:] / y[0]


def homogenize_set(s: SemialgebraicSet, x0: str = "x0", variables: Optional[Sequence[str]] = None) -> HomogenizedSet:
    """Compactify a set: homogenize each generator, add x0 >= 0 and the sphere."""
    if variables is None:
        vs: tuple[str, ...] = ()
        for g in s.generators():
            vs = Polynomial.union_vars(vs, g.vars)
    else:
        vs = tuple(variables)
    x0 = fresh_var(x0, vs)
    hvars = vs + (x0,)

    def homog(g: Polynomial) -> Polynomial:
        g = g.align_to(vs)
        d = g.total_degree()
        return g.homogenize(x0, int(d) if g.terms else 0)

    ineqs = tuple(homog(g) for g in s.ineqs)
    eqs = tuple(homog(h) for h in s.eqs)

    x0_poly = Polynomial.variable(hvars, x0)
    sphere = Polynomial(
        hvars,
        {tuple(2 if i == j else 0 for i in range(len(hvars))): Fraction(1) for j in range(len(hvars))},
    ) - 1
    return HomogenizedSet(hvars, x0, ineqs + (x0_poly,), eqs + (sphere,))


@dataclass(frozen=True)
class SynthesisOptions:
    lam: float = -1.0
    eps_e: float = 1e-5
    eps: float = 0.0
    degree_min: int = 1
    degree_max: int = 6
    method: str = "thm3"
    seed: int = 0
    # How the completeness slack eps enters the compactified encodings:
    # "homogeneous" multiplies eps by the x0 power that keeps the identity
    # degree-consistent; "constant" adds it verbatim.  The two differ on the
    # x0 = 0 boundary: the homogeneous form vanishes there, so only the
    # constant form preserves a strict-positivity margin at infinity.
    # Irrelevant when eps = 0.
    eps_placement: str = "homogeneous"
    solver: Optional[object] = None  # SolverConfig; resolved lazily by the driver
    sampling: Optional[object] = None  # SamplingConfig

    def validated(self) -> "SynthesisOptions":
        if not self.eps_e > 0:
            raise ProblemError(f"eps_e must be positive, got {self.eps_e}")
        if self.eps < 0:
            raise ProblemError(f"eps must be nonnegative, got {self.eps}")
        if self.degree_min < 1:
            raise ProblemError(f"degree_min must be >= 1, got {self.degree_min}")
        if self.degree_min > self.degree_max:
            raise ProblemError(
                f"degree range [{self.degree_min}, {self.degree_max}] is empty"
            )
        if self.method not in METHODS:
            raise ProblemError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.eps_placement not in ("homogeneous", "constant"):
            raise ProblemError(
                f"unknown eps_placement {self.eps_placement!r}, "
                "expected 'homogeneous' or 'constant'"
            )
        return self


@dataclass(frozen=True)
class SynthesisProblem:
    field: VectorField
    domain: SemialgebraicSet
    init: SemialgebraicSet
    unsafe: SemialgebraicSet
    options: SynthesisOptions = dc_field(default_factory=SynthesisOptions)
    name: str = ""
    validated: bool = False

    @property
    def vars(self) -> tuple[str, ...]:
        return self.field.vars


def validate_problem(raw: SynthesisProblem) -> SynthesisProblem:
    """Dimension-check a problem and conjoin domain generators into init/unsafe.

    The initial and unsafe sets are defined relative to the domain, so the
    domain's generators are appended to both generator lists here rather than
    trusting the input to repeat them.
    """
    vs = raw.field.vars
    if not vs:
        raise ProblemError("empty variable list")
    raw.options.validated()

    def embed(g: Polynomial, label: str) -> Polynomial:
        idx = [vs.index(v) if v in vs else None for v in g.vars]
        terms = {}
        for expo, c in g.terms.items():
            new = [0] * len(vs)
            for pos, e, v in zip(idx, expo, g.vars):
                if e == 0:
                    continue
                if pos is None:
                    raise ProblemError(f"{label} generator uses unknown variable {v!r}")
                new[pos] = e
            terms[tuple(new)] = c
        return Polynomial(vs, terms)

    def check_vars(s: SemialgebraicSet, label: str) -> SemialgebraicSet:
        return SemialgebraicSet(
            tuple(embed(g, label) for g in s.ineqs),
            tuple(embed(h, label) for h in s.eqs),
            s.closed_at_infinity,
        )

    domain = check_vars(raw.domain, "domain")
    init = check_vars(raw.init, "init")
    unsafe = check_vars(raw.unsafe, "unsafe")

    init = SemialgebraicSet(
        init.ineqs + domain.ineqs, init.eqs + domain.eqs, init.closed_at_infinity
    )
    unsafe = SemialgebraicSet(
        unsafe.ineqs + domain.ineqs, unsafe.eqs + domain.eqs, unsafe.closed_at_infinity
    )
    return replace(raw, domain=domain, init=init, unsafe=unsafe, validated=True)


def warn_if_not_closed_at_infinity(problem: SynthesisProblem) -> None:
    """The compactified encodings assume sets are closed at infinity.

    Whether a set is closed at infinity can depend on the chosen generators
    and is not checked algorithmically here; the flag records a user
    assertion.
    """
    unset = [
        label
        for label, s in (
            ("init", problem.init),
            ("unsafe", problem.unsafe),
            ("domain", problem.domain),
        )
        if not s.closed_at_infinity
    ]
    if unset:
        warnings.warn(
            "closed-at-infinity not asserted for: "
            + ", ".join(unset)
            + "; the compactified encodings are only known to be complete "
            "when every set is closed at infinity",
            stacklevel=3,
        )
