"""Synthesized certificates and coefficient rounding."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from bcsynth.poly import Polynomial

POLYNOMIAL = "polynomial"
SEMIALGEBRAIC = "semialgebraic"


@dataclass(frozen=True)
class Certificate:
    """A barrier certificate candidate.

    kind "polynomial": the function is b.  kind "semialgebraic": the function
    is b + sqrt(|x|^2 + 1) * b2.
    """

    kind: str
    b: Polynomial
    b2: Optional[Polynomial] = None
    method: str = ""
    degree: int = 0
    lam: float = -1.0
    eps_e: float = 1e-5
    rounding: Optional[dict] = None

    def __post_init__(self):
        if self.kind not in (POLYNOMIAL, SEMIALGEBRAIC):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if self.kind == SEMIALGEBRAIC and self.b2 is None:
            raise ValueError("semialgebraic certificate requires b2")

    @property
    def vars(self) -> tuple[str, ...]:
        return self.b.vars

    def evaluate(self, point) -> float:
        value = float(self.b.evaluate(point))
        if self.kind == SEMIALGEBRAIC:
            sq = sum(float(v) ** 2 for v in point)
            value += math.sqrt(sq + 1.0) * float(self.b2.evaluate(point))
        return value


def _round_poly(p: Polynomial, bound: int) -> tuple[Polynomial, float]:
    terms = {}
    dist = 0.0
    for expo, c in p.terms.items():
        r = Fraction(c).limit_denominator(bound)
        dist = max(dist, abs(float(Fraction(c) - r)))
        terms[expo] = r
    return Polynomial(p.vars, terms), dist


def round_certificate(cert: Certificate, denominator_bound: int) -> Certificate:
    """Round every coefficient to its best rational with bounded denominator.

    ``limit_denominator`` walks the continued-fraction convergents, so each
    coefficient becomes the best approximation available under the bound.
    """
    if denominator_bound < 1:
        raise ValueError("denominator bound must be >= 1")
    b, dist_b = _round_poly(cert.b, denominator_bound)
    b2 = None
    dist = dist_b
    kind = cert.kind
    if cert.kind == SEMIALGEBRAIC:
        b2, dist2 = _round_poly(cert.b2, denominator_bound)
        dist = max(dist, dist2)
        if b2.is_zero():
            kind, b2 = POLYNOMIAL, None
    meta = {"denominator_bound": denominator_bound, "max_distance": dist}
    return replace(cert, kind=kind, b=b, b2=b2, rounding=meta)
