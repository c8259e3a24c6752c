"""Exact sparse multivariate polynomial arithmetic.

A polynomial is a dict mapping exponent tuples (one int per variable, aligned
with an ordered variable-name tuple) to coefficients.  Coefficients are exact
``Fraction`` values on symbolic paths and plain floats on numeric paths; mixed
arithmetic degrades to float.  Zero-coefficient terms are never stored, so two
polynomials are equal iff their term dicts are equal over a common variable
space.

Monomials are ordered graded-lexicographically (total degree first, then
lexicographic on the exponent tuple).  This order is fixed globally; every
basis and every serialized artifact derives its ordering from it.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Exponent = tuple[int, ...]
Coeff = Union[Fraction, float]

# Degree of the zero polynomial.  A sentinel only: comparisons against it are
# fine, arithmetic with it is a bug.
NEG_INF = -math.inf


def grlex_key(expo: Exponent):
    return (sum(expo), expo)


def _normalize_coeff(c) -> Coeff:
    if isinstance(c, (Fraction, float)):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


class Polynomial:
    """Immutable sparse polynomial over an ordered variable space."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, Coeff]):
        vs = tuple(variables)
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate variable names in {vs}")
        clean: dict[Exponent, Coeff] = {}
        for expo, c in terms.items():
            expo = tuple(int(e) for e in expo)
            if len(expo) != len(vs):
                raise ValueError(f"exponent {expo} does not match variables {vs}")
            if any(e < 0 for e in expo):
                raise ValueError(f"negative exponent in {expo}")
            c = _normalize_coeff(c)
            if c != 0:
                clean[expo] = clean.get(expo, Fraction(0)) + c
                if clean[expo] == 0:
                    del clean[expo]
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):
        raise AttributeError("Polynomial is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(variables: Sequence[str]) -> "Polynomial":
        return Polynomial(variables, {})

    @staticmethod
    def constant(variables: Sequence[str], c) -> "Polynomial":
        n = len(tuple(variables))
        return Polynomial(variables, {(0,) * n: _normalize_coeff(c)} if c else {})

    @staticmethod
    def variable(variables: Sequence[str], name: str) -> "Polynomial":
        vs = tuple(variables)
        expo = [0] * len(vs)
        expo[vs.index(name)] = 1
        return Polynomial(vs, {tuple(expo): Fraction(1)})

    # -- variable-space management -----------------------------------------

    def align_to(self, variables: Sequence[str]) -> "Polynomial":
        """Re-embed into a larger or reordered variable space."""
        target = tuple(variables)
        if target == self.vars:
            return self
        pos = {}
        for v in self.vars:
            if v not in target:
                raise ValueError(f"variable {v!r} missing from target space {target}")
            pos[v] = target.index(v)
        terms = {}
        for expo, c in self.terms.items():
            new = [0] * len(target)
            for v, e in zip(self.vars, expo):
                new[pos[v]] = e
            terms[tuple(new)] = c
        return Polynomial(target, terms)

    @staticmethod
    def union_vars(a: Sequence[str], b: Sequence[str]) -> tuple[str, ...]:
        merged = list(a)
        for v in b:
            if v not in merged:
                merged.append(v)
        return tuple(merged)

    def _common(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if self.vars == other.vars:
            return self, other
        vs = Polynomial.union_vars(self.vars, other.vars)
        return self.align_to(vs), other.align_to(vs)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, Fraction)):
            other = Polynomial.constant(self.vars, other)
        a, b = self._common(other)
        terms = dict(a.terms)
        for expo, c in b.terms.items():
            terms[expo] = terms.get(expo, Fraction(0)) + c
        return Polynomial(a.vars, terms)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, Fraction)):
            other = Polynomial.constant(self.vars, other)
        return self.__add__(-other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, float, Fraction)):
            if other == 0:
                return Polynomial.zero(self.vars)
            c0 = _normalize_coeff(other)
            return Polynomial(self.vars, {e: c * c0 for e, c in self.terms.items()})
        a, b = self._common(other)
        terms: dict[Exponent, Coeff] = {}
        for ea, ca in a.terms.items():
            for eb, cb in b.terms.items():
                expo = tuple(x + y for x, y in zip(ea, eb))
                terms[expo] = terms.get(expo, Fraction(0)) + ca * cb
        return Polynomial(a.vars, terms)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int) -> "Polynomial":
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        a, b = self._common(other)
        return a.terms == b.terms

    def __hash__(self):
        return hash((self.vars, tuple(sorted(self.terms.items()))))

    # -- queries -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self):
        """Max term degree; NEG_INF for the zero polynomial."""
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def degree_in(self, name: str) -> int:
        if name not in self.vars or not self.terms:
            return 0
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def coefficient(self, expo: Exponent) -> Coeff:
        return self.terms.get(tuple(expo), Fraction(0))

    def coeff_inf_norm(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(float(c)) for c in self.terms.values())

    def to_float(self) -> "Polynomial":
        return Polynomial(self.vars, {e: float(c) for e, c in self.terms.items()})

    def map_coeffs(self, fn) -> "Polynomial":
        return Polynomial(self.vars, {e: fn(c) for e, c in self.terms.items()})

    def sorted_terms(self, reverse: bool = True) -> list[tuple[Exponent, Coeff]]:
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=reverse)

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, point):
        """Evaluate at a point (sequence aligned with self.vars, or a mapping)."""
        if isinstance(point, Mapping):
            vals = [point[v] for v in self.vars]
        else:
            vals = list(point)
            if len(vals) != len(self.vars):
                raise ValueError(
                    f"point of dimension {len(vals)} for {len(self.vars)} variables"
                )
        total = 0
        for expo, c in self.terms.items():
            m = c
            for val, e in zip(vals, expo):
                if e:
                    m = m * val**e
            total = total + m
        return total

    def evaluate_batch(self, points) -> "object":
        """Evaluate at many points: rows of an (N, n) float array."""
        import numpy as np

        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != len(self.vars):
            raise ValueError(f"expected (N, {len(self.vars)}) array, got {pts.shape}")
        out = np.zeros(pts.shape[0])
        for expo, c in self.terms.items():
            term = np.full(pts.shape[0], float(c))
            for i, e in enumerate(expo):
                if e == 1:
                    term = term * pts[:, i]
                elif e:
                    term = term * pts[:, i] ** e
            out += term
        return out

    # -- calculus --------------------------------------------------------------

    def partial(self, name: str) -> "Polynomial":
        if name not in self.vars:
            return Polynomial.zero(self.vars)
        i = self.vars.index(name)
        terms: dict[Exponent, Coeff] = {}
        for expo, c in self.terms.items():
            if expo[i] == 0:
                continue
            new = list(expo)
            new[i] -= 1
            key = tuple(new)
            terms[key] = terms.get(key, Fraction(0)) + c * expo[i]
        return Polynomial(self.vars, terms)

    # -- homogenization ----------------------------------------------------------

    def homogenize(self, x0: str, d_target: int) -> "Polynomial":
        """x^a  ->  x^a * x0^(d_target - |a|), with x0 appended as last variable."""
        if x0 in self.vars:
            raise ValueError(f"homogenization variable {x0!r} already present")
        deg = self.total_degree()
        if deg is not NEG_INF and d_target < deg:
            raise ValueError(f"target degree {d_target} below total degree {deg}")
        vs = self.vars + (x0,)
        terms = {}
        for expo, c in self.terms.items():
            terms[expo + (d_target - sum(expo),)] = c
        return Polynomial(vs, terms)

    def dehomogenize(self, x0: str) -> "Polynomial":
        """Substitute x0 := 1 and drop it from the variable space."""
        if x0 not in self.vars:
            return self
        i = self.vars.index(x0)
        vs = self.vars[:i] + self.vars[i + 1 :]
        terms: dict[Exponent, Coeff] = {}
        for expo, c in self.terms.items():
            key = expo[:i] + expo[i + 1 :]
            terms[key] = terms.get(key, Fraction(0)) + c
        return Polynomial(vs, terms)

    # -- display -------------------------------------------------------------

    def __repr__(self):
        from bcsynth.parsing import format_polynomial

        if not self.terms:
            return "Polynomial<0>"
        return f"Polynomial<{format_polynomial(self)}>"


class VectorField:
    """Polynomial vector field: one component per state variable."""

    __slots__ = ("vars", "components")

    def __init__(self, variables: Sequence[str], components: Sequence[Polynomial]):
        vs = tuple(variables)
        comps = tuple(p.align_to(vs) for p in components)
        if len(comps) != len(vs):
            raise ValueError(
                f"{len(comps)} components for {len(vs)} state variables"
            )
        object.__setattr__(self, "vars", vs)
        object.__setattr__(self, "components", comps)

    def __setattr__(self, *a):
        raise AttributeError("VectorField is immutable")

    @property
    def dimension(self) -> int:
        return len(self.vars)

    def degree(self) -> int:
        degs = [p.total_degree() for p in self.components if not p.is_zero()]
        return int(max(degs)) if degs else 0

    def evaluate(self, point) -> list:
        return [p.evaluate(point) for p in self.components]

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.vars == other.vars and self.components == other.components


def lie_derivative(p: Polynomial, field: VectorField) -> Polynomial:
    """<grad p, f>: the derivative of p along trajectories of the field.

    p may live in a larger variable space; only the field's state variables
    are differentiated.
    """
    vs = Polynomial.union_vars(p.vars, field.vars)
    p = p.align_to(vs)
    out = Polynomial.zero(vs)
    for name, comp in zip(field.vars, field.components):
        out = out + p.partial(name) * comp.align_to(vs)
    return out


def monomials_exact(n: int, degree: int) -> list[Exponent]:
    """All exponent tuples over n variables of total degree == degree, lex ascending."""
    if n == 0:
        return [()] if degree == 0 else []
    out: list[Exponent] = []

    def rec(prefix, remaining, left):
        if remaining == 1:
            out.append(tuple(prefix + [left]))
            return
        for e in range(left + 1):
            rec(prefix + [e], remaining - 1, left - e)

    rec([], n, degree)
    return out


def monomials_up_to(variables: Sequence[str], degree: int) -> list[Exponent]:
    """All exponent tuples of total degree <= degree, graded-lex ascending."""
    n = len(tuple(variables))
    out: list[Exponent] = []
    for d in range(max(degree, -1) + 1):
        out.extend(monomials_exact(n, d))
    return out
