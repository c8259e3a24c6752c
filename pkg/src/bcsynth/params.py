"""Polynomials whose coefficients are affine forms over decision parameters.

These carry the unknown certificate templates through program construction.
Everything stays exact (Fraction weights) until SDP assembly, because the
compiler matches coefficients monomial-by-monomial and approximate
construction would make those equalities ill-posed.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

from bcsynth.poly import NEG_INF, Exponent, Polynomial, VectorField, monomials_up_to


class ParamRegistry:
    """Assigns stable integer ids to named decision parameters (per program)."""

    def __init__(self):
        self.names: list[str] = []
        self._index: dict[str, int] = {}

    def add(self, name: str) -> int:
        if name in self._index:
            raise ValueError(f"parameter {name!r} already registered")
        pid = len(self.names)
        self.names.append(name)
        self._index[name] = pid
        return pid

    def id_of(self, name: str) -> int:
        return self._index[name]

    def __len__(self):
        return len(self.names)


class AffineForm:
    """const + sum(weight * parameter), exact."""

    __slots__ = ("const", "coeffs")

    def __init__(self, const=0, coeffs: Mapping[int, object] | None = None):
        self.const = Fraction(const) if isinstance(const, int) else const
        self.coeffs = {}
        if coeffs:
            for pid, w in coeffs.items():
                w = Fraction(w) if isinstance(w, int) else w
                if w != 0:
                    self.coeffs[pid] = w

    @staticmethod
    def of_param(pid: int) -> "AffineForm":
        return AffineForm(0, {pid: Fraction(1)})

    def is_zero(self) -> bool:
        return self.const == 0 and not self.coeffs

    def __add__(self, other: "AffineForm") -> "AffineForm":
        coeffs = dict(self.coeffs)
        for pid, w in other.coeffs.items():
            coeffs[pid] = coeffs.get(pid, Fraction(0)) + w
        return AffineForm(self.const + other.const, coeffs)

    def __neg__(self) -> "AffineForm":
        return AffineForm(-self.const, {p: -w for p, w in self.coeffs.items()})

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        return self + (-other)

    def scale(self, c) -> "AffineForm":
        if c == 0:
            return AffineForm(0)
        return AffineForm(self.const * c, {p: w * c for p, w in self.coeffs.items()})

    def substitute(self, values: Sequence) -> object:
        total = self.const
        for pid, w in self.coeffs.items():
            total = total + w * values[pid]
        return total

    def pin(self, values: Mapping[int, object]) -> "AffineForm":
        const = self.const
        coeffs = {}
        for pid, w in self.coeffs.items():
            if pid in values:
                const = const + w * values[pid]
            else:
                coeffs[pid] = w
        return AffineForm(const, coeffs)

    def __eq__(self, other):
        if not isinstance(other, AffineForm):
            return NotImplemented
        return self.const == other.const and self.coeffs == other.coeffs

    def __repr__(self):
        bits = [str(self.const)] if self.const != 0 or not self.coeffs else []
        bits += [f"{w}*p{pid}" for pid, w in sorted(self.coeffs.items())]
        return " + ".join(bits) if bits else "0"


class ParametricPolynomial:
    """Sparse polynomial with AffineForm coefficients over a shared registry."""

    __slots__ = ("vars", "terms", "registry")

    def __init__(self, variables: Sequence[str], terms: Mapping[Exponent, AffineForm], registry: ParamRegistry):
        self.vars = tuple(variables)
        self.registry = registry
        self.terms = {tuple(e): f for e, f in terms.items() if not f.is_zero()}

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_polynomial(p: Polynomial, registry: ParamRegistry) -> "ParametricPolynomial":
        return ParametricPolynomial(
            p.vars, {e: AffineForm(c) for e, c in p.terms.items()}, registry
        )

    @staticmethod
    def template(registry: ParamRegistry, variables: Sequence[str], degree: int, prefix: str) -> "ParametricPolynomial":
        """Dense template: one fresh parameter per monomial of degree <= degree."""
        terms = {}
        for expo in monomials_up_to(variables, degree):
            pid = registry.add(f"{prefix}[{','.join(map(str, expo))}]")
            terms[expo] = AffineForm.of_param(pid)
        return ParametricPolynomial(variables, terms, registry)

    # -- structure ----------------------------------------------------------

    def _require_same_registry(self, other: "ParametricPolynomial"):
        if self.registry is not other.registry:
            raise ValueError("parametric polynomials use different parameter registries")

    def align_to(self, variables: Sequence[str]) -> "ParametricPolynomial":
        target = tuple(variables)
        if target == self.vars:
            return self
        pos = {}
        for v in self.vars:
            if v not in target:
                raise ValueError(f"variable {v!r} missing from target space {target}")
            pos[v] = target.index(v)
        terms = {}
        for expo, f in self.terms.items():
            new = [0] * len(target)
            for v, e in zip(self.vars, expo):
                new[pos[v]] = e
            terms[tuple(new)] = f
        return ParametricPolynomial(target, terms, self.registry)

    def total_degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def param_ids(self) -> set[int]:
        out: set[int] = set()
        for f in self.terms.values():
            out.update(f.coeffs)
        return out

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other) -> "ParametricPolynomial":
        if isinstance(other, Polynomial):
            other = ParametricPolynomial.from_polynomial(other, self.registry)
        self._require_same_registry(other)
        a, b = self, other
        if a.vars != b.vars:
            vs = Polynomial.union_vars(a.vars, b.vars)
            a, b = a.align_to(vs), b.align_to(vs)
        terms = dict(a.terms)
        for expo, f in b.terms.items():
            terms[expo] = terms.get(expo, AffineForm(0)) + f
        return ParametricPolynomial(a.vars, terms, self.registry)

    def __neg__(self) -> "ParametricPolynomial":
        return ParametricPolynomial(self.vars, {e: -f for e, f in self.terms.items()}, self.registry)

    def __sub__(self, other) -> "ParametricPolynomial":
        if isinstance(other, Polynomial):
            other = ParametricPolynomial.from_polynomial(other, self.registry)
        return self + (-other)

    def scale(self, c) -> "ParametricPolynomial":
        return ParametricPolynomial(
            self.vars, {e: f.scale(c) for e, f in self.terms.items()}, self.registry
        )

    def mul_poly(self, p: Polynomial) -> "ParametricPolynomial":
        vs = Polynomial.union_vars(self.vars, p.vars)
        a = self.align_to(vs)
        p = p.align_to(vs)
        terms: dict[Exponent, AffineForm] = {}
        for ea, f in a.terms.items():
            for ep, c in p.terms.items():
                expo = tuple(x + y for x, y in zip(ea, ep))
                terms[expo] = terms.get(expo, AffineForm(0)) + f.scale(c)
        return ParametricPolynomial(vs, terms, self.registry)

    # -- calculus ---------------------------------------------------------------

    def partial(self, name: str) -> "ParametricPolynomial":
        if name not in self.vars:
            return ParametricPolynomial(self.vars, {}, self.registry)
        i = self.vars.index(name)
        terms: dict[Exponent, AffineForm] = {}
        for expo, f in self.terms.items():
            if expo[i] == 0:
                continue
            new = list(expo)
            new[i] -= 1
            key = tuple(new)
            terms[key] = terms.get(key, AffineForm(0)) + f.scale(expo[i])
        return ParametricPolynomial(self.vars, terms, self.registry)

    def lie_derivative(self, field: VectorField) -> "ParametricPolynomial":
        vs = Polynomial.union_vars(self.vars, field.vars)
        p = self.align_to(vs)
        out = ParametricPolynomial(vs, {}, self.registry)
        for name, comp in zip(field.vars, field.components):
            out = out + p.partial(name).mul_poly(comp.align_to(vs))
        return out

    # -- homogenization -----------------------------------------------------------

    def homogenize(self, x0: str, d_target: int) -> "ParametricPolynomial":
        if x0 in self.vars:
            raise ValueError(f"homogenization variable {x0!r} already present")
        deg = self.total_degree()
        if deg is not NEG_INF and d_target < deg:
            raise ValueError(f"target degree {d_target} below total degree {deg}")
        terms = {e + (d_target - sum(e),): f for e, f in self.terms.items()}
        return ParametricPolynomial(self.vars + (x0,), terms, self.registry)

    def dehomogenize(self, x0: str) -> "ParametricPolynomial":
        if x0 not in self.vars:
            return self
        i = self.vars.index(x0)
        vs = self.vars[:i] + self.vars[i + 1 :]
        terms: dict[Exponent, AffineForm] = {}
        for expo, f in self.terms.items():
            key = expo[:i] + expo[i + 1 :]
            terms[key] = terms.get(key, AffineForm(0)) + f
        return ParametricPolynomial(vs, terms, self.registry)

    # -- instantiation ---------------------------------------------------------------

    def substitute(self, values: Sequence) -> Polynomial:
        """Plug in numeric parameter values, yielding a plain polynomial."""
        return Polynomial(
            self.vars, {e: f.substitute(values) for e, f in self.terms.items()}
        )

    def pin(self, values: Mapping[int, object]) -> "ParametricPolynomial":
        """Fix a subset of parameters, keeping the rest symbolic."""
        return ParametricPolynomial(
            self.vars, {e: f.pin(values) for e, f in self.terms.items()}, self.registry
        )

    def __eq__(self, other):
        if not isinstance(other, ParametricPolynomial):
            return NotImplemented
        a, b = self, other
        if a.vars != b.vars:
            vs = Polynomial.union_vars(a.vars, b.vars)
            a, b = a.align_to(vs), b.align_to(vs)
        return a.terms == b.terms

    def __repr__(self):
        return f"ParametricPolynomial<{len(self.terms)} terms over {self.vars}>"
