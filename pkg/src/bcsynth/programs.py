"""The three SOS encodings of the barrier-certificate conditions.

Each builder turns a validated problem and a template degree d into an
``SosProgram``: a list of polynomial-identity constraints of the shape

    lhs(x; params)  =  sigma_0 + sum_i sigma_i * g_i

where each multiplier is either an unknown SOS polynomial (one PSD Gram block
after compilation) or an unknown free polynomial (for equality generators).

Methods:

* ``thm3`` - the classical encoding over the original variables.  Sound for
  any sets; only complete when the sets are compact.
* ``thm5`` - compactified polynomial encoding.  The certificate template is
  homogenized, every set is mapped onto the unit (x, x0)-sphere, and the
  generators x0 >= 0 plus the sphere equality are appended.  Complete for
  sets closed at infinity.
* ``thm6`` - compactified encoding for certificates of the shape
  B1(x) + sqrt(|x|^2 + 1) * B2(x), linearized with two extra variables
  u = sqrt(|x|^2 + 1) and v = 1/u.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

from bcsynth.params import ParamRegistry, ParametricPolynomial
from bcsynth.poly import Polynomial, VectorField
from bcsynth.problem import (
    SemialgebraicSet,
    SynthesisProblem,
    fresh_var,
    homogenize_set,
    warn_if_not_closed_at_infinity,
)

SOS = "sos"
FREE = "free"


@dataclass(frozen=True)
class SosGenerator:
    poly: Polynomial
    kind: str  # SOS or FREE
    label: str


@dataclass(frozen=True)
class SosConstraint:
    label: str  # "init" | "unsafe" | "lie"
    lhs: ParametricPolynomial
    generators: tuple[SosGenerator, ...]  # first entry is the constant 1 (sigma_0)

    @property
    def vars(self) -> tuple[str, ...]:
        return self.lhs.vars

    def lhs_degree(self) -> int:
        d = self.lhs.total_degree()
        return int(d) if self.lhs.terms else 0


@dataclass(frozen=True)
class SosProgram:
    method: str
    degree: int
    registry: ParamRegistry
    constraints: tuple[SosConstraint, ...]
    # Templates used to read the certificate back out of a solution.  For the
    # semialgebraic method both parts are present; otherwise only b_template.
    b_template: Optional[ParametricPolynomial] = None
    b2_template: Optional[ParametricPolynomial] = None
    problem: Optional[SynthesisProblem] = None
    aux_vars: tuple[str, ...] = ()  # (x0,) or (x0, u, v)


def _require_validated(problem: SynthesisProblem):
    if not problem.validated:
        raise ValueError("problem must pass validate_problem before program construction")


def _set_generators(s: SemialgebraicSet, vs: Sequence[str]) -> list[SosGenerator]:
    gens = [SosGenerator(Polynomial.constant(vs, 1), SOS, "one")]
    for k, g in enumerate(s.ineqs):
        gens.append(SosGenerator(g.align_to(vs), SOS, f"g{k + 1}"))
    for k, h in enumerate(s.eqs):
        gens.append(SosGenerator(h.align_to(vs), FREE, f"e{k + 1}"))
    return gens


def build_thm3(problem: SynthesisProblem, d: int) -> SosProgram:
    """Classical encoding over the original variables (sound on any sets)."""
    _require_validated(problem)
    if d < 1:
        raise ValueError("template degree must be >= 1")
    vs = problem.vars
    opts = problem.options
    reg = ParamRegistry()
    b = ParametricPolynomial.template(reg, vs, d, "B")
    eps = Fraction(opts.eps)
    eps_e = Fraction(opts.eps_e)
    lam = Fraction(opts.lam)

    one = Polynomial.constant(vs, 1)
    lhs_init = (-b) + one * eps
    lhs_unsafe = b - one * (eps_e - eps)
    lhs_lie = b.scale(lam) - b.lie_derivative(problem.field) + one * eps

    constraints = (
        SosConstraint("init", lhs_init, tuple(_set_generators(problem.init, vs))),
        SosConstraint("unsafe", lhs_unsafe, tuple(_set_generators(problem.unsafe, vs))),
        SosConstraint("lie", lhs_lie, tuple(_set_generators(problem.domain, vs))),
    )
    return SosProgram("thm3", d, reg, constraints, b_template=b, problem=problem)


def _hom_set_generators(s: SemialgebraicSet, vs, x0, ambient) -> tuple[list[SosGenerator], list[SosGenerator]]:
    """Homogenized generators of a set, split into (SOS ineqs, FREE eqs).

    Does not append x0 or the sphere; callers add the structural generators
    of their encoding in the order the encoding defines.
    """
    hs = homogenize_set(s, x0, vs)
    ineqs = [
        SosGenerator(g.align_to(ambient), SOS, f"g{k + 1}")
        for k, g in enumerate(hs.ineqs[:-1])
    ]
    eqs = [
        SosGenerator(h.align_to(ambient), FREE, f"e{k + 1}")
        for k, h in enumerate(hs.eqs[:-1])
    ]
    return ineqs, eqs


def build_thm5(problem: SynthesisProblem, d: int) -> SosProgram:
    """Compactified polynomial encoding (complete for sets closed at infinity)."""
    _require_validated(problem)
    if d < 1:
        raise ValueError("template degree must be >= 1")
    warn_if_not_closed_at_infinity(problem)
    vs = problem.vars
    opts = problem.options
    x0 = fresh_var("x0", vs)
    ambient = vs + (x0,)

    reg = ParamRegistry()
    b = ParametricPolynomial.template(reg, vs, d, "B")
    b_hom = b.homogenize(x0, d)

    f_deg = problem.field.degree()
    d_lie = d + max(f_deg - 1, 0)
    drift = b.scale(Fraction(opts.lam)) - b.lie_derivative(problem.field)
    drift_hom = drift.homogenize(x0, d_lie)

    eps = Fraction(opts.eps)
    eps_e = Fraction(opts.eps_e)
    x0_poly = Polynomial.variable(ambient, x0)
    sphere = _sphere(ambient)

    def slack(degree: int) -> Polynomial:
        if opts.eps_placement == "constant":
            return Polynomial.constant(ambient, eps)
        return x0_poly**degree * eps

    def structural(gens_ineq, gens_eq):
        gens = [SosGenerator(Polynomial.constant(ambient, 1), SOS, "one")]
        gens += gens_ineq
        gens.append(SosGenerator(x0_poly, SOS, "x0"))
        gens += gens_eq
        gens.append(SosGenerator(sphere, FREE, "sphere"))
        return tuple(gens)

    def build_constraint(label, s, lhs):
        ineqs, eqs = _hom_set_generators(s, vs, x0, ambient)
        return SosConstraint(label, lhs, structural(ineqs, eqs))

    lhs_init = (-b_hom) + slack(d)
    lhs_unsafe = b_hom - x0_poly**d * eps_e + slack(d)
    lhs_lie = drift_hom + slack(d_lie)

    constraints = (
        build_constraint("init", problem.init, lhs_init),
        build_constraint("unsafe", problem.unsafe, lhs_unsafe),
        build_constraint("lie", problem.domain, lhs_lie),
    )
    return SosProgram(
        "thm5", d, reg, constraints, b_template=b, problem=problem, aux_vars=(x0,)
    )


def _sphere(ambient: Sequence[str]) -> Polynomial:
    """sum of squares of every ambient variable, minus one."""
    n = len(tuple(ambient))
    terms = {tuple(2 if i == j else 0 for i in range(n)): Fraction(1) for j in range(n)}
    return Polynomial(ambient, terms) - 1


def radial_flow(field: VectorField) -> Polynomial:
    """sum_i x_i * f_i(x): the time derivative of |x|^2 / 2 along the field."""
    out = Polynomial.zero(field.vars)
    for name, comp in zip(field.vars, field.components):
        out = out + Polynomial.variable(field.vars, name) * comp
    return out


def build_G(
    b1: ParametricPolynomial,
    b2: ParametricPolynomial,
    field: VectorField,
    lam,
    u: str = "u",
    v: str = "v",
) -> ParametricPolynomial:
    """Drift expression for split certificates, over (x, u, v).

    With u standing for sqrt(|x|^2 + 1) and v for its reciprocal,

        G = lam*(B1 + u*B2) - L_f(B1) - u*L_f(B2) - v*B2*sum_i(x_i f_i)

    agrees with lam*B - L_f(B) for B = B1 + sqrt(|x|^2 + 1)*B2 whenever
    u, v take their intended values.
    """
    vs = field.vars
    ambient = vs + (u, v)
    if not isinstance(lam, Fraction):
        lam = Fraction(lam)
    u_poly = Polynomial.variable(ambient, u)
    v_poly = Polynomial.variable(ambient, v)

    b1 = b1.align_to(ambient)
    b2 = b2.align_to(ambient)
    lie1 = b1.lie_derivative(field).align_to(ambient)
    lie2 = b2.lie_derivative(field).align_to(ambient)
    radial = radial_flow(field).align_to(ambient)

    value = (b1 + b2.mul_poly(u_poly)).scale(lam)
    return value - lie1 - lie2.mul_poly(u_poly) - b2.mul_poly(radial).mul_poly(v_poly)


def build_thm6(problem: SynthesisProblem, d: int) -> SosProgram:
    """Compactified encoding for B1 + sqrt(|x|^2 + 1)*B2 certificates."""
    _require_validated(problem)
    if d < 1:
        raise ValueError("template degree must be >= 1")
    warn_if_not_closed_at_infinity(problem)
    vs = problem.vars
    opts = problem.options
    x0 = fresh_var("x0", vs)
    u = fresh_var("u", vs + (x0,))
    v = fresh_var("v", vs + (x0, u))
    amb_iu = vs + (x0, u)
    amb_lie = vs + (x0, u, v)

    reg = ParamRegistry()
    b1 = ParametricPolynomial.template(reg, vs, d, "B1")
    b2 = ParametricPolynomial.template(reg, vs, d, "B2")

    u_small = Polynomial.variable(vs + (u,), u)
    b_xu = b1.align_to(vs + (u,)) + b2.mul_poly(u_small)
    b_hom = b_xu.homogenize(x0, d + 1).align_to(amb_iu)

    g_poly = build_G(b1, b2, problem.field, opts.lam, u, v)
    g_deg = int(g_poly.total_degree())
    g_hom = g_poly.homogenize(x0, g_deg).align_to(amb_lie)

    eps = Fraction(opts.eps)
    eps_e = Fraction(opts.eps_e)

    def norm_sq(ambient, names):
        out = Polynomial.zero(ambient)
        for name in names:
            out = out + Polynomial.variable(ambient, name) ** 2
        return out

    # Structural generators shared by the init/unsafe constraints (over x, x0, u).
    x0_iu = Polynomial.variable(amb_iu, x0)
    u_iu = Polynomial.variable(amb_iu, u)
    cone_iu = u_iu**2 - x0_iu**2 - norm_sq(amb_iu, vs)
    sphere_iu = norm_sq(amb_iu, amb_iu) - 1

    # Structural generators of the drift constraint (over x, x0, u, v).
    x0_l = Polynomial.variable(amb_lie, x0)
    u_l = Polynomial.variable(amb_lie, u)
    v_l = Polynomial.variable(amb_lie, v)
    cone_l = u_l**2 - x0_l**2 - norm_sq(amb_lie, vs)
    recip_l = u_l * v_l - x0_l**2
    sphere_l = norm_sq(amb_lie, amb_lie) - 1

    def build_constraint(label, s, lhs, ambient, extra_sos, extra_free):
        ineqs, eqs = _hom_set_generators(s, vs, x0, ambient)
        gens = [SosGenerator(Polynomial.constant(ambient, 1), SOS, "one")]
        gens += ineqs
        gens += [SosGenerator(p, SOS, lbl) for p, lbl in extra_sos]
        gens += eqs
        gens += [SosGenerator(p, FREE, lbl) for p, lbl in extra_free]
        return SosConstraint(label, lhs, tuple(gens))

    def slack(x0_var: Polynomial, degree: int) -> Polynomial:
        if opts.eps_placement == "constant":
            return Polynomial.constant(x0_var.vars, eps)
        return x0_var**degree * eps

    lhs_init = (-b_hom) + slack(x0_iu, d + 1)
    lhs_unsafe = b_hom - x0_iu ** (d + 1) * eps_e + slack(x0_iu, d + 1)
    lhs_lie = g_hom + slack(x0_l, g_deg)

    iu_sos = [(x0_iu, "x0"), (u_iu, "u")]
    iu_free = [(cone_iu, "cone"), (sphere_iu, "sphere")]
    lie_sos = [(x0_l, "x0"), (u_l, "u")]
    lie_free = [(cone_l, "cone"), (recip_l, "recip"), (sphere_l, "sphere")]

    constraints = (
        build_constraint("init", problem.init, lhs_init, amb_iu, iu_sos, iu_free),
        build_constraint("unsafe", problem.unsafe, lhs_unsafe, amb_iu, iu_sos, iu_free),
        build_constraint("lie", problem.domain, lhs_lie, amb_lie, lie_sos, lie_free),
    )
    return SosProgram(
        "thm6",
        d,
        reg,
        constraints,
        b_template=b1,
        b2_template=b2,
        problem=problem,
        aux_vars=(x0, u, v),
    )


def build_program(problem: SynthesisProblem, d: int, method: Optional[str] = None) -> SosProgram:
    method = method or problem.options.method
    builder = {"thm3": build_thm3, "thm5": build_thm5, "thm6": build_thm6}[method]
    return builder(problem, d)


def membership_program(
    target: Polynomial,
    generators: Sequence[tuple[Polynomial, str]],
    degree: int,
    label: str = "membership",
) -> SosProgram:
    """Fixed-target quadratic-module membership: target = sigma_0 + sum sigma_i g_i.

    No certificate template; feasibility of the compiled SDP decides whether
    the target lies in the (degree-truncated) quadratic module.
    """
    reg = ParamRegistry()
    vs = target.vars
    for g, _ in generators:
        vs = Polynomial.union_vars(vs, g.vars)
    gens = [SosGenerator(Polynomial.constant(vs, 1), SOS, "one")]
    for k, (g, kind) in enumerate(generators):
        if kind not in (SOS, FREE):
            raise ValueError(f"unknown multiplier kind {kind!r}")
        gens.append(SosGenerator(g.align_to(vs), kind, f"g{k + 1}"))
    lhs = ParametricPolynomial.from_polynomial(target.align_to(vs), reg)
    constraint = SosConstraint(label, lhs, tuple(gens))
    return SosProgram("membership", degree, reg, (constraint,))
