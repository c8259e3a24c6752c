"""Gram-matrix compilation of SOS programs into block SDPs.

Each constraint ``lhs = sigma_0 + sum_i sigma_i g_i`` is compiled by exact
coefficient matching: for every monomial that can occur on either side there
is exactly one equality row.  Unknown SOS multipliers become PSD Gram blocks
over the dense monomial basis allowed by the degree budget; unknown free
multipliers and the certificate-template parameters become free scalars.

Degree bookkeeping per constraint: the identity degree D is the smallest even
number >= max(deg lhs, d), where d is the program's template degree.  An SOS
multiplier of generator g may use monomials up to floor((D - deg g)/2); a
free multiplier up to D - deg g.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from bcsynth.params import ParametricPolynomial
from bcsynth.poly import Polynomial, monomials_up_to
from bcsynth.programs import FREE, SOS, SosProgram
from bcsynth.sdp.instance import BlockInfo, MultiplierInfo, SdpInstance


class CompileError(ValueError):
    """Raised when a program cannot be compiled at its degree budget."""


def even_ceil(n: int) -> int:
    return n if n % 2 == 0 else n + 1


def identity_degree(lhs_degree: int, template_degree: int) -> int:
    return even_ceil(max(lhs_degree, template_degree))


def compile_program(program: SosProgram, objective: str = "trace") -> SdpInstance:
    """Compile an SOS program to a block SDP with exact coefficient matching.

    objective: "trace" adds min sum(trace(Gram)) as a regularizing objective;
    "feasibility" compiles a pure feasibility problem.
    """
    if objective not in ("trace", "feasibility"):
        raise ValueError(f"unknown objective {objective!r}")

    n_params = len(program.registry)
    free_names = list(program.registry.names)
    block_sizes: list[int] = []
    blocks: list[BlockInfo] = []
    multipliers: list[MultiplierInfo] = []

    # rows keyed by (constraint index, monomial); values accumulate entries
    psd_rows: dict[tuple[int, tuple], list[tuple[int, int, int, float]]] = {}
    free_rows: dict[tuple[int, tuple], list[tuple[int, float]]] = {}
    rhs: dict[tuple[int, tuple], float] = {}

    def row(key):
        if key not in rhs:
            rhs[key] = 0.0
            psd_rows[key] = []
            free_rows[key] = []
        return key

    for ci, con in enumerate(program.constraints):
        lhs_deg = con.lhs_degree()
        d_id = identity_degree(lhs_deg, program.degree)

        # Left-hand side: constants feed the rhs, parameter weights feed the
        # free columns (moved across the equality, hence negated).
        for expo, form in con.lhs.terms.items():
            key = row((ci, expo))
            rhs[key] += float(form.const)
            for pid, w in form.coeffs.items():
                free_rows[key].append((pid, -float(w)))

        for gen in con.generators:
            g = gen.poly
            g_deg = int(g.total_degree()) if g.terms else 0
            budget = d_id - g_deg
            if budget < 0:
                raise CompileError(
                    f"constraint {con.label!r}: generator {gen.label!r} of degree "
                    f"{g_deg} exceeds identity degree {d_id} (empty multiplier basis)"
                )
            if gen.kind == SOS:
                basis = tuple(monomials_up_to(con.vars, budget // 2))
                block = len(block_sizes)
                block_sizes.append(len(basis))
                blocks.append(BlockInfo(len(basis), con.label, gen.label, basis))
                multipliers.append(
                    MultiplierInfo(con.label, gen.label, SOS, block=block, basis=basis)
                )
                for bi in range(len(basis)):
                    for bj in range(bi, len(basis)):
                        pair = tuple(a + b for a, b in zip(basis[bi], basis[bj]))
                        for gexpo, gc in g.terms.items():
                            expo = tuple(a + b for a, b in zip(pair, gexpo))
                            key = row((ci, expo))
                            psd_rows[key].append((block, bi, bj, float(gc)))
            elif gen.kind == FREE:
                basis = tuple(monomials_up_to(con.vars, budget))
                start = len(free_names)
                for expo in basis:
                    free_names.append(
                        f"{con.label}:{gen.label}[{','.join(map(str, expo))}]"
                    )
                multipliers.append(
                    MultiplierInfo(
                        con.label, gen.label, FREE, free_start=start, basis=basis
                    )
                )
                for k, bexpo in enumerate(basis):
                    for gexpo, gc in g.terms.items():
                        expo = tuple(a + b for a, b in zip(bexpo, gexpo))
                        key = row((ci, expo))
                        free_rows[key].append((start + k, float(gc)))
            else:
                raise CompileError(f"unknown multiplier kind {gen.kind!r}")

    ordered = sorted(rhs.keys(), key=lambda key: (key[0], sum(key[1]), key[1]))
    labels = [(program.constraints[ci].label, expo) for ci, expo in ordered]
    constraint_rows: dict[str, tuple[int, int]] = {}
    for idx, (ci, _) in enumerate(ordered):
        label = program.constraints[ci].label
        lo, hi = constraint_rows.get(label, (idx, idx))
        constraint_rows[label] = (min(lo, idx), idx + 1)

    instance = SdpInstance(
        block_sizes=block_sizes,
        blocks=blocks,
        free_names=free_names,
        b=np.array([rhs[key] for key in ordered]),
        psd_entries=[psd_rows[key] for key in ordered],
        free_entries=[free_rows[key] for key in ordered],
        row_labels=labels,
        trace_weight=1.0 if objective == "trace" else 0.0,
        multipliers=multipliers,
        constraint_rows=constraint_rows,
    )
    return instance


def multiplier_polynomials(
    program: SosProgram, instance: SdpInstance, block_mats: Sequence[np.ndarray], free_vals: np.ndarray
) -> dict[str, list[tuple[str, str, Polynomial]]]:
    """Reconstruct every solved multiplier as a float polynomial.

    Returns {constraint label: [(generator label, kind, sigma), ...]} in
    generator order.
    """
    by_constraint: dict[str, list[tuple[str, str, Polynomial]]] = {
        c.label: [] for c in program.constraints
    }
    con_vars = {c.label: c.vars for c in program.constraints}
    for info in instance.multipliers:
        vs = con_vars[info.constraint]
        terms: dict[tuple, float] = {}
        if info.kind == SOS:
            q = block_mats[info.block]
            basis = info.basis
            for i in range(len(basis)):
                for j in range(len(basis)):
                    expo = tuple(a + b for a, b in zip(basis[i], basis[j]))
                    terms[expo] = terms.get(expo, 0.0) + float(q[i, j])
        else:
            for k, expo in enumerate(info.basis):
                terms[expo] = terms.get(expo, 0.0) + float(free_vals[info.free_start + k])
        sigma = Polynomial(vs, {e: c for e, c in terms.items() if c != 0.0})
        by_constraint[info.constraint].append((info.generator, info.kind, sigma))
    return by_constraint


def certificate_parameter_values(program: SosProgram, free_vals: np.ndarray) -> list[float]:
    return [float(free_vals[pid]) for pid in range(len(program.registry))]


def extract_certificate(program: SosProgram, solution) -> "Certificate":
    """Read the certificate out of a solved program.

    The certificate templates live over the original state variables (the
    homogenized encodings homogenize a shared x-space template, so
    substituting parameter values here is the same as dehomogenizing the
    solved lifted template at x0 := 1).
    """
    from bcsynth.certificate import POLYNOMIAL, SEMIALGEBRAIC, Certificate

    if solution.status not in ("optimal", "feasible"):
        raise ValueError(f"no certificate to extract from status {solution.status!r}")
    if program.b_template is None:
        raise ValueError("program carries no certificate template")
    vals = certificate_parameter_values(program, solution.free)
    b = program.b_template.substitute(vals)
    opts = program.problem.options if program.problem is not None else None
    lam = float(opts.lam) if opts else -1.0
    eps_e = float(opts.eps_e) if opts else 1e-5
    if program.b2_template is not None:
        b2 = program.b2_template.substitute(vals)
        if b2.is_zero():
            return Certificate(POLYNOMIAL, b, None, program.method, program.degree, lam, eps_e)
        return Certificate(SEMIALGEBRAIC, b, b2, program.method, program.degree, lam, eps_e)
    return Certificate(POLYNOMIAL, b, None, program.method, program.degree, lam, eps_e)
