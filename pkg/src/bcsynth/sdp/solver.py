"""Dense primal-dual interior-point SDP solver.

Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
predictor-corrector, solving

    min  <C, X> + c_f.y_f   s.t.  A(X) + F y_f = b,  X in PSD blocks

together with its dual.  The embedding carries two extra scalars (tau, kappa);
tau -> positive yields a solution, kappa -> positive yields an infeasibility
certificate, so "infeasible" is a detected outcome rather than a timeout.

All linear algebra is dense numpy/LAPACK.  One solve owns all of its state;
nothing module-level is mutated, and identical inputs produce identical
iterates, so results are reproducible bit-for-bit.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lu_factor, lu_solve

from bcsynth.sdp.instance import SdpInstance


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    step_fraction: float = 0.98
    # Quality required of a Farkas-type certificate before declaring
    # infeasibility, relative to the certificate's objective value.
    infeas_tol: float = 1e-9
    min_step: float = 1e-10

    def validated(self) -> "SolverConfig":
        for name in ("feas_tol", "gap_tol", "step_fraction", "infeas_tol", "min_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        return self


OPTIMAL = "optimal"
FEASIBLE = "feasible"
PRIMAL_INFEASIBLE = "primal-infeasible"
DUAL_INFEASIBLE = "dual-infeasible"
ITERATION_LIMIT = "iteration-limit"
NUMERICAL_FAILURE = "numerical-failure"

SOLVED_STATUSES = (OPTIMAL, FEASIBLE)


@dataclass
class SdpSolution:
    status: str
    blocks: list[np.ndarray] = dc_field(default_factory=list)
    free: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    y: np.ndarray = dc_field(default_factory=lambda: np.zeros(0))
    dual_blocks: list[np.ndarray] = dc_field(default_factory=list)
    tau: float = 0.0
    kappa: float = 0.0
    iterations: int = 0
    wall_time: float = 0.0
    primal_obj: float = float("nan")
    dual_obj: float = float("nan")
    metrics: dict = dc_field(default_factory=dict)
    message: str = ""


class _Block:
    """Per-block constraint data in gather form.

    For row i the pairing <A_i, T> equals sum over this block's gather
    entries with row index i of gv * T.flat[gidx]; the same arrays drive the
    adjoint map.
    """

    def __init__(self, size: int, entries: list[tuple[int, int, int, float]], m: int):
        self.size = size
        self.m = m
        gr, gidx, gv = [], [], []
        per_row: dict[int, list[tuple[int, int, float]]] = {}
        for row, p, q, v in entries:
            per_row.setdefault(row, []).append((p, q, v))
            gr.append(row)
            gidx.append(p * size + q)
            gv.append(v)
            if p != q:
                gr.append(row)
                gidx.append(q * size + p)
                gv.append(v)
        self.gr = np.array(gr, dtype=np.intp)
        self.gidx = np.array(gidx, dtype=np.intp)
        self.gv = np.array(gv, dtype=float)
        self.rows = sorted(per_row)
        self.row_entries = {
            row: (
                np.array([p for p, q, v in triples], dtype=np.intp),
                np.array([q for p, q, v in triples], dtype=np.intp),
                np.array([v for p, q, v in triples], dtype=float),
            )
            for row, triples in per_row.items()
        }

    def pair_all(self, t: np.ndarray) -> np.ndarray:
        """[<A_i, T>] for all rows i (zero where the block is absent)."""
        if self.gr.size == 0:
            return np.zeros(self.m)
        return np.bincount(self.gr, weights=self.gv * t.ravel()[self.gidx], minlength=self.m)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """sum_i y_i A_i as a dense symmetric matrix."""
        s = self.size
        if self.gr.size == 0:
            return np.zeros((s, s))
        flat = np.bincount(self.gidx, weights=self.gv * y[self.gr], minlength=s * s)
        return flat.reshape(s, s)

    def congruence_columns(self, w: np.ndarray, out: np.ndarray):
        """Accumulate G[:, i] += <A_., W A_i W> for every row i of this block."""
        for row in self.rows:
            p, q, v = self.row_entries[row]
            diag = p == q
            t = np.zeros((self.size, self.size))
            if np.any(~diag):
                po, qo, vo = p[~diag], q[~diag], v[~diag]
                o = (w[:, po] * vo) @ w[qo, :]
                t += o + o.T
            if np.any(diag):
                pd, vd = p[diag], v[diag]
                t += (w[:, pd] * vd) @ w[pd, :]
            out[:, row] += self.pair_all(t)


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _nt_scaling(x: np.ndarray, s: np.ndarray):
    """Nesterov-Todd scaling point.

    Returns (r, rinv, lam) with r @ r.T = W, rinv = r^{-1}, and
    lam = r^{-1} X r^{-T} = r^T S r diagonal (as a vector).
    """
    lx = np.linalg.cholesky(x)
    ls = np.linalg.cholesky(s)
    u, sev, vt = np.linalg.svd(ls.T @ lx)
    lam = sev
    sqrt_lam = np.sqrt(sev)
    r = lx @ vt.T / sqrt_lam
    rinv = (vt.T * sqrt_lam).T @ np.linalg.inv(lx)
    return r, rinv, lam


def _max_step_psd(lam: np.ndarray, d_scaled: np.ndarray) -> float:
    """Largest a with diag(lam) + a*D >= 0, D symmetric in the scaled space."""
    scale = 1.0 / np.sqrt(lam)
    m = _sym(d_scaled) * np.outer(scale, scale)
    w = np.linalg.eigvalsh(m)
    m_min = float(w[0])
    if m_min >= -1e-16:
        return np.inf
    return 1.0 / (-m_min)


def solve(instance: SdpInstance, config: Optional[SolverConfig] = None) -> SdpSolution:
    config = (config or SolverConfig()).validated()
    t_start = time.perf_counter()
    try:
        return _solve_inner(instance, config, t_start)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as exc:
        return SdpSolution(
            status=NUMERICAL_FAILURE,
            wall_time=time.perf_counter() - t_start,
            message=f"linear algebra breakdown: {exc}",
        )


def _solve_inner(instance: SdpInstance, config: SolverConfig, t_start: float) -> SdpSolution:
    m = instance.num_rows
    k = instance.num_free
    sizes = list(instance.block_sizes)
    p = len(sizes)
    c_obj = instance.objective_matrices()
    c_free = instance.objective_free()
    has_obj = any(np.any(cj) for cj in c_obj) or bool(np.any(c_free))
    b = np.asarray(instance.b, dtype=float)

    blocks = []
    for j, size in enumerate(sizes):
        entries = []
        for i, row_entries in enumerate(instance.psd_entries):
            for blk, r, c, v in row_entries:
                if blk == j:
                    entries.append((i, r, c, v))
        blocks.append(_Block(size, entries, m))

    fmat = np.zeros((m, k))
    for i, row_entries in enumerate(instance.free_entries):
        for idx, v in row_entries:
            fmat[i, idx] += v

    nu = float(sum(sizes)) + 1.0
    norm_b = max(1.0, float(np.max(np.abs(b))) if m else 1.0)
    norm_c = max(
        1.0,
        max((float(np.max(np.abs(cj))) for cj in c_obj if cj.size), default=0.0),
        float(np.max(np.abs(c_free))) if k else 0.0,
    )

    # HSD state
    x = [np.eye(s) for s in sizes]
    s_dual = [np.eye(s) for s in sizes]
    y = np.zeros(m)
    y_free = np.zeros(k)
    tau, kappa = 1.0, 1.0
    norm_f = float(np.max(np.abs(fmat))) if k else 0.0
    reg_free = 1e-11 * max(1.0, norm_f)

    def objective_x():
        total = sum(float(np.tensordot(cj, xj)) for cj, xj in zip(c_obj, x))
        return total + float(c_free @ y_free)

    def apply_a():
        out = fmat @ y_free if k else np.zeros(m)
        for blk, xj in zip(blocks, x):
            out = out + blk.pair_all(xj)
        return out

    status = ITERATION_LIMIT
    message = ""
    iters = 0

    for iteration in range(config.max_iter):
        iters = iteration
        # residuals of the embedding
        rp = b * tau - apply_a()
        rd = [
            c_obj[j] * tau - blocks[j].adjoint(y) - s_dual[j]
            for j in range(p)
        ]
        rf = c_free * tau - (fmat.T @ y if k else np.zeros(0))
        cx = objective_x()
        by = float(b @ y)
        g_res = by - cx - kappa
        mu = (sum(float(np.tensordot(xj, sj)) for xj, sj in zip(x, s_dual)) + tau * kappa) / nu

        # convergence of the de-homogenized point
        pres_abs = float(np.max(np.abs(rp))) / tau if m else 0.0
        pres = pres_abs / norm_b
        dres = max(
            (float(np.max(np.abs(rdj))) / tau / norm_c for rdj in rd), default=0.0
        )
        dual_scale = max(1.0, float(np.max(np.abs(y))) / tau) if m else 1.0
        fres = (float(np.max(np.abs(rf))) / tau / dual_scale) if k else 0.0
        pobj = cx / tau
        dobj = by / tau
        gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))

        if (
            pres <= config.feas_tol
            and pres_abs <= 5.0 * config.feas_tol
            and dres <= config.feas_tol
            and fres <= config.feas_tol
            and gap <= config.gap_tol
        ):
            status = OPTIMAL if has_obj else FEASIBLE
            internal_metrics = {
                "primal_residual": pres_abs,
                "dual_residual": dres * norm_c,
                "duality_gap": abs(pobj - dobj),
                "primal_objective": pobj,
                "dual_objective": dobj,
            }
            break

        # Farkas certificate for primal infeasibility: y with A^T y + S = 0,
        # F^T y = 0, b^T y > 0.  Residuals are measured relative to b^T y.
        if by > 0:
            cert_res = max(
                (float(np.max(np.abs(blocks[j].adjoint(y) + s_dual[j]))) for j in range(p)),
                default=0.0,
            )
            if k:
                cert_res = max(cert_res, float(np.max(np.abs(fmat.T @ y))))
            if cert_res <= config.infeas_tol * by:
                status = PRIMAL_INFEASIBLE
                message = f"Farkas certificate with b'y = {by:.3e}, residual {cert_res:.3e}"
                break
        # Improving primal ray for dual infeasibility: X >= 0, A(X) + F yf = 0
        # with negative objective.  Unreachable under the trace objective but
        # kept for generality.
        if -cx > 0:
            ray_res = float(np.max(np.abs(apply_a()))) if m else 0.0
            if ray_res <= config.infeas_tol * (-cx):
                status = DUAL_INFEASIBLE
                message = f"improving ray with c'x = {cx:.3e}, residual {ray_res:.3e}"
                break

        if tau <= 1e-14 * max(1.0, kappa):
            status = NUMERICAL_FAILURE
            message = "embedding collapsed (tau -> 0) without a clean certificate"
            break

        # NT scalings
        scalings = [_nt_scaling(x[j], s_dual[j]) for j in range(p)]
        ws = [r @ r.T for r, _, _ in scalings]

        # Schur complement G = A W A^T and objective couplings
        g = np.zeros((m, m))
        u_c = np.zeros(m)
        w_cc = 0.0
        for j in range(p):
            blocks[j].congruence_columns(ws[j], g)
            if has_obj and np.any(c_obj[j]):
                wcw = ws[j] @ c_obj[j] @ ws[j]
                u_c += blocks[j].pair_all(wcw)
                w_cc += float(np.tensordot(c_obj[j], wcw))
        g = _sym(g)

        kk = np.zeros((m + k + 1, m + k + 1))
        kk[:m, :m] = g
        if k:
            kk[:m, m : m + k] = fmat
            kk[m : m + k, :m] = fmat.T
            kk[m : m + k, -1] = -c_free
            kk[-1, m : m + k] = -c_free
            # Free-multiplier columns can be linearly dependent (products of
            # equality generators satisfy syzygies), which makes the plain
            # saddle system singular.  A quasi-definite regularization of the
            # free block keeps the factorization well-posed; the perturbation
            # only redistributes weight inside the dependent null space.
            kk[m : m + k, m : m + k] = -reg_free * np.eye(k)
        kk[:m, -1] = -(b + u_c)
        kk[-1, :m] = b - u_c
        kk[-1, -1] = w_cc + kappa / tau
        lu = None
        for attempt in range(4):
            try:
                with np.errstate(all="ignore"), warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    lu = lu_factor(kk)
                    probe = lu_solve(lu, np.ones(m + k + 1))
                if np.all(np.isfinite(probe)):
                    break
            except np.linalg.LinAlgError:
                pass
            reg_free = max(reg_free, 1e-12) * 1000.0
            if k:
                kk[m : m + k, m : m + k] = -reg_free * np.eye(k)
            lu = None
        if lu is None:
            status = NUMERICAL_FAILURE
            message = "KKT factorization failed"
            break

        def newton(v_blocks, v_tau):
            """Solve one Newton system given complementarity targets.

            Solves, for the residual definitions above (r = target - value),
                A(dX) + F dyf - b dtau          = rp
                A*(dy) + dS - C dtau            = rd
                F^T dy - c_f dtau               = rf
                b.dy - <C,dX> - c_f.dyf - dkappa = -G_res
                dX + W dS W                     = V
                kappa dtau + tau dkappa         = v_tau
            via elimination of dS, dX, dkappa.
            """
            h1 = rp.copy()
            cvw = 0.0
            for j in range(p):
                mj = v_blocks[j] - ws[j] @ rd[j] @ ws[j]
                h1 -= blocks[j].pair_all(mj)
                if has_obj and np.any(c_obj[j]):
                    cvw += float(np.tensordot(c_obj[j], mj))
            h2 = rf
            h3 = -g_res + cvw + v_tau / tau
            rhs = np.concatenate([h1, h2, [h3]])
            sol = lu_solve(lu, rhs)
            dy = sol[:m]
            dyf = sol[m : m + k]
            dtau = float(sol[-1])
            ds = [
                rd[j] - blocks[j].adjoint(dy) + c_obj[j] * dtau
                for j in range(p)
            ]
            dx = [v_blocks[j] - ws[j] @ ds[j] @ ws[j] for j in range(p)]
            dkappa = (v_tau - kappa * dtau) / tau
            return dx, dyf, dy, ds, dtau, dkappa

        def max_step(dx, ds, dtau, dkappa):
            alpha = np.inf
            for j in range(p):
                r, rinv, lam = scalings[j]
                dx_hat = rinv @ dx[j] @ rinv.T
                ds_hat = r.T @ ds[j] @ r
                alpha = min(alpha, _max_step_psd(lam, dx_hat), _max_step_psd(lam, ds_hat))
            if dtau < 0:
                alpha = min(alpha, tau / (-dtau))
            if dkappa < 0:
                alpha = min(alpha, kappa / (-dkappa))
            return alpha

        # Predictor (affine scaling direction): target dX + W dS W = -X.
        v_aff = [-xj for xj in x]
        dx_a, dyf_a, dy_a, ds_a, dtau_a, dkappa_a = newton(v_aff, -tau * kappa)
        alpha_aff = min(1.0, max_step(dx_a, ds_a, dtau_a, dkappa_a))

        inner = sum(
            float(np.tensordot(x[j] + alpha_aff * dx_a[j], s_dual[j] + alpha_aff * ds_a[j]))
            for j in range(p)
        )
        mu_aff = (inner + (tau + alpha_aff * dtau_a) * (kappa + alpha_aff * dkappa_a)) / nu
        sigma = min(0.99, max(1e-8, (max(mu_aff, 0.0) / mu) ** 3))

        # Corrector: recentre and subtract the second-order term, both in the
        # scaled space where X and S share the spectrum lam.
        v_corr = []
        for j in range(p):
            r, rinv, lam = scalings[j]
            dx_hat = rinv @ dx_a[j] @ rinv.T
            ds_hat = r.T @ ds_a[j] @ r
            target = sigma * mu * np.eye(sizes[j]) - np.diag(lam * lam) - _sym(dx_hat @ ds_hat)
            denom = lam[:, None] + lam[None, :]
            v_hat = 2.0 * target / denom
            v_corr.append(r @ v_hat @ r.T)
        v_tau_corr = sigma * mu - tau * kappa - dtau_a * dkappa_a

        dx, dyf, dy, ds, dtau, dkappa = newton(v_corr, v_tau_corr)
        alpha = config.step_fraction * max_step(dx, ds, dtau, dkappa)
        alpha = min(alpha, 1.0)
        if not np.isfinite(alpha) or alpha <= config.min_step:
            status = NUMERICAL_FAILURE
            message = f"step length collapsed (alpha = {alpha:.2e})"
            break

        for j in range(p):
            x[j] = _sym(x[j] + alpha * dx[j])
            s_dual[j] = _sym(s_dual[j] + alpha * ds[j])
        y = y + alpha * dy
        y_free = y_free + alpha * dyf
        tau += alpha * dtau
        kappa += alpha * dkappa

        # The embedding is homogeneous, so iterates carry a free scale that
        # can drift; renormalize it away (all tracked quantities are ratios).
        scale = 0.5 * (tau + kappa)
        if scale > 0 and (scale > 10.0 or scale < 0.1):
            for j in range(p):
                x[j] /= scale
                s_dual[j] /= scale
            y /= scale
            y_free /= scale
            tau /= scale
            kappa /= scale
    else:
        iters = config.max_iter

    wall = time.perf_counter() - t_start

    if status in SOLVED_STATUSES:
        xs = [_sym(xj / tau) for xj in x]
        ss = [_sym(sj / tau) for sj in s_dual]
        min_eig = min(
            (float(np.linalg.eigvalsh(xj)[0]) for xj in xs if xj.size), default=0.0
        )
        internal_metrics["min_eigenvalue"] = min_eig
        sol = SdpSolution(
            status=status,
            blocks=xs,
            free=y_free / tau,
            y=y / tau,
            dual_blocks=ss,
            tau=tau,
            kappa=kappa,
            iterations=iters,
            wall_time=wall,
            primal_obj=internal_metrics["primal_objective"],
            dual_obj=internal_metrics["dual_objective"],
            metrics=internal_metrics,
            message=message,
        )
        # A solved status promises near-feasibility of the returned point;
        # downgrade if the embedding lied to us.
        if (
            internal_metrics["primal_residual"] > 10 * config.feas_tol
            or min_eig < -10 * config.feas_tol
        ):
            sol.status = NUMERICAL_FAILURE
            sol.message = "converged embedding failed the feasibility invariant"
        return sol

    if status in (PRIMAL_INFEASIBLE, DUAL_INFEASIBLE):
        return SdpSolution(
            status=status,
            blocks=[xj.copy() for xj in x],
            free=y_free.copy(),
            y=y.copy(),
            dual_blocks=[sj.copy() for sj in s_dual],
            tau=tau,
            kappa=kappa,
            iterations=iters,
            wall_time=wall,
            message=message,
        )

    return SdpSolution(
        status=status,
        blocks=[xj / max(tau, 1e-300) for xj in x],
        free=y_free / max(tau, 1e-300),
        y=y / max(tau, 1e-300),
        dual_blocks=[sj / max(tau, 1e-300) for sj in s_dual],
        tau=tau,
        kappa=kappa,
        iterations=iters,
        wall_time=wall,
        message=message or "iteration limit reached",
    )


def _solution_metrics(instance: SdpInstance, sol: SdpSolution) -> dict:
    m = instance.num_rows
    k = instance.num_free
    c_obj = instance.objective_matrices()
    c_free = instance.objective_free()
    eq = instance.apply_constraints(sol.blocks, sol.free) - instance.b
    primal_residual = float(np.max(np.abs(eq))) if m else 0.0

    dual_residual = 0.0
    for j, size in enumerate(instance.block_sizes):
        acc = np.zeros((size, size))
        for i in range(m):
            yi = sol.y[i]
            if yi == 0.0:
                continue
            for blk, r, c, v in instance.psd_entries[i]:
                if blk == j:
                    acc[r, c] += v * yi
                    if r != c:
                        acc[c, r] += v * yi
        resid = acc + sol.dual_blocks[j] - c_obj[j]
        dual_residual = max(dual_residual, float(np.max(np.abs(resid))))
    if k:
        ft_y = np.zeros(k)
        for i in range(m):
            for idx, v in instance.free_entries[i]:
                ft_y[idx] += v * sol.y[i]
        dual_residual = max(dual_residual, float(np.max(np.abs(ft_y - c_free))))

    min_eig = 0.0
    if instance.block_sizes:
        min_eig = min(
            float(np.linalg.eigvalsh(xj)[0]) if xj.size else 0.0 for xj in sol.blocks
        )
    pobj = instance.objective_value(sol.blocks, sol.free)
    dobj = float(instance.b @ sol.y) if m else 0.0
    return {
        "primal_residual": primal_residual,
        "dual_residual": dual_residual,
        "min_eigenvalue": min_eig,
        "duality_gap": abs(pobj - dobj),
        "primal_objective": pobj,
        "dual_objective": dobj,
    }


def residuals(instance: SdpInstance, sol: SdpSolution) -> dict:
    """Recompute feasibility metrics of a solution from the raw instance data.

    Independent of solver internals: only the stored primal/dual point and the
    instance's entry lists are used.
    """
    return _solution_metrics(instance, sol)
