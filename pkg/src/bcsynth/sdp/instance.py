"""Block-structured SDP instances with linear equality rows.

Standard form:

    find    X_1, ..., X_p PSD,  y in R^k free
    s.t.    sum_j <A_ij, X_j> + <f_i, y> = b_i        (i = 1..m)
    min     w * sum_j trace(X_j)                      (w = 0 for pure feasibility)

Row data is stored sparsely.  A PSD entry (block, r, c, v) with r <= c stands
for the symmetric pair A[r, c] = A[c, r] = v, so an off-diagonal entry
contributes 2*v*X[r, c] to <A, X>.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from bcsynth.poly import Exponent


@dataclass(frozen=True)
class BlockInfo:
    size: int
    constraint: str
    generator: str
    basis: tuple[Exponent, ...]  # monomial basis of the Gram form


@dataclass(frozen=True)
class MultiplierInfo:
    """How one multiplier of one constraint is laid out in the instance."""

    constraint: str
    generator: str
    kind: str  # "sos" | "free"
    block: Optional[int] = None  # PSD block index (sos)
    free_start: int = 0  # first free-variable index (free)
    basis: tuple[Exponent, ...] = ()


@dataclass
class SdpInstance:
    block_sizes: list[int]
    blocks: list[BlockInfo]
    free_names: list[str]
    b: np.ndarray
    # psd_entries[i] is the list of (block, r, c, v) for row i, r <= c.
    psd_entries: list[list[tuple[int, int, int, float]]]
    # free_entries[i] is the list of (free_index, v) for row i.
    free_entries: list[list[tuple[int, float]]]
    row_labels: list[tuple[str, Exponent]]
    trace_weight: float = 1.0
    multipliers: list[MultiplierInfo] = dc_field(default_factory=list)
    constraint_rows: dict[str, tuple[int, int]] = dc_field(default_factory=dict)
    # Explicit objective data overrides trace_weight when present.
    obj_blocks: Optional[list[np.ndarray]] = None
    obj_free: Optional[np.ndarray] = None

    @property
    def num_rows(self) -> int:
        return len(self.b)

    @property
    def num_free(self) -> int:
        return len(self.free_names)

    def summary(self) -> dict:
        return {
            "rows": self.num_rows,
            "rows_per_constraint": {
                label: hi - lo for label, (lo, hi) in self.constraint_rows.items()
            },
            "block_sizes": list(self.block_sizes),
            "free_vars": self.num_free,
        }

    # -- dense views (small instances, tests, residual checks) ---------------

    def row_matrix(self, i: int, block: int) -> np.ndarray:
        s = self.block_sizes[block]
        a = np.zeros((s, s))
        for blk, r, c, v in self.psd_entries[i]:
            if blk == block:
                a[r, c] += v
                if r != c:
                    a[c, r] += v
        return a

    def free_row(self, i: int) -> np.ndarray:
        f = np.zeros(self.num_free)
        for k, v in self.free_entries[i]:
            f[k] += v
        return f

    def apply_constraints(self, block_mats: list[np.ndarray], free_vals: np.ndarray) -> np.ndarray:
        """Evaluate the constraint map at a primal point."""
        out = np.zeros(self.num_rows)
        for i in range(self.num_rows):
            total = 0.0
            for blk, r, c, v in self.psd_entries[i]:
                total += v * block_mats[blk][r, c] * (1.0 if r == c else 2.0)
            for k, v in self.free_entries[i]:
                total += v * free_vals[k]
            out[i] = total
        return out

    def objective_matrices(self) -> list[np.ndarray]:
        if self.obj_blocks is not None:
            return [np.asarray(c, dtype=float) for c in self.obj_blocks]
        return [self.trace_weight * np.eye(s) for s in self.block_sizes]

    def objective_free(self) -> np.ndarray:
        if self.obj_free is not None:
            return np.asarray(self.obj_free, dtype=float)
        return np.zeros(self.num_free)

    def objective_value(self, block_mats: list[np.ndarray], free_vals=None) -> float:
        total = sum(
            float(np.tensordot(c, x))
            for c, x in zip(self.objective_matrices(), block_mats)
        )
        if free_vals is not None and self.num_free:
            total += float(self.objective_free() @ np.asarray(free_vals))
        return total
