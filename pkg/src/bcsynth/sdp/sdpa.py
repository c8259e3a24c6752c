"""SDPA sparse format (.dat-s) writer.

The instance

    min <C, X> + c_f.y_f   s.t.  <A_i, X> + <f_i, y_f> = b_i,  X PSD

is emitted in the SDPA dual slot: constraint matrices F_i = A_i with
right-hand sides b_i on the c-line, and F_0 = -C so that SDPA's
``max <F_0, Y>`` matches our minimization.  Free scalars are encoded as
differences of paired entries in one trailing diagonal block (negative block
size), variable j appearing as +coef at position j and -coef at position
k + j.

Entries are written as ``matno blkno i j value`` with 1-based i <= j, sorted
by (matno, blkno, i, j); the writer is deterministic byte-for-byte.
"""

from __future__ import annotations

import numpy as np

from bcsynth.sdp.instance import SdpInstance


def _fmt(v: float) -> str:
    return repr(float(v))


def export_sdpa(instance: SdpInstance) -> str:
    m = instance.num_rows
    k = instance.num_free
    sizes = list(instance.block_sizes)
    blocks = [str(s) for s in sizes]
    if k:
        blocks.append(str(-2 * k))
    lp_block = len(sizes) + 1  # 1-based index of the free-variable LP block

    entries: list[tuple[int, int, int, int, float]] = []

    c_obj = instance.objective_matrices()
    c_free = instance.objective_free()
    for j, cmat in enumerate(c_obj):
        for r in range(sizes[j]):
            for c in range(r, sizes[j]):
                v = float(cmat[r, c])
                if v != 0.0:
                    entries.append((0, j + 1, r + 1, c + 1, -v))
    for idx in range(k):
        v = float(c_free[idx]) if k else 0.0
        if v != 0.0:
            entries.append((0, lp_block, idx + 1, idx + 1, -v))
            entries.append((0, lp_block, k + idx + 1, k + idx + 1, v))

    for i in range(m):
        acc: dict[tuple[int, int, int], float] = {}
        for blk, r, c, v in instance.psd_entries[i]:
            key = (blk + 1, r + 1, c + 1)
            acc[key] = acc.get(key, 0.0) + v
        for (blk, r, c), v in acc.items():
            if v != 0.0:
                entries.append((i + 1, blk, r, c, v))
        facc: dict[int, float] = {}
        for idx, v in instance.free_entries[i]:
            facc[idx] = facc.get(idx, 0.0) + v
        for idx in sorted(facc):
            v = facc[idx]
            if v != 0.0:
                entries.append((i + 1, lp_block, idx + 1, idx + 1, v))
                entries.append((i + 1, lp_block, k + idx + 1, k + idx + 1, -v))

    entries.sort(key=lambda e: e[:4])

    lines = [str(m), str(len(blocks)), " ".join(blocks)]
    lines.append(" ".join(_fmt(v) for v in instance.b))
    for matno, blkno, r, c, v in entries:
        lines.append(f"{matno} {blkno} {r} {c} {_fmt(v)}")
    return "\n".join(lines) + "\n"
