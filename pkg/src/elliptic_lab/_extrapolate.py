"""Guarded iterated Aitken extrapolation for geometrically converging sequences.

Sequences produced on geometric ladders (doubling radii, octave-spaced sample
points) converge like L + C rho^k with locally constant rho, which Aitken's
delta-squared removes exactly.  Iteration is guarded: a level is accepted only
while the last-column correction keeps shrinking and its denominators stay
well conditioned, so noisy deep levels cannot destroy a good earlier estimate.
"""

from __future__ import annotations

import numpy as np


def _aitken_row(cur: list[float]) -> list[float]:
    nxt = []
    for i in range(len(cur) - 2):
        d1 = cur[i + 1] - cur[i]
        d2 = cur[i + 2] - cur[i + 1]
        den = d2 - d1
        if abs(den) <= 1e-13 * max(abs(cur[i + 2]), 1e-300):
            nxt.append(cur[i + 2])
        else:
            nxt.append(cur[i + 2] - d2 * d2 / den)
    return nxt


def aitken_limit(seq: np.ndarray, max_levels: int = 3) -> tuple[float, float]:
    """Limit estimate and residual estimate for one scalar sequence.

    The first transform is always applied when three terms exist; deeper levels
    are accepted only while the transformed row keeps flattening (its last
    internal difference shrinks), which stops noise amplification.  The
    returned error is the final row's internal difference.
    """
    s = [float(x) for x in np.asarray(seq, dtype=float)]
    if len(s) == 0:
        raise ValueError("empty sequence")
    best = s[-1]
    err = abs(s[-1] - s[-2]) if len(s) >= 2 else np.inf
    cur = s
    cons = err
    for level in range(max_levels):
        if len(cur) < 3:
            break
        nxt = _aitken_row(cur)
        new_cons = abs(nxt[-1] - nxt[-2]) if len(nxt) >= 2 else abs(nxt[-1] - cur[-1])
        if level > 0 and new_cons >= cons and np.isfinite(cons):
            break
        best = nxt[-1]
        err = new_cons
        cur = nxt
        cons = new_cons
    return best, err


def aitken_limit_rows(table: np.ndarray, valid: np.ndarray | None = None,
                      max_levels: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Columnwise guarded Aitken over a (levels, points) table.

    valid marks usable entries per (level, point); invalid leading levels are
    simply dropped for that point.  Returns (limits, errors) per point.
    """
    table = np.asarray(table, dtype=float)
    L, P = table.shape
    if valid is None:
        valid = np.ones_like(table, dtype=bool)
    limits = np.empty(P)
    errors = np.empty(P)
    for j in range(P):
        col = table[valid[:, j], j]
        if col.size == 0:
            limits[j] = np.nan
            errors[j] = np.inf
            continue
        limits[j], errors[j] = aitken_limit(col, max_levels=max_levels)
    return limits, errors
