"""First-order criticality measures for smooth multiobjective problems.

criticality(G) returns the size of the steepest common descent: the negative
of min over unit directions d of max_i g_i . d.  By duality this equals the
norm of the shortest convex combination of the gradient rows, which is what
gets computed: a closed form for two rows, Frank-Wolfe with away steps on
the simplex otherwise.  The measure is zero exactly at Pareto critical
points and nonnegative everywhere.

poll_criticality(G, D) is the same quantity with d restricted to a finite
direction set; it can be negative when no poll direction descends in every
component at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Array
from .directions import PositiveSpanningSet

__all__ = [
    "CriticalityReport",
    "criticality",
    "poll_criticality",
    "criticality_ratio",
    "min_norm_convex_closed_form",
    "min_norm_convex_fw",
]

FW_GAP_TOL = 1e-10
FW_MAX_ITERS = 100_000
ZERO_DIRECTION_TOL = 1e-14


@dataclass(frozen=True)
class CriticalityReport:
    """value >= 0; direction is the unit steepest common descent (zero at
    critical points); weights are the minimizing simplex coefficients."""

    value: float
    direction: Array
    weights: Array
    poll_value: Optional[float] = None
    ratio: Optional[float] = None


def _check_gradients(gradients: Array) -> np.ndarray:
    G = np.asarray(gradients, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] < 1:
        raise ValueError(f"gradients must be an (m, n) matrix, got shape {G.shape}")
    if not np.all(np.isfinite(G)):
        raise ValueError("gradients must be finite")
    return G


def min_norm_convex_closed_form(G: Array) -> tuple[float, np.ndarray]:
    """Exact minimizer of ||w g1 + (1-w) g2|| over w in [0, 1] (m = 2)."""
    G = _check_gradients(G)
    if G.shape[0] != 2:
        raise ValueError("closed form requires exactly two gradients")
    g1, g2 = G[0], G[1]
    diff = g1 - g2
    denom = float(diff @ diff)
    if denom == 0.0:
        w = 0.5
    else:
        w = float(np.clip((g2 @ (g2 - g1)) / denom, 0.0, 1.0))
    weights = np.array([w, 1.0 - w])
    combo = w * g1 + (1.0 - w) * g2
    return float(np.linalg.norm(combo)), weights


def min_norm_convex_fw(
    G: Array, gap_tol: float = FW_GAP_TOL, max_iters: int = FW_MAX_ITERS
) -> tuple[float, np.ndarray]:
    """Frank-Wolfe with away steps for min ||G^T w|| over the simplex.

    Minimizes the quadratic 0.5 * w^T M w with M = G G^T, stopping when the
    Frank-Wolfe duality gap drops to gap_tol.  Exact line search, so every
    iteration is monotone.
    """
    G = _check_gradients(G)
    m = G.shape[0]
    M = G @ G.T
    norms = np.linalg.norm(G, axis=1)
    w = np.zeros(m)
    w[int(np.argmin(norms))] = 1.0
    for _ in range(max_iters):
        grad = M @ w
        s = int(np.argmin(grad))
        gap = float(w @ grad - grad[s])
        if gap <= gap_tol:
            break
        support = np.nonzero(w > 0)[0]
        a = int(support[np.argmax(grad[support])])
        fw_dir = -w.copy()
        fw_dir[s] += 1.0
        away_dir = w.copy()
        away_dir[a] -= 1.0
        if -(grad @ fw_dir) >= -(grad @ away_dir):
            d, step_max = fw_dir, 1.0
        else:
            wa = w[a]
            d, step_max = away_dir, wa / (1.0 - wa) if wa < 1.0 else 0.0
        if step_max <= 0:
            break
        curv = float(d @ M @ d)
        if curv <= 0:
            step = step_max
        else:
            step = min(step_max, max(0.0, float(-(grad @ d) / curv)))
        if step == 0.0:
            break
        w = w + step * d
        np.clip(w, 0.0, None, out=w)
        w /= w.sum()
    combo = G.T @ w
    return float(np.linalg.norm(combo)), w


def criticality(gradients: Array, gap_tol: float = FW_GAP_TOL) -> CriticalityReport:
    """Measure how far from Pareto critical the gradient rows are."""
    G = _check_gradients(gradients)
    if G.shape[0] == 1:
        value = float(np.linalg.norm(G[0]))
        weights = np.array([1.0])
    elif G.shape[0] == 2:
        value, weights = min_norm_convex_closed_form(G)
    else:
        value, weights = min_norm_convex_fw(G, gap_tol=gap_tol)
    combo = G.T @ weights
    scale = 1.0 + float(np.max(np.linalg.norm(G, axis=1), initial=0.0))
    if value <= ZERO_DIRECTION_TOL * scale:
        direction = np.zeros(G.shape[1])
    else:
        direction = -combo / value
    return CriticalityReport(value=value, direction=direction, weights=weights)


def poll_criticality(gradients: Array, dset: PositiveSpanningSet | Array) -> float:
    """Criticality restricted to a finite direction set (may be negative)."""
    G = _check_gradients(gradients)
    D = dset.directions if isinstance(dset, PositiveSpanningSet) else np.asarray(dset)
    if D.ndim != 2 or D.shape[0] == 0:
        raise ValueError("direction set must be a nonempty (k, n) matrix")
    if D.shape[1] != G.shape[1]:
        raise ValueError(f"direction width {D.shape[1]} does not match gradients {G.shape[1]}")
    worst_per_dir = (G @ D.T).max(axis=0)
    return float(-worst_per_dir.min())


def criticality_ratio(value: float, poll_value: float) -> Optional[float]:
    """Relative gap |poll - full| / poll, or None when poll_value <= 0.

    None marks the regimes where the poll set sees no common descent at all;
    callers treat it as "no estimate", not as an error.
    """
    if poll_value <= 0:
        return None
    return abs(poll_value - value) / poll_value
