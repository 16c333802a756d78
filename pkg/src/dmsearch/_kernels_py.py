"""Pure-NumPy kernels; same contracts as the compiled module.

All inputs are float64 arrays: `values` is (k, m) row-per-objective-vector,
`u` is a single (m,) vector.  Masks are uint8.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def margin_dominated(values: np.ndarray, u: np.ndarray, a: float) -> bool:
    """Is u within margin a of the region dominated by some row of values?

    True iff there is a row w with u_i >= w_i - a for every component.
    """
    if values.shape[0] == 0:
        return False
    return bool(np.all(u >= values - a, axis=1).any())


def dominated_mask(values: np.ndarray, u: np.ndarray) -> np.ndarray:
    """mask[j] = 1 where u dominates row j (u <= row, u != row)."""
    if values.shape[0] == 0:
        return np.zeros(0, dtype=np.uint8)
    ge = np.all(values >= u, axis=1)
    gt = np.any(values > u, axis=1)
    return (ge & gt).astype(np.uint8)


def nondominated_mask(values: np.ndarray) -> np.ndarray:
    """mask[j] = 1 where no other row dominates row j."""
    k = values.shape[0]
    out = np.ones(k, dtype=np.uint8)
    for j in range(k):
        others = values
        ge = np.all(values[j] >= others, axis=1)
        gt = np.any(values[j] > others, axis=1)
        if np.any(ge & gt):
            out[j] = 0
    return out


def hv2d_sorted(values: np.ndarray, r0: float, r1: float) -> float:
    """Area of the union of boxes [row, r] for rows sorted by first column.

    Rows must satisfy row <= r componentwise (validated by the caller).
    """
    total = 0.0
    y_prev = r1
    for i in range(values.shape[0]):
        f0 = values[i, 0]
        f1 = values[i, 1]
        if f1 < y_prev:
            total += (r0 - f0) * (y_prev - f1)
            y_prev = f1
    return total
