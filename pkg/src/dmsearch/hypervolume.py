"""Dominated hypervolume with respect to a fixed reference point.

hypervolume(values, r) is the Lebesgue measure of the union of boxes
[v, r] over the given values.  Exact computation is supported for two to
four objectives: a sorted sweep at m = 2 and a dimension-sweep recursion
(slabs along the last coordinate) at m = 3 and 4.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .core import Array

__all__ = [
    "hypervolume",
    "hypervolume_increase",
    "ReferenceTracker",
]

MAX_EXACT_M = 4


def _as_matrix(values) -> np.ndarray:
    rows = [np.asarray(getattr(v, "values", v), dtype=np.float64) for v in values]
    if not rows:
        return np.zeros((0, 0))
    return np.ascontiguousarray(np.stack(rows))


def hypervolume(values, r: Array) -> float:
    """Measure of the region dominated by `values` and bounded by r.

    Every value must satisfy v <= r componentwise; a value exceeding r in
    any component is an error rather than a silent clamp.  The empty set
    has hypervolume 0.
    """
    r = np.asarray(r, dtype=np.float64)
    vals = _as_matrix(values)
    if vals.shape[0] == 0:
        return 0.0
    m = vals.shape[1]
    if r.shape != (m,):
        raise ValueError(f"reference point shape {r.shape} does not match width {m}")
    if m > MAX_EXACT_M:
        raise ValueError(f"exact hypervolume supports m <= {MAX_EXACT_M}, got m = {m}")
    if m < 2:
        raise ValueError("hypervolume needs at least two objectives")
    bad = np.any(vals > r, axis=1)
    if bad.any():
        raise ValueError(
            f"value at index {int(np.argmax(bad))} exceeds the reference point"
        )
    return _hv(vals, r)


def _hv(vals: np.ndarray, r: np.ndarray) -> float:
    m = vals.shape[1]
    if m == 2:
        order = np.lexsort((vals[:, 1], vals[:, 0]))
        return float(kernels.hv2d_sorted(np.ascontiguousarray(vals[order]), r[0], r[1]))
    # slab decomposition along the last coordinate
    keep = kernels.nondominated_mask(vals).astype(bool)
    vals = vals[keep]
    z = np.unique(vals[:, -1])
    total = 0.0
    for i, zi in enumerate(z):
        depth = (z[i + 1] if i + 1 < len(z) else r[-1]) - zi
        if depth <= 0:
            continue
        slab = vals[vals[:, -1] <= zi, :-1]
        total += depth * _hv(np.ascontiguousarray(slab), r[:-1])
    return float(total)


def hypervolume_increase(before: float, after: float) -> float:
    return after - before


@dataclass
class ReferenceTracker:
    """Owns the reference point for one run and answers hypervolume queries.

    With declared bounds the point is (upper, ..., upper) from the start.
    Otherwise it is the componentwise max of every value observed so far
    plus a fixed margin, frozen at the first query; a later value beyond
    the frozen point makes the query fail rather than move the goalposts.
    """

    m: int
    declared_upper: Optional[float] = None
    margin: float = 1.0
    _point: Optional[np.ndarray] = None
    _pending: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.declared_upper is not None:
            self._point = np.full(self.m, float(self.declared_upper))

    @property
    def frozen(self) -> bool:
        return self._point is not None

    def observe(self, value: Array) -> None:
        """Feed one evaluated value into the pre-freeze running max."""
        if self._point is not None:
            return
        v = np.asarray(value, dtype=np.float64)
        finite = np.where(np.isfinite(v), v, -np.inf)
        if self._pending is None:
            self._pending = finite.copy()
        else:
            np.maximum(self._pending, finite, out=self._pending)

    def point(self) -> np.ndarray:
        if self._point is None:
            if self._pending is None:
                raise ValueError("no values observed; reference point undefined")
            self._point = self._pending + self.margin
        return self._point

    def query(self, values) -> float:
        return hypervolume(values, self.point())
