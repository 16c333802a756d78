"""Shared value types for the direct-search solvers.

Points live in R^n, objective values in R^m with m >= 2.  Objective values
may carry +inf components (inadmissible evaluations); archive code upstream
is expected to drop those before insertion.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

Array = np.ndarray

__all__ = [
    "Array",
    "Point",
    "ObjectiveValue",
    "ForcingFunction",
    "StepParams",
    "MultiObjective",
    "forcing",
    "evaluate",
    "finite_difference_jacobian",
]


def _readonly(a: Array) -> Array:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Point:
    """A decision-space point; every coordinate must be finite."""

    coords: Array

    def __post_init__(self):
        c = _readonly(np.atleast_1d(self.coords))
        if c.ndim != 1:
            raise ValueError(f"point must be a vector, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("point has non-finite coordinates")
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class ObjectiveValue:
    """An objective vector of length m >= 2; entries finite or +inf."""

    values: Array

    def __post_init__(self):
        v = _readonly(np.atleast_1d(self.values))
        if v.ndim != 1 or v.shape[0] < 2:
            raise ValueError(f"objective value needs length >= 2, got shape {v.shape}")
        if np.any(np.isnan(v)) or np.any(v == -np.inf):
            raise ValueError("objective value entries must be finite or +inf")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class ForcingFunction:
    """Sufficient-decrease margin rho(t) = c * t**p with c > 0, p > 1.

    p > 1 makes the margin vanish faster than linearly as the stepsize
    shrinks, which is what lets small polls eventually succeed.
    """

    c: float = 1.0
    p: float = 2.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"forcing coefficient must be positive, got {self.c}")
        if not self.p > 1:
            raise ValueError(f"forcing exponent must exceed 1, got {self.p}")

    def __call__(self, t: float) -> float:
        return forcing(self, t)


def forcing(ff: ForcingFunction, t: float) -> float:
    """Evaluate the sufficient-decrease margin at stepsize t > 0."""
    if not t > 0:
        raise ValueError(f"forcing argument must be positive, got {t}")
    return ff.c * t**ff.p


@dataclass(frozen=True)
class StepParams:
    """Stepsize schedule: expand by gamma on success, contract within
    [beta1, beta2] on failure.  Requires 0 < beta1 <= beta2 < 1 <= gamma."""

    alpha0: float = 1.0
    beta1: float = 0.5
    beta2: float = 0.5
    gamma: float = 1.0

    def __post_init__(self):
        if not self.alpha0 > 0:
            raise ValueError(f"alpha0 must be positive, got {self.alpha0}")
        if not (0 < self.beta1 <= self.beta2 < 1):
            raise ValueError(
                f"need 0 < beta1 <= beta2 < 1, got beta1={self.beta1} beta2={self.beta2}"
            )
        if not self.gamma >= 1:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")


@dataclass(eq=False)
class MultiObjective:
    """A vector objective F: R^n -> R^m with optional analytic data.

    fn returns an array of length m.  jacobian, when given, returns the
    m x n matrix of gradients (one objective per row).  lipschitz_max is
    an upper bound on the gradient Lipschitz constants of all components
    over the region of interest; f_bounds = (lower, upper) bound every
    component over that region.

    Evaluations are counted; the counter is safe to bump from concurrent
    evaluation threads.
    """

    n: int
    m: int
    fn: Callable[[Array], Array]
    jacobian: Optional[Callable[[Array], Array]] = None
    lipschitz_max: Optional[float] = None
    f_bounds: Optional[tuple[float, float]] = None
    _evaluations: int = field(default=0, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"need at least two objectives, got m={self.m}")
        if self.f_bounds is not None and not self.f_bounds[0] <= self.f_bounds[1]:
            raise ValueError(f"invalid f_bounds {self.f_bounds}")

    @property
    def evaluations(self) -> int:
        return self._evaluations

    def reset_evaluations(self) -> None:
        with self._lock:
            self._evaluations = 0

    def evaluate(self, x: Array) -> ObjectiveValue:
        return evaluate(self, x)


def evaluate(obj: MultiObjective, x: Array) -> ObjectiveValue:
    """Evaluate obj at x, counting one evaluation of the full vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (obj.n,):
        raise ValueError(f"point has shape {x.shape}, objective expects ({obj.n},)")
    if not np.all(np.isfinite(x)):
        raise ValueError("cannot evaluate at a non-finite point")
    raw = np.asarray(obj.fn(x), dtype=np.float64)
    if raw.shape != (obj.m,):
        raise ValueError(f"objective returned shape {raw.shape}, expected ({obj.m},)")
    with obj._lock:
        obj._evaluations += 1
    return ObjectiveValue(raw)


def finite_difference_jacobian(obj: MultiObjective, x: Array, h: float = 1e-6) -> Array:
    """Central-difference estimate of the m x n Jacobian (no eval counting)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty((obj.m, obj.n))
    for j in range(obj.n):
        e = np.zeros(obj.n)
        e[j] = h
        out[:, j] = (np.asarray(obj.fn(x + e)) - np.asarray(obj.fn(x - e))) / (2 * h)
    return out
