"""Poll direction sets: coordinate, rotated, and random families.

A polling family is a list of positive spanning sets; the solver picks one
set per iteration (round-robin by default).  Rotated families exist for
n = 2 only: family(l) holds 2**(l-1) copies of the +-coordinate basis, the
i-th rotated by i * pi / 2**l.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .core import Array

__all__ = [
    "PositiveSpanningSet",
    "is_positive_spanning",
    "coordinate_set",
    "rotated_family",
    "random_dense_set",
    "DirectionConfig",
    "parse_directions",
    "build_family",
    "union_set",
]

UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class PositiveSpanningSet:
    """Unit-norm directions, rows of `directions`, that positively span R^n."""

    directions: Array
    label: str = ""

    def __post_init__(self):
        d = np.array(self.directions, dtype=np.float64, copy=True)
        if d.ndim != 2:
            raise ValueError(f"directions must be a (k, n) matrix, got shape {d.shape}")
        norms = np.linalg.norm(d, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
            raise ValueError("directions must have unit norm")
        if not is_positive_spanning(d):
            raise ValueError("directions do not positively span the space")
        d.setflags(write=False)
        object.__setattr__(self, "directions", d)

    @property
    def n(self) -> int:
        return self.directions.shape[1]

    def __len__(self) -> int:
        return self.directions.shape[0]

    def __iter__(self):
        return iter(self.directions)


def is_positive_spanning(directions: Array) -> bool:
    """Check that nonnegative combinations of the rows cover all of R^n.

    Equivalent test: the rows span R^n linearly and zero is a strictly
    positive combination of them, phrased as a linear feasibility problem.
    """
    d = np.asarray(directions, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] == 0:
        return False
    k, n = d.shape
    if np.linalg.matrix_rank(d) < n:
        return False
    if k < n + 1:
        return False
    res = linprog(
        c=np.zeros(k),
        A_eq=d.T,
        b_eq=np.zeros(n),
        bounds=[(1.0, None)] * k,
        method="highs",
    )
    return bool(res.status == 0)


def coordinate_set(n: int) -> PositiveSpanningSet:
    """The 2n unit coordinate directions e_1..e_n, -e_1..-e_n in order."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    eye = np.eye(n)
    return PositiveSpanningSet(np.vstack([eye, -eye]), label="coordinate")


def rotated_family(l: int) -> list[PositiveSpanningSet]:
    """2**(l-1) rotated copies of the plane coordinate basis (n = 2 only).

    Set i is the coordinate basis rotated by i * theta with theta = pi/2**l,
    so set 0 is always the plain coordinate basis and the union over sets
    covers every multiple of theta around the circle.
    """
    if l < 1:
        raise ValueError(f"rotation level must be >= 1, got {l}")
    theta = np.pi / 2**l
    base = coordinate_set(2).directions
    out = []
    for i in range(2 ** (l - 1)):
        a = i * theta
        rot = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
        out.append(PositiveSpanningSet(base @ rot.T, label=f"rotated({l})#{i}"))
    return out


def random_dense_set(n: int, count: int, seed: int) -> PositiveSpanningSet:
    """`count` uniform unit directions; if they fail to span positively,
    the negative of their mean is appended (normalized)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, n))
    d = g / np.linalg.norm(g, axis=1, keepdims=True)
    if not is_positive_spanning(d):
        mean = d.mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0:
            extra = -d[0]
        else:
            extra = -mean / norm
        d = np.vstack([d, extra])
    return PositiveSpanningSet(d, label=f"random({count},{seed})")


@dataclass(frozen=True)
class DirectionConfig:
    kind: str  # "coordinate" | "rotated" | "random"
    level: int = 1
    count: int = 8
    seed: int = 0

    def __str__(self) -> str:
        if self.kind == "coordinate":
            return "coordinate"
        if self.kind == "rotated":
            return f"rotated({self.level})"
        return f"random({self.count},{self.seed})"


def parse_directions(text: str) -> DirectionConfig:
    """Parse "coordinate", "rotated(L)", or "random(COUNT,SEED)"."""
    text = text.strip()
    if text == "coordinate":
        return DirectionConfig(kind="coordinate")
    m = re.fullmatch(r"rotated\((\d+)\)", text)
    if m:
        return DirectionConfig(kind="rotated", level=int(m.group(1)))
    m = re.fullmatch(r"random\((\d+)\s*,\s*(\d+)\)", text)
    if m:
        return DirectionConfig(kind="random", count=int(m.group(1)), seed=int(m.group(2)))
    raise ValueError(f"cannot parse direction family {text!r}")


def build_family(cfg: DirectionConfig, n: int) -> list[PositiveSpanningSet]:
    if cfg.kind == "coordinate":
        return [coordinate_set(n)]
    if cfg.kind == "rotated":
        if n != 2:
            raise ValueError(f"rotated families are defined for n = 2 only, got n = {n}")
        return rotated_family(cfg.level)
    if cfg.kind == "random":
        return [random_dense_set(n, cfg.count, cfg.seed)]
    raise ValueError(f"unknown direction kind {cfg.kind!r}")


def union_set(sets: list[PositiveSpanningSet], label: str = "union") -> PositiveSpanningSet:
    """Merge a family into one positive spanning set, dropping duplicates."""
    if not sets:
        raise ValueError("need at least one set")
    rows: list[Array] = []
    for s in sets:
        for d in s.directions:
            if not any(np.allclose(d, kept, atol=UNIT_NORM_TOL) for kept in rows):
                rows.append(d)
    return PositiveSpanningSet(np.array(rows), label=label)
