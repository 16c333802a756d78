"""Benchmark problems with analytic gradients and declared bounds.

Every problem reports a gradient Lipschitz bound and componentwise value
bounds valid on the standard test box [-10, 10]^n, which is where the
bundled experiments keep their iterates.  Problems whose Pareto set is
known analytically also ship a membership oracle and a sampler for it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import Array, MultiObjective

__all__ = [
    "ProblemSpec",
    "dennis_woods_bi",
    "scaled_sphere",
    "quadratic_family",
    "get_problem",
    "list_problems",
    "TEST_BOX",
]

TEST_BOX = (-10.0, 10.0)


@dataclass(eq=False)
class ProblemSpec(MultiObjective):
    """A named MultiObjective plus optional Pareto-set metadata."""

    name: str = ""
    pareto_oracle: Optional[Callable[[Array, float], bool]] = None
    pareto_sampler: Optional[Callable[[np.random.Generator, int], Array]] = None


def _box_vertex_max(fn: Callable[[Array], float], n: int) -> float:
    """Max of a convex function over the vertices of the test box."""
    lo, hi = TEST_BOX
    best = -np.inf
    for mask in range(2**n):
        v = np.array([hi if (mask >> j) & 1 else lo for j in range(n)])
        best = max(best, float(fn(v)))
    return best


def _segment_distance(x: Array, a: Array, b: Array) -> float:
    ab = b - a
    t = float(np.clip((x - a) @ ab / (ab @ ab), 0.0, 1.0))
    return float(np.linalg.norm(x - (a + t * ab)))


def dennis_woods_bi() -> ProblemSpec:
    """Two half-squared-distance objectives to mirrored centers.

    f_i(x) = 0.5 ||x - c_i||^2 with c_1 = (-1, 1) and c_2 = (1, -1); both
    Hessians are the identity (Lipschitz bound 1) and the Pareto set is the
    straight segment between the two centers.
    """
    c1 = np.array([-1.0, 1.0])
    c2 = np.array([1.0, -1.0])

    def fn(x: Array) -> Array:
        return np.array([0.5 * np.sum((x - c1) ** 2), 0.5 * np.sum((x - c2) ** 2)])

    def jac(x: Array) -> Array:
        return np.stack([x - c1, x - c2])

    upper = max(
        _box_vertex_max(lambda v: 0.5 * np.sum((v - c1) ** 2), 2),
        _box_vertex_max(lambda v: 0.5 * np.sum((v - c2) ** 2), 2),
    )

    def oracle(x: Array, tol: float) -> bool:
        return _segment_distance(np.asarray(x, dtype=float), c1, c2) <= tol

    def sampler(rng: np.random.Generator, k: int) -> Array:
        t = rng.uniform(0.0, 1.0, size=k)
        return c1[None, :] + t[:, None] * (c2 - c1)[None, :]

    return ProblemSpec(
        n=2,
        m=2,
        fn=fn,
        jacobian=jac,
        lipschitz_max=1.0,
        f_bounds=(0.0, upper),
        name="dennis_woods",
        pareto_oracle=oracle,
        pareto_sampler=sampler,
    )


def _simplex_projection_distance(x: Array) -> float:
    """Distance from x to the standard simplex {w >= 0, sum w = 1}."""
    x = np.asarray(x, dtype=float)
    # sort-based projection onto the simplex
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(x) + 1)
    rho = np.max(np.nonzero(u - css / idx > 0)[0]) + 1
    theta = css[rho - 1] / rho
    proj = np.clip(x - theta, 0.0, None)
    return float(np.linalg.norm(x - proj))


def scaled_sphere(m: int) -> ProblemSpec:
    """f_i(x) = 0.5 ||x - e_i||^2 in R^m; Pareto set = simplex conv{e_i}."""
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    n = m
    centers = np.eye(n)

    def fn(x: Array) -> Array:
        return 0.5 * np.sum((x[None, :] - centers) ** 2, axis=1)

    def jac(x: Array) -> Array:
        return x[None, :] - centers

    upper = max(
        _box_vertex_max(lambda v, i=i: 0.5 * np.sum((v - centers[i]) ** 2), n)
        for i in range(m)
    )

    def oracle(x: Array, tol: float) -> bool:
        return _simplex_projection_distance(x) <= tol

    def sampler(rng: np.random.Generator, k: int) -> Array:
        return rng.dirichlet(np.ones(m), size=k)

    return ProblemSpec(
        n=n,
        m=m,
        fn=fn,
        jacobian=jac,
        lipschitz_max=1.0,
        f_bounds=(0.0, upper),
        name=f"sphere{m}",
        pareto_oracle=oracle,
        pareto_sampler=sampler,
    )


def quadratic_family(seed: int, n: int = 2, m: int = 2) -> ProblemSpec:
    """Random strictly convex quadratics with exact curvature bounds.

    Each component is 0.5 (x-b_i)^T A_i (x-b_i) with eigenvalues drawn from
    [0.5, 3]; the Lipschitz bound is the largest eigenvalue used and the
    value bounds come from maximizing each convex component over the test
    box vertices.
    """
    rng = np.random.default_rng(seed)
    mats = []
    centers = []
    for _ in range(m):
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        eig = rng.uniform(0.5, 3.0, size=n)
        mats.append(q @ np.diag(eig) @ q.T)
        centers.append(rng.uniform(-2.0, 2.0, size=n))
    mats = [0.5 * (a + a.T) for a in mats]  # keep symmetry exact
    # curvature bound from the matrices actually used, with float headroom
    lips = max(float(np.linalg.eigvalsh(a).max()) for a in mats) * (1 + 1e-12)

    def fn(x: Array) -> Array:
        return np.array(
            [0.5 * float((x - b) @ a @ (x - b)) for a, b in zip(mats, centers)]
        )

    def jac(x: Array) -> Array:
        return np.stack([a @ (x - b) for a, b in zip(mats, centers)])

    upper = max(
        _box_vertex_max(lambda v, a=a, b=b: 0.5 * float((v - b) @ a @ (v - b)), n)
        for a, b in zip(mats, centers)
    )

    oracle = None
    sampler = None
    if m == 2:
        # Pareto points solve the weighted problem: x*(w) of w A1 + (1-w) A2
        def solution_path(w: float) -> Array:
            lhs = w * mats[0] + (1 - w) * mats[1]
            rhs = w * mats[0] @ centers[0] + (1 - w) * mats[1] @ centers[1]
            return np.linalg.solve(lhs, rhs)

        grid = np.linspace(0.0, 1.0, 2001)
        path = np.stack([solution_path(w) for w in grid])

        def oracle(x: Array, tol: float) -> bool:
            return bool(np.min(np.linalg.norm(path - np.asarray(x)[None, :], axis=1)) <= tol)

        def sampler(rng2: np.random.Generator, k: int) -> Array:
            w = rng2.uniform(0.0, 1.0, size=k)
            return np.stack([solution_path(v) for v in w])

    return ProblemSpec(
        n=n,
        m=m,
        fn=fn,
        jacobian=jac,
        lipschitz_max=lips,
        f_bounds=(0.0, upper),
        name=f"quad{n}-{seed}" if m == 2 else f"quad{n}m{m}-{seed}",
        pareto_oracle=oracle,
        pareto_sampler=sampler,
    )


_PATTERNS = [
    ("dennis_woods", "the mirrored-centers biobjective with identity Hessians"),
    ("sphere<M>", "M half-squared-distance objectives to the canonical basis, n = M"),
    ("quad<N>-<SEED>", "random convex biobjective quadratics in R^N"),
    ("quad<N>m<M>-<SEED>", "random convex quadratics, M objectives in R^N"),
]


def get_problem(name: str) -> ProblemSpec:
    """Build a registered problem from its name."""
    if name == "dennis_woods":
        return dennis_woods_bi()
    m = re.fullmatch(r"sphere(\d+)", name)
    if m:
        return scaled_sphere(int(m.group(1)))
    m = re.fullmatch(r"quad(\d+)-(\d+)", name)
    if m:
        return quadratic_family(int(m.group(2)), n=int(m.group(1)), m=2)
    m = re.fullmatch(r"quad(\d+)m(\d+)-(\d+)", name)
    if m:
        return quadratic_family(int(m.group(3)), n=int(m.group(1)), m=int(m.group(2)))
    raise ValueError(f"unknown problem {name!r}")


def list_problems() -> list[tuple[str, str]]:
    return list(_PATTERNS)
