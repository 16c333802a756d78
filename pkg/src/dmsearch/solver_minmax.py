"""Directional search on the worst component f(x) = max_i f_i(x).

A single iterate is kept.  An iteration succeeds when some poll direction
drops the worst component by more than (c/2) * stepsize^2; the first such
direction in set order is taken.  This is the multisearch loop specialized
to a singleton archive with a max-component acceptance test, and
minmax_update_rule exposes exactly that acceptance so the equivalence can
be exercised through the general solver.

squared_stepsize_budget gives the run-length-independent bound on the sum
of squared stepsizes; criticality_iteration_bound turns it into a worst-case
iteration count for driving the criticality measure to a target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Array, MultiObjective, ObjectiveValue, StepParams, evaluate
from .criticality import criticality, poll_criticality
from .directions import DirectionConfig, build_family, union_set
from .dominance import ParetoArchive, ParetoEntry
from .hypervolume import ReferenceTracker
from .solver_dms import (
    SUCCESS_POLL,
    UNSUCCESSFUL,
    IterationRecord,
    RunTrace,
)

__all__ = [
    "fmax",
    "MinMaxConfig",
    "minmax_run",
    "minmax_update_rule",
    "squared_stepsize_budget",
    "criticality_iteration_bound",
]


def fmax(value: ObjectiveValue | Array) -> float:
    """Worst component of an objective vector."""
    v = np.asarray(getattr(value, "values", value), dtype=np.float64)
    return float(np.max(v))


@dataclass(frozen=True)
class MinMaxConfig:
    step: StepParams = StepParams()
    c: float = 1.0  # sufficient-decrease constant: margin is (c/2) * alpha^2
    directions: DirectionConfig = DirectionConfig(kind="coordinate")
    max_iterations: int = 1000
    alpha_min: float = 1e-9
    track_criticality: bool = False
    epsilon: Optional[float] = None
    seed: int = 0
    best_improving: bool = False  # take the largest drop instead of the first
    direction_choice: str = "round-robin"

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"decrease constant must be positive, got {self.c}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive when set")
        if self.direction_choice not in ("round-robin", "random", "union"):
            raise ValueError(f"unknown direction choice {self.direction_choice!r}")


def minmax_update_rule(c: float):
    """Acceptance hook replicating the min-max instance inside the general
    solver: keep only the first candidate (in set order) whose worst
    component beats the center's by more than (c/2) * alpha^2."""

    def rule(
        archive: ParetoArchive,
        center: ParetoEntry,
        candidates: list[ParetoEntry],
        alpha: float,
    ):
        bar = fmax(center.value) - 0.5 * c * alpha * alpha
        for cand in candidates:
            if fmax(cand.value) < bar:
                return ParetoArchive([cand]), True, [cand.id]
        return archive, False, []

    return rule


def _config_echo(cfg: MinMaxConfig, obj: MultiObjective, problem_name: str) -> dict[str, str]:
    return {
        "solver": "minmax",
        "problem": problem_name,
        "n": str(obj.n),
        "m": str(obj.m),
        "alpha0": repr(cfg.step.alpha0),
        "beta1": repr(cfg.step.beta1),
        "beta2": repr(cfg.step.beta2),
        "gamma": repr(cfg.step.gamma),
        "c": repr(cfg.c),
        "directions": str(cfg.directions),
        "max_iterations": str(cfg.max_iterations),
        "alpha_min": repr(cfg.alpha_min),
        "epsilon": "" if cfg.epsilon is None else repr(cfg.epsilon),
        "seed": str(cfg.seed),
        "best_improving": str(cfg.best_improving).lower(),
        "direction_choice": cfg.direction_choice,
    }


def minmax_run(
    obj: MultiObjective, x0: Array, cfg: MinMaxConfig, problem_name: str = ""
) -> RunTrace:
    """Run the worst-component search from x0.

    All poll points are evaluated each iteration.  The trace mirrors the
    multisearch trace (singleton archive states) and additionally records
    the worst component at the iterate and the running sum of squared
    stepsizes.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if cfg.track_criticality and obj.jacobian is None:
        raise ValueError("criticality tracking needs a jacobian")
    if cfg.epsilon is not None and not cfg.track_criticality:
        raise ValueError("an epsilon stop needs track_criticality=True")

    family = build_family(cfg.directions, obj.n)
    if cfg.direction_choice == "union":
        family = [union_set(family, label=f"union[{cfg.directions}]")]
    dir_rng = np.random.default_rng(cfg.seed + 1)
    step = cfg.step

    trace = RunTrace(
        solver="minmax",
        problem_name=problem_name,
        direction_sets=list(family),
        config_echo=_config_echo(cfg, obj, problem_name),
    )
    tracker = ReferenceTracker(
        m=obj.m,
        declared_upper=None if obj.f_bounds is None else obj.f_bounds[1],
    )

    v0 = evaluate(obj, x0)
    if not v0.is_finite:
        raise ValueError("starting point must have a finite objective value")
    tracker.observe(v0.values)

    next_id = 0
    current = ParetoEntry(
        id=next_id, point=x0, value=v0.values, stepsize=step.alpha0, created_at=0
    )
    next_id += 1
    trace.entries[current.id] = current
    trace.archive_ids.append((current.id,))

    evals_before_loop = obj.evaluations
    hv_cache: Optional[float] = None
    cum_sq = 0.0
    stop_reason = "max_iterations"

    for k in range(cfg.max_iterations):
        alpha = current.stepsize

        crit_val: Optional[float] = None
        if cfg.track_criticality:
            crit_val = criticality(obj.jacobian(current.point)).value
            if cfg.epsilon is not None and crit_val <= cfg.epsilon:
                stop_reason = "epsilon"
                trace.final_criticality = crit_val
                break
        if alpha < cfg.alpha_min:
            stop_reason = "alpha_min"
            break

        if cfg.direction_choice == "round-robin":
            pick = k % len(family)
        else:
            pick = int(dir_rng.integers(len(family)))
        dset = family[pick]
        poll_crit_val: Optional[float] = None
        if cfg.track_criticality:
            poll_crit_val = poll_criticality(obj.jacobian(current.point), dset)

        margin = 0.5 * cfg.c * alpha * alpha
        fx = fmax(current.value)
        bar = fx - margin
        evals_at_start = obj.evaluations

        candidates = []
        for d in dset:
            pt = current.point + alpha * d
            val = evaluate(obj, pt)
            tracker.observe(val.values)
            candidates.append((pt, val))

        chosen: Optional[tuple[Array, ObjectiveValue]] = None
        chosen_worst = np.inf
        for pt, val in candidates:
            if not val.is_finite:
                continue
            worst = fmax(val.values)
            if worst < bar:
                if cfg.best_improving:
                    if worst < chosen_worst:
                        chosen, chosen_worst = (pt, val), worst
                else:
                    chosen = (pt, val)
                    break

        cum_sq += alpha * alpha
        if hv_cache is None:
            hv_cache = tracker.query(np.stack([current.value]))
        hv_before = hv_cache

        if chosen is None:
            status = UNSUCCESSFUL
            nxt = ParetoEntry(
                id=next_id,
                point=current.point,
                value=current.value,
                stepsize=step.beta2 * alpha,
                parent_id=current.id,
                created_at=k + 1,
            )
            hv_after = hv_before
        else:
            status = SUCCESS_POLL
            nxt = ParetoEntry(
                id=next_id,
                point=chosen[0],
                value=chosen[1].values,
                stepsize=step.gamma * alpha,
                parent_id=current.id,
                created_at=k + 1,
            )
            hv_after = tracker.query(np.stack([nxt.value]))
        next_id += 1
        hv_cache = hv_after
        trace.entries[nxt.id] = nxt
        trace.archive_ids.append((nxt.id,))
        trace.records.append(
            IterationRecord(
                k=k,
                status=status,
                iterate_id=current.id,
                stepsize=alpha,
                margin=margin,
                evaluations=obj.evaluations - evals_at_start,
                hv_before=hv_before,
                hv_after=hv_after,
                crit=crit_val,
                poll_crit=poll_crit_val,
                archive_size=1,
                direction_set=pick,
                fx=fx,
                cum_step_sq=cum_sq,
            )
        )
        current = nxt

    trace.stop_reason = stop_reason
    trace.reference_point = tracker.point() if tracker.frozen else None
    trace.evaluations_total = obj.evaluations - evals_before_loop + 1
    return trace


def squared_stepsize_budget(step: StepParams, c: float, f_x0: float, f_min: float) -> float:
    """Upper bound on the sum of squared stepsizes over any run.

    gamma^2 / (1 - beta2^2) * (alpha0^2 / gamma^2 + (2/c) * (f(x0) - f_min)).
    Requires f(x0) >= f_min.
    """
    if not c > 0:
        raise ValueError(f"decrease constant must be positive, got {c}")
    if f_x0 < f_min:
        raise ValueError(f"f(x0) = {f_x0} is below the declared lower bound {f_min}")
    g2 = step.gamma * step.gamma
    return g2 / (1.0 - step.beta2**2) * (step.alpha0**2 / g2 + (2.0 / c) * (f_x0 - f_min))


def criticality_iteration_bound(
    step: StepParams,
    c: float,
    f_x0: float,
    f_min: float,
    lipschitz_max: float,
    ratio_constant: float,
    epsilon: float,
) -> float:
    """Worst-case iteration count before the criticality measure falls to
    epsilon, given the agreement constant between the poll-restricted and
    full measures.

    2 (f(x0) - f_min) / (c alpha0^2)
        + budget * (L + c)^2 (ratio_constant + 1)^2 / (4 beta1^2) * epsilon^-2
    with budget the squared-stepsize budget.  epsilon must lie in (0, 1).
    """
    if not (0 < epsilon < 1):
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if lipschitz_max < 0 or ratio_constant < 0:
        raise ValueError("lipschitz_max and ratio_constant must be nonnegative")
    budget = squared_stepsize_budget(step, c, f_x0, f_min)
    head = 2.0 * (f_x0 - f_min) / (c * step.alpha0**2)
    tail = (
        budget
        * (lipschitz_max + c) ** 2
        * (ratio_constant + 1.0) ** 2
        / (4.0 * step.beta1**2)
        / (epsilon * epsilon)
    )
    return head + tail
