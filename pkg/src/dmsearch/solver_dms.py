"""Direct multisearch: iterate selection, optional search step, directional
poll, sufficient-decrease archive update.

Every iteration is logged as an IterationRecord with the data the checker
needs afterwards: stepsize and margin, hypervolume before/after, criticality
of the selected iterate, poll-restricted criticality of the direction set
actually used, and evaluation counts.  Archive membership per iteration and
parent links on every entry make the generation chains reconstructible.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Array, ForcingFunction, MultiObjective, StepParams, evaluate, forcing
from .criticality import criticality, poll_criticality
from .directions import (
    DirectionConfig,
    PositiveSpanningSet,
    build_family,
    rotated_family,
    union_set,
)
from .dominance import ParetoArchive, ParetoEntry, filter_insert, make_selection
from .hypervolume import ReferenceTracker

__all__ = [
    "DmsConfig",
    "IterationRecord",
    "RunTrace",
    "dms_run",
    "LinkedSequenceStats",
    "linked_sequences",
    "count_iteration_sets",
]

# archive update hook: (archive, center, candidates, stepsize) ->
# (new archive, changed, accepted ids).  The default accepts everything
# that clears the forcing margin; solver instances may substitute their
# own acceptance (see solver_minmax.minmax_update_rule).
UpdateRule = Callable[
    [ParetoArchive, ParetoEntry, list[ParetoEntry], float],
    tuple[ParetoArchive, bool, list[int]],
]

SUCCESS_SEARCH = "successful-search"
SUCCESS_POLL = "successful-poll"
UNSUCCESSFUL = "unsuccessful"


@dataclass(frozen=True)
class DmsConfig:
    step: StepParams = StepParams()
    forcing: ForcingFunction = ForcingFunction()
    directions: DirectionConfig = DirectionConfig(kind="coordinate")
    selection: str = "largest-stepsize"
    search_step: Optional[Callable[[ParetoArchive, float], Sequence[Array]]] = None
    max_iterations: int = 1000
    alpha_min: float = 1e-9
    track_criticality: bool = False
    epsilon: Optional[float] = None
    seed: int = 0
    opportunistic: bool = False
    direction_choice: str = "round-robin"  # or "random" / "union"
    escalate_after: Optional[int] = None  # bump rotated level after N straight failures
    update_rule: Optional[UpdateRule] = None

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.alpha_min < 0:
            raise ValueError("alpha_min must be nonnegative")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive when set")
        if self.direction_choice not in ("round-robin", "random", "union"):
            raise ValueError(f"unknown direction choice {self.direction_choice!r}")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    status: str
    iterate_id: int
    stepsize: float
    margin: float
    evaluations: int
    hv_before: float
    hv_after: float
    crit: Optional[float]
    poll_crit: Optional[float]
    archive_size: int
    direction_set: int  # index into RunTrace.direction_sets, -1 if no poll
    fx: Optional[float] = None  # min-max runs: max component at the iterate
    cum_step_sq: Optional[float] = None  # min-max runs: running sum of stepsize^2


@dataclass
class RunTrace:
    solver: str
    problem_name: str
    records: list[IterationRecord] = field(default_factory=list)
    entries: dict[int, ParetoEntry] = field(default_factory=dict)
    archive_ids: list[tuple[int, ...]] = field(default_factory=list)
    direction_sets: list[PositiveSpanningSet] = field(default_factory=list)
    reference_point: Optional[np.ndarray] = None
    stop_reason: str = ""
    final_criticality: Optional[float] = None
    evaluations_total: int = 0
    config_echo: dict[str, str] = field(default_factory=dict)

    @property
    def final_archive(self) -> list[ParetoEntry]:
        return [self.entries[i] for i in self.archive_ids[-1]]

    def iterations(self) -> int:
        return len(self.records)


def _config_echo(cfg: DmsConfig, obj: MultiObjective, problem_name: str) -> dict[str, str]:
    return {
        "solver": "dms",
        "problem": problem_name,
        "n": str(obj.n),
        "m": str(obj.m),
        "alpha0": repr(cfg.step.alpha0),
        "beta1": repr(cfg.step.beta1),
        "beta2": repr(cfg.step.beta2),
        "gamma": repr(cfg.step.gamma),
        "forcing_c": repr(cfg.forcing.c),
        "forcing_p": repr(cfg.forcing.p),
        "directions": str(cfg.directions),
        "selection": cfg.selection,
        "max_iterations": str(cfg.max_iterations),
        "alpha_min": repr(cfg.alpha_min),
        "epsilon": "" if cfg.epsilon is None else repr(cfg.epsilon),
        "seed": str(cfg.seed),
        "opportunistic": str(cfg.opportunistic).lower(),
        "direction_choice": cfg.direction_choice,
        "search": "none" if cfg.search_step is None else "custom",
    }


def dms_run(
    obj: MultiObjective, x0: Array, cfg: DmsConfig, problem_name: str = ""
) -> RunTrace:
    """Run the multisearch loop from x0 until a termination rule fires.

    Termination: max_iterations, selected stepsize below alpha_min, or (when
    criticality tracking is on) criticality of the selected iterate at or
    below cfg.epsilon; the triggering iteration is not executed.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if cfg.track_criticality and obj.jacobian is None:
        raise ValueError("criticality tracking needs a jacobian")
    if cfg.epsilon is not None and not cfg.track_criticality:
        raise ValueError("an epsilon stop needs track_criticality=True")

    family = build_family(cfg.directions, obj.n)
    if cfg.direction_choice == "union":
        family = [union_set(family, label=f"union[{cfg.directions}]")]
    selection = make_selection(cfg.selection, cfg.seed)
    dir_rng = np.random.default_rng(cfg.seed + 1)
    rho = cfg.forcing
    step = cfg.step

    trace = RunTrace(
        solver="dms",
        problem_name=problem_name,
        direction_sets=list(family),
        config_echo=_config_echo(cfg, obj, problem_name),
    )
    set_offset = 0  # index of family[0] within trace.direction_sets

    tracker = ReferenceTracker(
        m=obj.m,
        declared_upper=None if obj.f_bounds is None else obj.f_bounds[1],
    )

    v0 = evaluate(obj, x0)
    if not v0.is_finite:
        raise ValueError("starting point must have a finite objective value")
    tracker.observe(v0.values)

    next_id = 0
    entry0 = ParetoEntry(
        id=next_id, point=x0, value=v0.values, stepsize=step.alpha0, created_at=0
    )
    next_id += 1
    archive = ParetoArchive([entry0])
    trace.entries[entry0.id] = entry0
    trace.archive_ids.append(archive.ids)

    if cfg.update_rule is not None:
        update_rule = cfg.update_rule
    else:

        def update_rule(arch, center, cands, alpha):
            return filter_insert(arch, cands, forcing(rho, alpha))

    hv_cache: Optional[float] = None
    evals_before_loop = obj.evaluations
    fails_in_a_row = 0
    rotated_level = cfg.directions.level
    stop_reason = "max_iterations"

    for k in range(cfg.max_iterations):
        center = selection.select(archive)
        alpha = center.stepsize

        crit_val: Optional[float] = None
        if cfg.track_criticality:
            crit_val = criticality(obj.jacobian(center.point)).value
            if cfg.epsilon is not None and crit_val <= cfg.epsilon:
                stop_reason = "epsilon"
                trace.final_criticality = crit_val
                break
        if alpha < cfg.alpha_min:
            stop_reason = "alpha_min"
            break

        margin = forcing(rho, alpha)
        evals_at_start = obj.evaluations
        status = UNSUCCESSFUL
        accepted_ids: list[int] = []
        new_archive = archive
        dir_index = -1
        poll_crit_val: Optional[float] = None

        # optional search step: evaluate proposals, same acceptance test
        if cfg.search_step is not None:
            proposals = list(cfg.search_step(archive, alpha))
            cands = []
            for pt in proposals:
                val = evaluate(obj, np.asarray(pt, dtype=np.float64))
                tracker.observe(val.values)
                if not val.is_finite:
                    continue
                cands.append(
                    ParetoEntry(
                        id=next_id,
                        point=pt,
                        value=val.values,
                        stepsize=alpha,
                        parent_id=center.id,
                        created_at=k + 1,
                    )
                )
                next_id += 1
            if cands:
                new_archive, changed, accepted_ids = update_rule(
                    archive, center, cands, alpha
                )
                if changed:
                    status = SUCCESS_SEARCH

        # poll step
        if status == UNSUCCESSFUL:
            if cfg.direction_choice == "round-robin":
                pick = k % len(family)
            else:
                pick = int(dir_rng.integers(len(family)))
            dset = family[pick]
            dir_index = set_offset + pick
            if cfg.track_criticality:
                poll_crit_val = poll_criticality(obj.jacobian(center.point), dset)

            def make_candidate(d: Array) -> Optional[ParetoEntry]:
                nonlocal next_id
                pt = center.point + alpha * d
                val = evaluate(obj, pt)
                tracker.observe(val.values)
                if not val.is_finite:
                    return None
                e = ParetoEntry(
                    id=next_id,
                    point=pt,
                    value=val.values,
                    stepsize=alpha,
                    parent_id=center.id,
                    created_at=k + 1,
                )
                next_id += 1
                return e

            if cfg.opportunistic and cfg.update_rule is None:
                cur = archive
                for d in dset:
                    cand = make_candidate(d)
                    if cand is None:
                        continue
                    cur, changed, acc = filter_insert(cur, [cand], margin)
                    if changed:
                        new_archive, accepted_ids, status = cur, acc, SUCCESS_POLL
                        break
            else:
                cands = [c for c in (make_candidate(d) for d in dset) if c is not None]
                new_archive, changed, accepted_ids = update_rule(
                    archive, center, cands, alpha
                )
                if changed:
                    status = SUCCESS_POLL

        # hypervolume bookkeeping; the reference point freezes at the first
        # query, after this iteration's evaluations have been observed
        if hv_cache is None:
            hv_cache = tracker.query(archive.values_matrix())
        hv_before = hv_cache
        if status == UNSUCCESSFUL:
            hv_after = hv_before
        else:
            hv_after = tracker.query(new_archive.values_matrix())
        hv_cache = hv_after

        # stepsize updates; pair replacements become child entries so the
        # contraction/expansion history stays on the chain
        if status == UNSUCCESSFUL:
            fails_in_a_row += 1
            shrunk = ParetoEntry(
                id=next_id,
                point=center.point,
                value=center.value,
                stepsize=step.beta2 * alpha,
                parent_id=center.id,
                created_at=k + 1,
            )
            next_id += 1
            new_entries = [shrunk if e.id == center.id else e for e in new_archive]
            new_archive = ParetoArchive(new_entries)
            trace.entries[shrunk.id] = shrunk
        else:
            fails_in_a_row = 0
            alpha_new = step.gamma * alpha
            if step.gamma > 1.0:
                updated = []
                for e in new_archive:
                    if e.id in accepted_ids:
                        updated.append(replace(e, stepsize=alpha_new))
                    elif e.id == center.id:
                        grown = ParetoEntry(
                            id=next_id,
                            point=center.point,
                            value=center.value,
                            stepsize=alpha_new,
                            parent_id=center.id,
                            created_at=k + 1,
                        )
                        next_id += 1
                        updated.append(grown)
                    else:
                        updated.append(e)
                new_archive = ParetoArchive(updated)
            for e in new_archive:
                if e.id in accepted_ids or e.id not in trace.entries:
                    trace.entries[e.id] = e

        archive = new_archive
        trace.archive_ids.append(archive.ids)
        trace.records.append(
            IterationRecord(
                k=k,
                status=status,
                iterate_id=center.id,
                stepsize=alpha,
                margin=margin,
                evaluations=obj.evaluations - evals_at_start,
                hv_before=hv_before,
                hv_after=hv_after,
                crit=crit_val,
                poll_crit=poll_crit_val,
                archive_size=len(archive),
                direction_set=dir_index,
            )
        )

        # escalation hook: widen the rotated family when polling keeps failing
        if (
            cfg.escalate_after is not None
            and cfg.directions.kind == "rotated"
            and fails_in_a_row >= cfg.escalate_after
        ):
            rotated_level += 1
            family = rotated_family(rotated_level)
            set_offset = len(trace.direction_sets)
            trace.direction_sets.extend(family)
            fails_in_a_row = 0

    trace.stop_reason = stop_reason
    trace.reference_point = tracker.point() if tracker.frozen else None
    trace.evaluations_total = obj.evaluations - evals_before_loop + 1
    return trace


@dataclass(frozen=True)
class LinkedSequenceStats:
    chain_count: int
    max_chain_length: int
    per_chain_unsuccessful: tuple[int, ...]


def _window_check(trace: RunTrace, k0: int, j1: int) -> None:
    last = len(trace.records) - 1
    if not (0 <= k0 <= j1 <= last):
        raise ValueError(f"window [{k0}, {j1}] outside trace range [0, {last}]")


def linked_sequences(trace: RunTrace, k0: int, j1: int) -> LinkedSequenceStats:
    """Enumerate maximal generation chains among entries alive in the window.

    A chain follows parent links root-to-leaf through the set of entries
    that belong to some archive state between iterations k0 and j1; every
    maximal chain is counted in full, so chains sharing a prefix each count
    once.  Per chain, the number of links created by unsuccessful iterations
    (stepsize contractions) is reported.
    """
    _window_check(trace, k0, j1)
    alive: set[int] = set()
    for r in range(k0, j1 + 1):
        alive.update(trace.archive_ids[r])
    children: dict[int, list[int]] = defaultdict(list)
    roots = []
    for eid in sorted(alive):
        parent = trace.entries[eid].parent_id
        if parent is not None and parent in alive:
            children[parent].append(eid)
        else:
            roots.append(eid)

    chain_count = 0
    max_len = 0
    per_chain: list[int] = []

    # explicit stack: chains can be thousands of links long
    stack: list[tuple[int, int, int]] = [(root, 1, 0) for root in reversed(roots)]
    while stack:
        eid, length, unsucc = stack.pop()
        kids = children.get(eid, [])
        if not kids:
            chain_count += 1
            max_len = max(max_len, length)
            per_chain.append(unsucc)
            continue
        for kid in reversed(kids):
            born = trace.entries[kid].created_at - 1
            failed = (
                0 <= born < len(trace.records)
                and trace.records[born].status == UNSUCCESSFUL
            )
            stack.append((kid, length + 1, unsucc + (1 if failed else 0)))
    return LinkedSequenceStats(
        chain_count=chain_count,
        max_chain_length=max_len,
        per_chain_unsuccessful=tuple(per_chain),
    )


def count_iteration_sets(trace: RunTrace, k0: int, j1: int) -> tuple[int, int]:
    """(successful, unsuccessful) iteration counts in the inclusive window."""
    _window_check(trace, k0, j1)
    succ = sum(
        1 for r in trace.records[k0 : j1 + 1] if r.status != UNSUCCESSFUL
    )
    return succ, (j1 - k0 + 1) - succ
