"""Experiment harness: run files, certificate re-checks, scaling studies.

A finished run is persisted as a directory of CSVs (trace, entries,
membership, direction sets, final archive) with enough metadata to rebuild
the trace and re-derive every per-iteration inequality from scratch:
the gap bound at unsuccessful iterations, the hypervolume gain at
successful ones, the squared-stepsize budget, stepsize discipline along
generation chains, and per-iteration evaluation budgets.
"""

from __future__ import annotations

import csv
import os
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ForcingFunction, StepParams
from .criticality import criticality_ratio, poll_criticality
from .directions import DirectionConfig, PositiveSpanningSet, parse_directions
from .dominance import write_archive_csv
from .hypervolume import hypervolume
from .problems import ProblemSpec, get_problem
from .solver_dms import (
    UNSUCCESSFUL,
    DmsConfig,
    IterationRecord,
    RunTrace,
    count_iteration_sets,
    dms_run,
    linked_sequences,
)
from .solver_minmax import (
    MinMaxConfig,
    criticality_iteration_bound,
    minmax_run,
    squared_stepsize_budget,
)

__all__ = [
    "write_run",
    "read_run",
    "CheckResult",
    "VerifyReport",
    "verify_trace",
    "ExperimentConfig",
    "RunStat",
    "ScalingReport",
    "run_experiment",
    "parse_config_file",
    "experiment_from_dict",
    "GAP_TOL",
    "HV_TOL",
    "SLOPE_FLOOR",
    "ALL_CHECKS",
]

GAP_TOL = 1e-10
HV_TOL = 1e-12
BUDGET_TOL = 1e-9
CHAIN_TOL = 1e-12
SLOPE_FLOOR = -2.3

ALL_CHECKS = (
    "unsuccessful-gap",
    "hypervolume-increase",
    "stepsize-budget",
    "stepsize-chain",
    "eval-budget",
)

TRACE_COLUMNS = [
    "k",
    "status",
    "iterate_id",
    "stepsize",
    "margin",
    "evaluations",
    "hv_before",
    "hv_after",
    "crit",
    "poll_crit",
    "archive_size",
    "direction_set",
    "fx",
    "cum_step_sq",
]


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _parse_opt(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def write_run(trace: RunTrace, out_dir, snapshot_every: int = 1) -> None:
    """Persist a run: trace.csv, entries.csv, membership.csv, dirsets.csv,
    archive.csv (final archive only).  snapshot_every thins the membership
    rows; 1 keeps every iteration, which the verifier needs."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "trace.csv"), "w", newline="") as fh:
        for key, val in trace.config_echo.items():
            fh.write(f"# {key} = {val}\n")
        fh.write(f"# stop_reason = {trace.stop_reason}\n")
        ref = (
            ""
            if trace.reference_point is None
            else ",".join(repr(float(v)) for v in trace.reference_point)
        )
        fh.write(f"# reference_point = {ref}\n")
        fh.write(f"# final_criticality = {_fmt(trace.final_criticality)}\n")
        fh.write(f"# evaluations_total = {trace.evaluations_total}\n")
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in trace.records:
            w.writerow(
                [
                    r.k,
                    r.status,
                    r.iterate_id,
                    repr(r.stepsize),
                    repr(r.margin),
                    r.evaluations,
                    repr(r.hv_before),
                    repr(r.hv_after),
                    _fmt(r.crit),
                    _fmt(r.poll_crit),
                    r.archive_size,
                    r.direction_set,
                    _fmt(r.fx),
                    _fmt(r.cum_step_sq),
                ]
            )
    write_archive_csv(os.path.join(out_dir, "entries.csv"), trace.entries.values())
    write_archive_csv(os.path.join(out_dir, "archive.csv"), trace.final_archive)
    cadence = max(1, snapshot_every)
    last = len(trace.archive_ids) - 1
    with open(os.path.join(out_dir, "membership.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "id"])
        for k, ids in enumerate(trace.archive_ids):
            if k % cadence == 0 or k == last:
                for i in ids:
                    w.writerow([k, i])
    with open(os.path.join(out_dir, "dirsets.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["set_index", "dir_index", "component", "value"])
        for si, dset in enumerate(trace.direction_sets):
            for di, d in enumerate(dset.directions):
                for ci, v in enumerate(d):
                    w.writerow([si, di, ci, repr(float(v))])


def read_run(run_dir) -> RunTrace:
    """Rebuild a RunTrace from a run directory written by write_run."""
    meta: dict[str, str] = {}
    rows = []
    with open(os.path.join(run_dir, "trace.csv"), newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta[key.strip()] = val.strip()
            else:
                rows.append(line)
    parsed = list(csv.reader(rows))
    records = []
    for row in parsed[1:]:
        records.append(
            IterationRecord(
                k=int(row[0]),
                status=row[1],
                iterate_id=int(row[2]),
                stepsize=float(row[3]),
                margin=float(row[4]),
                evaluations=int(row[5]),
                hv_before=float(row[6]),
                hv_after=float(row[7]),
                crit=_parse_opt(row[8]),
                poll_crit=_parse_opt(row[9]),
                archive_size=int(row[10]),
                direction_set=int(row[11]),
                fx=_parse_opt(row[12]),
                cum_step_sq=_parse_opt(row[13]),
            )
        )

    from .dominance import read_archive_csv

    entries = {e.id: e for e in read_archive_csv(os.path.join(run_dir, "entries.csv"))}

    members: dict[int, list[int]] = {}
    with open(os.path.join(run_dir, "membership.csv"), newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            members.setdefault(int(row[0]), []).append(int(row[1]))
    archive_ids = [tuple(members.get(k, ())) for k in range(max(members) + 1)] if members else []

    sets: dict[int, dict[int, dict[int, float]]] = {}
    with open(os.path.join(run_dir, "dirsets.csv"), newline="") as fh:
        for row in list(csv.reader(fh))[1:]:
            si, di, ci, v = int(row[0]), int(row[1]), int(row[2]), float(row[3])
            sets.setdefault(si, {}).setdefault(di, {})[ci] = v
    direction_sets = []
    for si in sorted(sets):
        dirs = sets[si]
        mat = np.array(
            [[dirs[di][ci] for ci in sorted(dirs[di])] for di in sorted(dirs)]
        )
        direction_sets.append(PositiveSpanningSet(mat))

    ref = meta.get("reference_point", "")
    trace = RunTrace(
        solver=meta.get("solver", ""),
        problem_name=meta.get("problem", ""),
        records=records,
        entries=entries,
        archive_ids=archive_ids,
        direction_sets=direction_sets,
        reference_point=None if ref == "" else np.array([float(v) for v in ref.split(",")]),
        stop_reason=meta.get("stop_reason", ""),
        final_criticality=_parse_opt(meta.get("final_criticality", "")),
        evaluations_total=int(meta.get("evaluations_total", "0")),
        config_echo={
            k: v
            for k, v in meta.items()
            if k
            not in ("stop_reason", "reference_point", "final_criticality", "evaluations_total")
        },
    )
    return trace


@dataclass
class CheckResult:
    name: str
    checked: int
    violations: list[tuple[int, float, float]] = field(default_factory=list)
    skipped: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    def describe(self) -> str:
        if self.skipped:
            return f"{self.name}: skipped ({self.skipped})"
        verdict = "ok" if self.passed else f"{len(self.violations)} violation(s)"
        text = f"{self.name}: {self.checked} checked, {verdict}"
        for k, lhs, rhs in self.violations[:5]:
            text += f"\n    iteration {k}: {lhs!r} > {rhs!r}"
        return text


# Skip reasons that reflect the run's shape rather than missing inputs.
_STRUCTURAL_SKIPS = (
    "applies to the multisearch archive update",
    "budget is defined for the min-max instance",
    "search-step evaluations are unbounded by the poll set",
)


@dataclass
class VerifyReport:
    checks: list[CheckResult]
    partial: bool = False

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def describe(self) -> str:
        lines = [c.describe() for c in self.checks]
        if self.partial:
            lines.append("note: some checks skipped for lack of problem data")
        lines.append("verdict: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _check_unsuccessful_gap(trace: RunTrace, problem: ProblemSpec) -> CheckResult:
    """At every unsuccessful iteration the poll-restricted criticality is at
    most (L/2) * stepsize + margin / stepsize."""
    res = CheckResult(name="unsuccessful-gap", checked=0)
    if problem.jacobian is None or problem.lipschitz_max is None:
        res.skipped = "needs jacobian and lipschitz bound"
        return res
    lip = problem.lipschitz_max
    for r in trace.records:
        if r.status != UNSUCCESSFUL or r.direction_set < 0:
            continue
        point = trace.entries[r.iterate_id].point
        pc = poll_criticality(problem.jacobian(point), trace.direction_sets[r.direction_set])
        rhs = 0.5 * lip * r.stepsize + r.margin / r.stepsize
        res.checked += 1
        if pc > rhs + GAP_TOL:
            res.violations.append((r.k, pc, rhs))
    return res


def _check_hypervolume_increase(trace: RunTrace) -> CheckResult:
    """Every successful iteration gains at least margin^m of hypervolume.

    Holds for the keep-all-nondominated archive update; singleton-archive
    runs (the min-max instance) may drop volume and are not checked."""
    res = CheckResult(name="hypervolume-increase", checked=0)
    if trace.solver != "dms":
        res.skipped = "applies to the multisearch archive update"
        return res
    if trace.reference_point is None:
        res.skipped = "no reference point recorded"
        return res
    r_point = trace.reference_point
    m = len(r_point)
    for rec in trace.records:
        if rec.status == UNSUCCESSFUL:
            continue
        vals_before = [trace.entries[i].value for i in trace.archive_ids[rec.k]]
        vals_after = [trace.entries[i].value for i in trace.archive_ids[rec.k + 1]]
        hv_b = hypervolume(vals_before, r_point)
        hv_a = hypervolume(vals_after, r_point)
        res.checked += 1
        gain = hv_a - hv_b
        need = rec.margin**m - HV_TOL
        if gain < need:
            res.violations.append((rec.k, gain, need))
    return res


def _check_stepsize_budget(trace: RunTrace, problem: ProblemSpec) -> CheckResult:
    """Running sum of squared stepsizes stays within the declared budget."""
    res = CheckResult(name="stepsize-budget", checked=0)
    if trace.solver != "minmax":
        res.skipped = "budget is defined for the min-max instance"
        return res
    if problem.f_bounds is None:
        res.skipped = "needs declared value bounds"
        return res
    echo = trace.config_echo
    step = StepParams(
        alpha0=float(echo["alpha0"]),
        beta1=float(echo["beta1"]),
        beta2=float(echo["beta2"]),
        gamma=float(echo["gamma"]),
    )
    c = float(echo["c"])
    if not trace.records:
        return res
    f_x0 = trace.records[0].fx
    budget = squared_stepsize_budget(step, c, f_x0, problem.f_bounds[0])
    for r in trace.records:
        res.checked += 1
        if r.cum_step_sq > budget + BUDGET_TOL:
            res.violations.append((r.k, r.cum_step_sq, budget))
    return res


def _check_stepsize_chain(trace: RunTrace) -> CheckResult:
    """Parent-to-child stepsizes contract into [beta1, beta2] after failures
    and expand into [1, gamma] after successes."""
    res = CheckResult(name="stepsize-chain", checked=0)
    echo = trace.config_echo
    try:
        beta1, beta2, gamma = (
            float(echo["beta1"]),
            float(echo["beta2"]),
            float(echo["gamma"]),
        )
    except KeyError:
        res.skipped = "missing stepsize parameters in run metadata"
        return res
    for e in trace.entries.values():
        if e.parent_id is None or e.parent_id not in trace.entries:
            continue
        born = e.created_at - 1
        if not (0 <= born < len(trace.records)):
            continue
        parent = trace.entries[e.parent_id]
        ratio = e.stepsize / parent.stepsize
        res.checked += 1
        if trace.records[born].status == UNSUCCESSFUL:
            lo, hi = beta1, beta2
        else:
            lo, hi = 1.0, gamma
        if not (lo - CHAIN_TOL <= ratio <= hi + CHAIN_TOL):
            res.violations.append((born, ratio, hi))
    return res


def _check_eval_budget(trace: RunTrace) -> CheckResult:
    """Each polled iteration evaluates at most |D_k| points."""
    res = CheckResult(name="eval-budget", checked=0)
    if trace.config_echo.get("search", "none") != "none":
        res.skipped = "search-step evaluations are unbounded by the poll set"
        return res
    for r in trace.records:
        if r.direction_set < 0:
            continue
        res.checked += 1
        limit = len(trace.direction_sets[r.direction_set])
        if r.evaluations > limit:
            res.violations.append((r.k, float(r.evaluations), float(limit)))
    return res


def verify_trace(
    trace: RunTrace, problem: Optional[ProblemSpec] = None, checks=ALL_CHECKS
) -> VerifyReport:
    """Re-derive the per-iteration inequalities for a finished run.

    The gap check recomputes the poll-restricted criticality from the
    problem's jacobian and the recorded direction sets; the hypervolume
    check recomputes both volumes from archive membership.  Checks that
    need problem data are skipped (and the report flagged partial) when it
    is unavailable.
    """
    if problem is None and trace.problem_name:
        try:
            problem = get_problem(trace.problem_name)
        except ValueError:
            problem = None
    out: list[CheckResult] = []
    for name in checks:
        if name == "unsuccessful-gap":
            if problem is None:
                out.append(CheckResult(name=name, checked=0, skipped="no problem data"))
            else:
                out.append(_check_unsuccessful_gap(trace, problem))
        elif name == "hypervolume-increase":
            out.append(_check_hypervolume_increase(trace))
        elif name == "stepsize-budget":
            if problem is None:
                out.append(CheckResult(name=name, checked=0, skipped="no problem data"))
            else:
                out.append(_check_stepsize_budget(trace, problem))
        elif name == "stepsize-chain":
            out.append(_check_stepsize_chain(trace))
        elif name == "eval-budget":
            out.append(_check_eval_budget(trace))
        else:
            raise ValueError(f"unknown check {name!r}")
    partial = any(c.skipped and c.skipped not in _STRUCTURAL_SKIPS for c in out)
    return VerifyReport(checks=out, partial=partial)


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    solver: str = "minmax"
    epsilon_grid: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    x0: Optional[tuple[float, ...]] = None
    start_box: Optional[tuple[float, float]] = (2.0, 5.0)
    step: StepParams = StepParams()
    c: float = 1.0
    forcing: ForcingFunction = ForcingFunction()
    directions: DirectionConfig = DirectionConfig(kind="rotated", level=2)
    selection: str = "largest-stepsize"
    direction_choice: str = "union"
    max_iterations: int = 20000
    alpha_min: float = 1e-12
    checks: tuple[str, ...] = ALL_CHECKS

    def __post_init__(self):
        if self.solver not in ("dms", "minmax"):
            raise ValueError(f"unknown solver {self.solver!r}")
        grid = self.epsilon_grid
        if any(not (0 < e < 1) for e in grid):
            raise ValueError("epsilon grid values must lie in (0, 1)")
        if any(a <= b for a, b in zip(grid, grid[1:])):
            raise ValueError("epsilon grid must be strictly decreasing")
        if self.x0 is None and self.start_box is None:
            raise ValueError("need either x0 or start_box")


@dataclass
class RunStat:
    epsilon: float
    seed: int
    iterations: int
    k_eps: Optional[int]
    censored: bool
    evaluations: int
    successes: int
    unsuccesses: int
    chain_count: int
    max_chain_length: int
    ratio_max: Optional[float]
    bound: Optional[float]
    max_poll_size: int


@dataclass
class ScalingReport:
    config: ExperimentConfig
    stats: list[RunStat]
    medians: dict[float, float]
    slope: Optional[float]
    check_reports: list[VerifyReport]
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_text(self) -> str:
        lines = [
            f"problem = {self.config.problem}",
            f"solver = {self.config.solver}",
            f"runs = {len(self.stats)}",
        ]
        for s in self.stats:
            lines.append(
                f"epsilon={s.epsilon!r} seed={s.seed} iterations={s.iterations} "
                f"k_eps={s.k_eps} censored={s.censored} evaluations={s.evaluations} "
                f"successes={s.successes} unsuccesses={s.unsuccesses} "
                f"chains={s.chain_count} max_chain={s.max_chain_length} "
                f"ratio_max={'' if s.ratio_max is None else repr(s.ratio_max)} "
                f"bound={'' if s.bound is None else repr(s.bound)}"
            )
        for eps in sorted(self.medians, reverse=True):
            lines.append(f"median k_eps at epsilon={eps!r}: {self.medians[eps]!r}")
        lines.append(f"slope = {'' if self.slope is None else repr(self.slope)}")
        if self.failures:
            lines.extend(f"FAIL: {f}" for f in self.failures)
        lines.append("verdict: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                [
                    "epsilon",
                    "seed",
                    "iterations",
                    "k_eps",
                    "censored",
                    "evaluations",
                    "successes",
                    "unsuccesses",
                    "chain_count",
                    "max_chain_length",
                    "ratio_max",
                    "bound",
                    "max_poll_size",
                ]
            )
            for s in self.stats:
                w.writerow(
                    [
                        repr(s.epsilon),
                        s.seed,
                        s.iterations,
                        "" if s.k_eps is None else s.k_eps,
                        int(s.censored),
                        s.evaluations,
                        s.successes,
                        s.unsuccesses,
                        s.chain_count,
                        s.max_chain_length,
                        "" if s.ratio_max is None else repr(s.ratio_max),
                        "" if s.bound is None else repr(s.bound),
                        s.max_poll_size,
                    ]
                )


def _start_point(cfg: ExperimentConfig, problem: ProblemSpec, seed: int) -> np.ndarray:
    if cfg.x0 is not None:
        return np.array(cfg.x0, dtype=np.float64)
    lo, hi = cfg.start_box
    return np.random.default_rng(seed).uniform(lo, hi, size=problem.n)


def _ratio_running_max(trace: RunTrace) -> Optional[float]:
    best: Optional[float] = None
    for r in trace.records:
        if r.crit is None or r.poll_crit is None:
            continue
        ratio = criticality_ratio(r.crit, r.poll_crit)
        if ratio is not None and (best is None or ratio > best):
            best = ratio
    return best


def run_single(
    cfg: ExperimentConfig, problem: ProblemSpec, seed: int, epsilon: Optional[float]
) -> RunTrace:
    x0 = _start_point(cfg, problem, seed)
    if cfg.solver == "minmax":
        mc = MinMaxConfig(
            step=cfg.step,
            c=cfg.c,
            directions=cfg.directions,
            max_iterations=cfg.max_iterations,
            alpha_min=cfg.alpha_min,
            track_criticality=True,
            epsilon=epsilon,
            seed=seed,
            direction_choice=cfg.direction_choice,
        )
        return minmax_run(problem, x0, mc, problem_name=cfg.problem)
    dc = DmsConfig(
        step=cfg.step,
        forcing=cfg.forcing,
        directions=cfg.directions,
        selection=cfg.selection,
        max_iterations=cfg.max_iterations,
        alpha_min=cfg.alpha_min,
        track_criticality=True,
        epsilon=epsilon,
        seed=seed,
        direction_choice=cfg.direction_choice,
    )
    return dms_run(problem, x0, dc, problem_name=cfg.problem)


def run_experiment(cfg: ExperimentConfig) -> ScalingReport:
    """Sweep the epsilon grid over all seeds, re-checking every trace.

    Runs that hit max_iterations or the stepsize floor before reaching the
    criticality target are censored: excluded from medians and the slope
    fit, with a warning.  Any per-iteration check violation fails the
    experiment.
    """
    problem = get_problem(cfg.problem)
    stats: list[RunStat] = []
    reports: list[VerifyReport] = []
    failures: list[str] = []

    for eps in cfg.epsilon_grid:
        for seed in cfg.seeds:
            trace = run_single(cfg, problem, seed, eps)
            report = verify_trace(trace, problem, checks=cfg.checks)
            reports.append(report)
            if not report.passed:
                for c in report.checks:
                    if not c.passed:
                        failures.append(
                            f"epsilon={eps!r} seed={seed}: {c.name} violated at "
                            f"iteration {c.violations[0][0]}"
                        )

            censored = trace.stop_reason != "epsilon"
            if censored:
                warnings.warn(
                    f"run epsilon={eps!r} seed={seed} stopped by "
                    f"{trace.stop_reason}; excluded from the fit",
                    stacklevel=2,
                )
            k_eps = None if censored else len(trace.records) - 1

            unsucc_idx = [
                r.k for r in trace.records if r.status == UNSUCCESSFUL
            ]
            if unsucc_idx and trace.records:
                k0 = unsucc_idx[0]
                j1 = len(trace.records) - 1
                succ, unsucc = count_iteration_sets(trace, k0, j1)
                chains = linked_sequences(trace, k0, j1)
                chain_count = chains.chain_count
                max_chain = chains.max_chain_length
            else:
                succ = unsucc = chain_count = max_chain = 0

            ratio_max = _ratio_running_max(trace)
            bound = None
            if (
                cfg.solver == "minmax"
                and problem.f_bounds is not None
                and problem.lipschitz_max is not None
                and trace.records
                and ratio_max is not None
            ):
                bound = criticality_iteration_bound(
                    cfg.step,
                    cfg.c,
                    trace.records[0].fx,
                    problem.f_bounds[0],
                    problem.lipschitz_max,
                    ratio_max,
                    eps,
                )
                if not censored and k_eps is not None and k_eps > bound:
                    failures.append(
                        f"epsilon={eps!r} seed={seed}: k_eps={k_eps} exceeds bound={bound!r}"
                    )

            max_poll = max(
                (len(trace.direction_sets[r.direction_set]) for r in trace.records
                 if r.direction_set >= 0),
                default=0,
            )
            stats.append(
                RunStat(
                    epsilon=eps,
                    seed=seed,
                    iterations=len(trace.records),
                    k_eps=k_eps,
                    censored=censored,
                    evaluations=trace.evaluations_total,
                    successes=succ,
                    unsuccesses=unsucc,
                    chain_count=chain_count,
                    max_chain_length=max_chain,
                    ratio_max=ratio_max,
                    bound=bound,
                    max_poll_size=max_poll,
                )
            )

    medians: dict[float, float] = {}
    for eps in cfg.epsilon_grid:
        vals = [
            s.k_eps for s in stats if s.epsilon == eps and not s.censored and s.k_eps is not None
        ]
        if vals:
            medians[eps] = float(np.median(vals))

    slope = None
    usable = [(eps, med) for eps, med in medians.items() if med > 0]
    if len(usable) >= 4:
        xs = np.log([u[0] for u in usable])
        ys = np.log([u[1] for u in usable])
        slope = float(np.polyfit(xs, ys, 1)[0])
        if slope < SLOPE_FLOOR:
            failures.append(f"slope {slope!r} steeper than floor {SLOPE_FLOOR}")
    else:
        failures.append(
            f"slope fit needs at least 4 usable grid points, got {len(usable)}"
        )

    return ScalingReport(
        config=cfg,
        stats=stats,
        medians=medians,
        slope=slope,
        check_reports=reports,
        failures=failures,
    )


def parse_config_file(path) -> dict[str, str]:
    """Flat key = value lines; # starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
            key, _, val = line.partition("=")
            out[key.strip()] = val.strip()
    return out


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip() != "")


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip() != "")


def experiment_from_dict(d: dict[str, str]) -> ExperimentConfig:
    """Build an ExperimentConfig from flat config keys (see README)."""
    step = StepParams(
        alpha0=float(d.get("alpha0", "1.0")),
        beta1=float(d.get("beta1", "0.5")),
        beta2=float(d.get("beta2", "0.5")),
        gamma=float(d.get("gamma", "1.0")),
    )
    forcing = ForcingFunction(
        c=float(d.get("forcing_c", "1.0")), p=float(d.get("forcing_p", "2.0"))
    )
    kwargs = dict(
        problem=d["problem"],
        solver=d.get("solver", "minmax"),
        step=step,
        c=float(d.get("c", "1.0")),
        forcing=forcing,
        directions=parse_directions(d.get("directions", "rotated(2)")),
        selection=d.get("selection", "largest-stepsize"),
        direction_choice=d.get("direction_choice", "union"),
        max_iterations=int(d.get("max_iterations", "20000")),
        alpha_min=float(d.get("alpha_min", "1e-12")),
    )
    if "epsilon_grid" in d:
        kwargs["epsilon_grid"] = _floats(d["epsilon_grid"])
    if "seeds" in d:
        kwargs["seeds"] = _ints(d["seeds"])
    if "x0" in d:
        kwargs["x0"] = _floats(d["x0"])
        kwargs["start_box"] = None
    elif "start_box" in d:
        box = _floats(d["start_box"])
        if len(box) != 2:
            raise ValueError(f"start_box needs two values, got {d['start_box']!r}")
        kwargs["start_box"] = (box[0], box[1])
    if "checks" in d:
        kwargs["checks"] = tuple(v.strip() for v in d["checks"].split(","))
    return ExperimentConfig(**kwargs)
