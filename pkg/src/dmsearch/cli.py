"""Command line front end.

Subcommands:
  solve          run one solve and write the run directory
  verify         re-check a finished run directory
  scaling        sweep an epsilon grid over seeds and fit the slope
  list-problems  show the built-in problem name patterns
  bench          time the compiled kernels against the pure-python ones
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .harness import (
    ExperimentConfig,
    experiment_from_dict,
    parse_config_file,
    read_run,
    run_experiment,
    run_single,
    verify_trace,
    write_run,
)
from .problems import get_problem, list_problems
from .solver_minmax import fmax


def _load_config(path) -> dict[str, str]:
    if path is None:
        return {}
    return parse_config_file(path)


def _cmd_solve(args) -> int:
    d = _load_config(args.config)
    if args.problem:
        d["problem"] = args.problem
    if args.solver:
        d["solver"] = args.solver
    if args.epsilon is not None:
        d["epsilon_grid"] = repr(args.epsilon)
    if args.seed is not None:
        d["seeds"] = str(args.seed)
    if "problem" not in d:
        print("solve: no problem given (flag --problem or config key)", file=sys.stderr)
        return 2
    d.setdefault("seeds", "0")
    cfg = experiment_from_dict(d)
    problem = get_problem(cfg.problem)
    seed = cfg.seeds[0]
    epsilon = cfg.epsilon_grid[0] if args.epsilon is not None or "epsilon_grid" in d else None
    trace = run_single(cfg, problem, seed, epsilon)
    report = verify_trace(trace, problem, checks=cfg.checks)
    if args.out_dir:
        write_run(trace, args.out_dir, snapshot_every=args.snapshot_every)
        with open(os.path.join(args.out_dir, "summary.txt"), "w") as fh:
            fh.write(report.describe() + "\n")
    print(f"problem = {cfg.problem}")
    print(f"solver = {cfg.solver}")
    print(f"iterations = {len(trace.records)}")
    print(f"evaluations = {trace.evaluations_total}")
    print(f"stop_reason = {trace.stop_reason}")
    if trace.final_criticality is not None:
        print(f"final_criticality = {trace.final_criticality!r}")
    final = trace.final_archive
    print(f"archive_size = {len(final)}")
    if cfg.solver == "minmax" and final:
        print(f"worst_component = {fmax(final[0].value)!r}")
    print(report.describe())
    if args.out_dir:
        print(f"run written to {args.out_dir}")
    return 0 if report.passed else 2


def _cmd_verify(args) -> int:
    trace = read_run(args.run_dir)
    problem = None
    if args.problem:
        problem = get_problem(args.problem)
    report = verify_trace(trace, problem)
    print(report.describe())
    return 0 if report.passed else 2


def _cmd_scaling(args) -> int:
    d = _load_config(args.config)
    if args.problem:
        d["problem"] = args.problem
    if args.solver:
        d["solver"] = args.solver
    if args.epsilon is not None:
        d["epsilon_grid"] = args.epsilon
    if args.seed is not None:
        d["seeds"] = str(args.seed)
    if "problem" not in d:
        print("scaling: no problem given (flag --problem or config key)", file=sys.stderr)
        return 2
    cfg = experiment_from_dict(d)
    report = run_experiment(cfg)
    print(report.to_text())
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        report.write_csv(os.path.join(args.out_dir, "scaling.csv"))
        with open(os.path.join(args.out_dir, "scaling.txt"), "w") as fh:
            fh.write(report.to_text() + "\n")
        print(f"report written to {args.out_dir}")
    return 0 if report.passed else 2


def _cmd_list_problems(args) -> int:
    for pattern, description in list_problems():
        print(f"{pattern:<18} {description}")
    return 0


def _cmd_bench(args) -> int:
    import timeit

    from . import kernels
    from . import _kernels_py as pure

    backends = [("python", pure)]
    if kernels.BACKEND == "compiled":
        from . import _kernels as compiled

        backends.append(("compiled", compiled))
    else:
        print("compiled backend unavailable; timing pure python only")

    rng = np.random.default_rng(args.seed)
    k, m = args.points, args.objectives
    values = rng.random((k, m))
    u = rng.random(m)
    order = np.lexsort((values[:, 1], values[:, 0]))
    sorted2d = np.ascontiguousarray(values[order][:, :2])

    cases = [
        ("margin_dominated", lambda mod: mod.margin_dominated(values, u, 0.05)),
        ("dominated_mask", lambda mod: mod.dominated_mask(values, u)),
        ("nondominated_mask", lambda mod: mod.nondominated_mask(values)),
        ("hv2d_sorted", lambda mod: mod.hv2d_sorted(sorted2d, 2.0, 2.0)),
    ]
    print(f"k = {k} points, m = {m} objectives, {args.repeats} repeats")
    for name, fn in cases:
        row = [f"{name:<18}"]
        for label, mod in backends:
            t = min(timeit.repeat(lambda: fn(mod), number=args.number, repeat=args.repeats))
            row.append(f"{label} {t / args.number * 1e6:9.2f} us")
        print("  ".join(row))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmsearch", description="direct multisearch solvers with verifiable traces"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solve")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--problem", help="problem name (overrides config)")
    p.add_argument("--solver", choices=["dms", "minmax"], help="solver (overrides config)")
    p.add_argument("--epsilon", type=float, help="criticality stop target")
    p.add_argument("--seed", type=int, help="seed for the starting point")
    p.add_argument("--out-dir", help="directory to write the run files")
    p.add_argument(
        "--snapshot-every",
        type=int,
        default=1,
        help="membership snapshot cadence (1 keeps every iteration)",
    )
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("verify", help="re-check a finished run directory")
    p.add_argument("--run-dir", required=True)
    p.add_argument("--problem", help="problem name override for the checks")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("scaling", help="epsilon-grid sweep with slope fit")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--problem", help="problem name (overrides config)")
    p.add_argument("--solver", choices=["dms", "minmax"], help="solver (overrides config)")
    p.add_argument("--epsilon", help="comma-separated grid override")
    p.add_argument("--seed", type=int, help="single-seed override")
    p.add_argument("--out-dir", help="directory for scaling.csv / scaling.txt")
    p.set_defaults(fn=_cmd_scaling)

    p = sub.add_parser("list-problems", help="show built-in problem patterns")
    p.set_defaults(fn=_cmd_list_problems)

    p = sub.add_parser("bench", help="compare kernel backends")
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--objectives", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--number", type=int, default=20)
    p.add_argument("--repeats", type=int, default=5)
    p.set_defaults(fn=_cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
