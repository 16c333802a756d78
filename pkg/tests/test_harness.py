"""Run persistence, certificate re-checks, fault injection, experiments.

Fault-injection tests corrupt exactly one number in an otherwise valid
trace and demand that exactly the matching check flags exactly the
corrupted iteration -- anything else means a check reads the wrong data.
"""

import dataclasses
import warnings

import numpy as np
import pytest

from dmsearch.criticality import poll_criticality
from dmsearch.directions import DirectionConfig
from dmsearch.harness import (
    ALL_CHECKS,
    ExperimentConfig,
    experiment_from_dict,
    parse_config_file,
    read_run,
    run_experiment,
    verify_trace,
    write_run,
)
from dmsearch.problems import get_problem
from dmsearch.solver_dms import UNSUCCESSFUL, DmsConfig, dms_run
from dmsearch.solver_minmax import MinMaxConfig, minmax_run

ROTATED2 = DirectionConfig(kind="rotated", level=2)


def _dms_trace(**kw):
    p = get_problem("dennis_woods")
    cfg = DmsConfig(
        directions=ROTATED2, max_iterations=kw.pop("max_iterations", 120),
        track_criticality=True, **kw,
    )
    return dms_run(p, np.array([2.0, 3.0]), cfg, problem_name="dennis_woods"), p


def _minmax_trace(**kw):
    p = get_problem("dennis_woods")
    cfg = MinMaxConfig(
        directions=ROTATED2, direction_choice="union",
        max_iterations=kw.pop("max_iterations", 150),
        track_criticality=True, **kw,
    )
    return minmax_run(p, np.array([2.0, 3.0]), cfg, problem_name="dennis_woods"), p


def _by_name(report):
    return {c.name: c for c in report.checks}


# -- verification on honest runs --------------------------------------------------

def test_all_checks_pass_on_a_multisearch_run():
    trace, p = _dms_trace()
    report = verify_trace(trace, p)
    assert report.passed and not report.partial
    by = _by_name(report)
    assert by["unsuccessful-gap"].checked > 0
    assert by["hypervolume-increase"].checked > 0
    assert by["stepsize-chain"].checked > 0
    assert by["eval-budget"].checked > 0
    assert by["stepsize-budget"].skipped  # structural: wrong solver


def test_all_checks_pass_on_a_minmax_run():
    trace, p = _minmax_trace()
    report = verify_trace(trace, p)
    assert report.passed and not report.partial
    by = _by_name(report)
    assert by["stepsize-budget"].checked == len(trace.records)
    assert by["hypervolume-increase"].skipped  # structural: singleton archive


def test_problem_is_resolved_from_the_trace_name():
    trace, _ = _dms_trace(max_iterations=30)
    report = verify_trace(trace)  # no problem passed
    assert report.passed and not report.partial


def test_missing_problem_data_marks_report_partial():
    trace, _ = _dms_trace(max_iterations=30)
    trace.problem_name = "not-a-registered-problem"
    report = verify_trace(trace)
    assert report.partial
    by = _by_name(report)
    assert by["unsuccessful-gap"].skipped == "no problem data"
    assert report.passed  # skipped checks do not fail the report


def test_search_step_runs_skip_the_eval_budget_structurally():
    p = get_problem("dennis_woods")
    cfg = DmsConfig(search_step=lambda arch, alpha: [], max_iterations=20)
    trace = dms_run(p, np.array([2.0, 3.0]), cfg, problem_name="dennis_woods")
    report = verify_trace(trace, p)
    by = _by_name(report)
    assert by["eval-budget"].skipped
    assert not report.partial


def test_unknown_check_name_rejected():
    trace, p = _dms_trace(max_iterations=10)
    with pytest.raises(ValueError):
        verify_trace(trace, p, checks=("unsuccessful-gap", "gap2"))


def test_check_subset_only_runs_requested():
    trace, p = _dms_trace(max_iterations=10)
    report = verify_trace(trace, p, checks=("stepsize-chain",))
    assert [c.name for c in report.checks] == ["stepsize-chain"]


def test_describe_renders_verdict():
    trace, p = _dms_trace(max_iterations=10)
    text = verify_trace(trace, p).describe()
    assert "verdict: PASS" in text


# -- fault injection ----------------------------------------------------------------

def test_deflated_stepsize_is_caught_by_the_gap_check_only():
    trace, p = _dms_trace()
    target = None
    for r in trace.records:
        if r.status == UNSUCCESSFUL and r.poll_crit is not None and r.poll_crit > 0.05:
            target = r
            break
    assert target is not None
    # shrink the recorded radius (and its matching margin) far below what
    # the recomputed poll criticality at that iterate can allow
    pc = poll_criticality(
        p.jacobian(trace.entries[target.iterate_id].point),
        trace.direction_sets[target.direction_set],
    )
    bad_alpha = pc / 10.0
    forged = dataclasses.replace(target, stepsize=bad_alpha, margin=bad_alpha**2)
    trace.records = [forged if r.k == target.k else r for r in trace.records]
    report = verify_trace(trace, p)
    by = _by_name(report)
    assert [v[0] for v in by["unsuccessful-gap"].violations] == [target.k]
    assert by["hypervolume-increase"].passed
    assert by["stepsize-chain"].passed
    assert by["eval-budget"].passed


def test_dropped_archive_member_is_caught_by_the_hypervolume_check():
    trace, p = _dms_trace()
    target = next(r for r in trace.records if r.status != UNSUCCESSFUL)
    k = target.k
    # membership rows claim the success added nothing and lost an entry
    trace.archive_ids[k + 1] = tuple(trace.archive_ids[k][1:])
    report = verify_trace(trace, p)
    by = _by_name(report)
    assert [v[0] for v in by["hypervolume-increase"].violations] == [k]
    assert by["unsuccessful-gap"].passed
    assert by["eval-budget"].passed


def test_inflated_cumulative_stepsize_breaks_the_budget_check_only():
    trace, p = _minmax_trace()
    target = trace.records[len(trace.records) // 2]
    forged = dataclasses.replace(target, cum_step_sq=target.cum_step_sq + 1e6)
    trace.records = [forged if r.k == target.k else r for r in trace.records]
    report = verify_trace(trace, p)
    by = _by_name(report)
    assert [v[0] for v in by["stepsize-budget"].violations] == [target.k]
    assert by["unsuccessful-gap"].passed
    assert by["stepsize-chain"].passed


def test_tampered_entry_stepsize_breaks_the_chain_check():
    trace, p = _minmax_trace()
    leaf_id = trace.archive_ids[-1][0]  # the live iterate has no children
    leaf = trace.entries[leaf_id]
    trace.entries[leaf_id] = dataclasses.replace(leaf, stepsize=leaf.stepsize * 10)
    report = verify_trace(trace, p)
    by = _by_name(report)
    assert [v[0] for v in by["stepsize-chain"].violations] == [leaf.created_at - 1]
    assert by["stepsize-budget"].passed
    assert by["unsuccessful-gap"].passed


def test_overspent_evaluations_break_the_eval_budget_check():
    trace, p = _dms_trace()
    target = trace.records[3]
    limit = len(trace.direction_sets[target.direction_set])
    forged = dataclasses.replace(target, evaluations=limit + 1)
    trace.records = [forged if r.k == target.k else r for r in trace.records]
    report = verify_trace(trace, p)
    by = _by_name(report)
    assert [v[0] for v in by["eval-budget"].violations] == [target.k]
    assert by["stepsize-chain"].passed


# -- persistence ------------------------------------------------------------------------

def _assert_traces_equal(a, b):
    assert a.solver == b.solver and a.problem_name == b.problem_name
    assert a.stop_reason == b.stop_reason
    assert a.final_criticality == b.final_criticality
    assert a.evaluations_total == b.evaluations_total
    assert a.records == b.records
    assert a.archive_ids == b.archive_ids
    assert sorted(a.entries) == sorted(b.entries)
    for i in a.entries:
        ea, eb = a.entries[i], b.entries[i]
        assert np.array_equal(ea.point, eb.point)
        assert np.array_equal(ea.value, eb.value)
        assert ea.stepsize == eb.stepsize
        assert ea.parent_id == eb.parent_id and ea.created_at == eb.created_at
    assert len(a.direction_sets) == len(b.direction_sets)
    for sa, sb in zip(a.direction_sets, b.direction_sets):
        assert np.array_equal(sa.directions, sb.directions)
    assert np.array_equal(a.reference_point, b.reference_point)
    assert a.config_echo == b.config_echo


def test_round_trip_is_exact_for_multisearch_runs(tmp_path):
    trace, p = _dms_trace()
    write_run(trace, tmp_path / "run")
    back = read_run(tmp_path / "run")
    _assert_traces_equal(trace, back)
    assert verify_trace(back, p).passed


def test_round_trip_is_exact_for_minmax_runs(tmp_path):
    trace, p = _minmax_trace()
    write_run(trace, tmp_path / "run")
    back = read_run(tmp_path / "run")
    _assert_traces_equal(trace, back)
    assert verify_trace(back, p).passed


def test_snapshot_thinning_keeps_first_and_last_states(tmp_path):
    trace, _ = _dms_trace(max_iterations=47)
    write_run(trace, tmp_path / "run", snapshot_every=10)
    back = read_run(tmp_path / "run")
    assert back.archive_ids[0] == trace.archive_ids[0]
    assert back.archive_ids[-1] == trace.archive_ids[-1]
    for k in range(0, len(trace.archive_ids), 10):
        assert back.archive_ids[k] == trace.archive_ids[k]
    assert any(ids == () for ids in back.archive_ids)  # thinned rows


def test_written_run_has_all_files(tmp_path):
    trace, _ = _dms_trace(max_iterations=10)
    write_run(trace, tmp_path / "run")
    for name in ("trace.csv", "entries.csv", "archive.csv", "membership.csv", "dirsets.csv"):
        assert (tmp_path / "run" / name).exists()


# -- config files -----------------------------------------------------------------------

def test_parse_config_file(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text(
        "# scaling study\n"
        "problem = dennis_woods\n"
        "solver = minmax   # the scalar instance\n"
        "\n"
        "epsilon_grid = 0.2, 0.1\n"
    )
    d = parse_config_file(cfg)
    assert d == {"problem": "dennis_woods", "solver": "minmax", "epsilon_grid": "0.2, 0.1"}


def test_parse_config_file_rejects_bare_words(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("problem dennis_woods\n")
    with pytest.raises(ValueError):
        parse_config_file(cfg)


def test_experiment_from_dict_defaults_and_overrides():
    e = experiment_from_dict({"problem": "dennis_woods"})
    assert e.solver == "minmax"
    assert e.epsilon_grid == (0.2, 0.1, 0.05, 0.025)
    assert e.directions == DirectionConfig(kind="rotated", level=2)
    assert e.direction_choice == "union"
    e2 = experiment_from_dict(
        {
            "problem": "quad2-3",
            "solver": "dms",
            "alpha0": "2.0",
            "gamma": "2.0",
            "directions": "coordinate",
            "direction_choice": "round-robin",
            "epsilon_grid": "0.5, 0.25",
            "seeds": "1, 2, 3",
            "x0": "4.0, 4.0",
            "max_iterations": "500",
        }
    )
    assert e2.step.alpha0 == 2.0 and e2.step.gamma == 2.0
    assert e2.epsilon_grid == (0.5, 0.25)
    assert e2.seeds == (1, 2, 3)
    assert e2.x0 == (4.0, 4.0) and e2.start_box is None
    assert e2.max_iterations == 500


def test_experiment_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(problem="dennis_woods", solver="annealing")
    with pytest.raises(ValueError):
        ExperimentConfig(problem="dennis_woods", epsilon_grid=(0.1, 0.2))
    with pytest.raises(ValueError):
        ExperimentConfig(problem="dennis_woods", epsilon_grid=(0.2, 1.5))
    with pytest.raises(ValueError):
        ExperimentConfig(problem="dennis_woods", x0=None, start_box=None)
    with pytest.raises(ValueError):
        experiment_from_dict({"problem": "dennis_woods", "start_box": "1,2,3"})


# -- experiments --------------------------------------------------------------------------

def test_small_scaling_experiment_passes():
    cfg = ExperimentConfig(
        problem="dennis_woods",
        seeds=(0, 1),
        max_iterations=5000,
    )
    report = run_experiment(cfg)
    assert report.passed, report.failures
    assert len(report.stats) == 8
    assert set(report.medians) == {0.2, 0.1, 0.05, 0.025}
    assert report.slope is not None
    for s in report.stats:
        assert not s.censored
        assert s.k_eps == s.iterations - 1
        assert s.bound is not None and s.k_eps <= s.bound
        assert s.max_poll_size == 8  # merged rotation family


def test_censored_runs_warn_and_fail_the_fit():
    cfg = ExperimentConfig(problem="dennis_woods", seeds=(0,), max_iterations=3)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = run_experiment(cfg)
    assert any("excluded from the fit" in str(w.message) for w in caught)
    assert not report.passed
    assert any("usable grid points" in f for f in report.failures)
    assert all(s.censored and s.k_eps is None for s in report.stats)


def test_scaling_report_serialization(tmp_path):
    cfg = ExperimentConfig(
        problem="dennis_woods", seeds=(0,), epsilon_grid=(0.2, 0.1, 0.05, 0.025),
        max_iterations=5000,
    )
    report = run_experiment(cfg)
    text = report.to_text()
    assert "verdict:" in text and "slope" in text
    out = tmp_path / "scaling.csv"
    report.write_csv(out)
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 1 + len(report.stats)
    assert rows[0].startswith("epsilon,seed,iterations")


def test_all_checks_tuple_is_the_default():
    assert ExperimentConfig(problem="dennis_woods").checks == ALL_CHECKS
