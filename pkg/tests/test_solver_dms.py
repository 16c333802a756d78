"""The multisearch loop: trace invariants, acceptance semantics, stepsize
discipline, selection rules, and generation-chain accounting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from dmsearch.core import ForcingFunction, MultiObjective, StepParams, forcing
from dmsearch.directions import DirectionConfig
from dmsearch.dominance import ParetoArchive, ParetoEntry, dominates, in_margin_dominated
from dmsearch.problems import get_problem
from dmsearch.solver_dms import (
    SUCCESS_POLL,
    SUCCESS_SEARCH,
    UNSUCCESSFUL,
    DmsConfig,
    IterationRecord,
    RunTrace,
    count_iteration_sets,
    dms_run,
    linked_sequences,
)
from dmsearch.solver_minmax import minmax_update_rule

ROTATED2 = DirectionConfig(kind="rotated", level=2)


def _run(problem="dennis_woods", x0=(2.0, 3.0), **kw):
    p = get_problem(problem)
    cfg = DmsConfig(**kw)
    return dms_run(p, np.asarray(x0, dtype=float), cfg, problem_name=problem)


# -- basic trace invariants ----------------------------------------------------

def test_runs_are_deterministic():
    a = _run(max_iterations=120, directions=ROTATED2)
    b = _run(max_iterations=120, directions=ROTATED2)
    assert len(a.records) == len(b.records)
    for ra, rb in zip(a.records, b.records):
        assert ra == rb
    assert a.archive_ids == b.archive_ids
    for i in a.entries:
        assert np.array_equal(a.entries[i].point, b.entries[i].point)


def test_trace_shape_and_bookkeeping():
    t = _run(max_iterations=80)
    assert t.solver == "dms" and t.stop_reason == "max_iterations"
    assert len(t.records) == 80
    assert len(t.archive_ids) == 81  # state before each iteration plus final
    for r in t.records:
        assert r.status in (SUCCESS_SEARCH, SUCCESS_POLL, UNSUCCESSFUL)
        assert r.iterate_id in t.entries
        assert r.archive_size == len(t.archive_ids[r.k + 1])
        assert r.margin == forcing(ForcingFunction(), r.stepsize)
    for ids in t.archive_ids:
        assert all(i in t.entries for i in ids)
    # one evaluation for x0, then per-iteration counts
    assert t.evaluations_total == 1 + sum(r.evaluations for r in t.records)


def test_reference_point_uses_declared_bounds():
    p = get_problem("dennis_woods")
    t = _run(max_iterations=10)
    assert np.all(t.reference_point == p.f_bounds[1])


def test_final_archive_is_mutually_nondominated():
    t = _run(max_iterations=300)
    vals = [e.value for e in t.final_archive]
    assert len(vals) > 5  # the run must actually accumulate a front
    for i, u in enumerate(vals):
        for j, v in enumerate(vals):
            if i != j:
                assert not dominates(u, v)


def test_archive_states_only_change_at_successes():
    t = _run(max_iterations=150, directions=ROTATED2)
    for r in t.records:
        before = set(t.archive_ids[r.k])
        after = set(t.archive_ids[r.k + 1])
        if r.status == UNSUCCESSFUL:
            # only the center swaps for its contracted child
            assert len(after - before) == 1
            (child,) = after - before
            assert t.entries[child].parent_id == r.iterate_id
            assert t.entries[child].stepsize == pytest.approx(0.5 * r.stepsize)
            assert np.array_equal(
                t.entries[child].point, t.entries[r.iterate_id].point
            )
        else:
            assert after - before  # something new was accepted


def test_provenance_links_and_creation_times():
    t = _run(max_iterations=200)
    roots = [e for e in t.entries.values() if e.parent_id is None]
    assert len(roots) == 1 and roots[0].created_at == 0
    for e in t.entries.values():
        if e.parent_id is not None:
            assert e.parent_id in t.entries
            assert e.parent_id < e.id
            assert 1 <= e.created_at <= len(t.records)


def test_stepsize_growth_on_success():
    t = _run(max_iterations=60, step=StepParams(gamma=2.0), directions=ROTATED2)
    for r in t.records:
        if r.status == UNSUCCESSFUL:
            continue
        after = set(t.archive_ids[r.k + 1]) - set(t.archive_ids[r.k])
        for i in after:
            assert t.entries[i].stepsize == pytest.approx(2.0 * r.stepsize)


# -- termination ------------------------------------------------------------------

def test_alpha_min_stop():
    t = _run(max_iterations=5000, alpha_min=0.05)
    assert t.stop_reason == "alpha_min"
    # the largest-stepsize rule saw nothing at or above the floor
    assert all(t.entries[i].stepsize < 0.05 for i in t.archive_ids[-1])
    assert all(r.stepsize >= 0.05 for r in t.records)


def test_epsilon_stop_requires_tracking():
    with pytest.raises(ValueError):
        _run(max_iterations=10, epsilon=0.1)
    with pytest.raises(ValueError):
        DmsConfig(epsilon=-0.5, track_criticality=True)


def test_epsilon_stop_records_final_criticality():
    t = _run(
        problem="sphere2",
        x0=(4.0, 4.0),
        max_iterations=4000,
        alpha_min=0.0,
        track_criticality=True,
        epsilon=0.25,
        directions=ROTATED2,
    )
    assert t.stop_reason == "epsilon"
    assert t.final_criticality is not None and t.final_criticality <= 0.25
    assert all(r.crit is not None and r.crit > 0.25 for r in t.records)


def test_zero_iterations_allowed():
    t = _run(max_iterations=0)
    assert t.records == [] and len(t.archive_ids) == 1
    assert t.evaluations_total == 1


# -- acceptance semantics -----------------------------------------------------------

@settings(max_examples=300)
@given(
    hnp.arrays(np.float64, 3, elements=st.floats(-10, 10)),
    hnp.arrays(np.float64, 3, elements=st.floats(-10, 10)),
    st.floats(0.0, 5.0),
)
def test_worst_component_decrease_implies_margin_escape(w, u, a):
    """The scalar acceptance test used by the min-max instance is a special
    case of margin escape against a singleton archive."""
    arch = ParetoArchive(
        [ParetoEntry(id=0, point=np.zeros(1), value=w, stepsize=1.0)]
    )
    if np.max(u) < np.max(w) - a:
        assert not in_margin_dominated(u, arch, a)


def test_margin_acceptance_is_what_changes_the_archive():
    t = _run(max_iterations=120, directions=ROTATED2)
    ff = ForcingFunction()
    for r in t.records:
        if r.status != SUCCESS_POLL:
            continue
        before = [t.entries[i].value for i in t.archive_ids[r.k]]
        arch = ParetoArchive(
            [ParetoEntry(id=i, point=np.zeros(1), value=v, stepsize=1.0)
             for i, v in enumerate(before)]
        )
        accepted = set(t.archive_ids[r.k + 1]) - set(t.archive_ids[r.k])
        for i in accepted:
            if t.entries[i].stepsize != r.stepsize and t.entries[i].parent_id == r.iterate_id:
                continue  # grown copy of the center, not a poll product
            assert not in_margin_dominated(
                t.entries[i].value, arch, forcing(ff, r.stepsize)
            )


def test_minmax_update_rule_keeps_singleton_archive():
    t = _run(
        max_iterations=250,
        update_rule=minmax_update_rule(1.0),
        forcing=ForcingFunction(c=0.5, p=2.0),
    )
    for ids in t.archive_ids:
        assert len(ids) == 1


# -- search step ------------------------------------------------------------------

def test_search_step_takes_priority_and_is_counted():
    p = get_problem("sphere2")

    def jump_to_center(archive, alpha):
        return [np.array([0.5, 0.5])]

    t = dms_run(
        p, np.array([4.0, 4.0]), DmsConfig(search_step=jump_to_center, max_iterations=1)
    )
    assert t.records[0].status == SUCCESS_SEARCH
    assert t.records[0].evaluations == 1  # the proposal; no poll happened
    assert t.records[0].direction_set == -1
    assert t.config_echo["search"] == "custom"


def test_empty_search_proposals_fall_through_to_poll():
    t = _run(max_iterations=5, search_step=lambda archive, alpha: [])
    assert all(r.direction_set >= 0 for r in t.records)


# -- evaluation counting ----------------------------------------------------------

def test_complete_poll_evaluates_the_whole_set():
    t = _run(max_iterations=60, directions=ROTATED2)
    for r in t.records:
        assert r.evaluations == len(t.direction_sets[r.direction_set])


def test_opportunistic_poll_stops_early_and_spends_less():
    full = _run(max_iterations=100, directions=ROTATED2)
    opp = _run(max_iterations=100, directions=ROTATED2, opportunistic=True)
    for r in opp.records:
        assert r.evaluations <= len(opp.direction_sets[r.direction_set])
    assert opp.evaluations_total <= full.evaluations_total
    assert any(
        r.evaluations < len(opp.direction_sets[r.direction_set])
        for r in opp.records
        if r.status == SUCCESS_POLL
    )


# -- direction choice ----------------------------------------------------------------

def test_round_robin_cycles_through_the_family():
    t = _run(max_iterations=8, directions=ROTATED2)
    assert [r.direction_set for r in t.records] == [0, 1] * 4


def test_random_choice_is_seeded():
    a = _run(max_iterations=40, directions=ROTATED2, direction_choice="random", seed=3)
    b = _run(max_iterations=40, directions=ROTATED2, direction_choice="random", seed=3)
    assert [r.direction_set for r in a.records] == [r.direction_set for r in b.records]
    assert len({r.direction_set for r in a.records}) == 2


def test_union_choice_merges_the_family_into_one_set():
    t = _run(max_iterations=10, directions=ROTATED2, direction_choice="union")
    assert len(t.direction_sets) == 1
    assert len(t.direction_sets[0]) == 8
    assert all(r.direction_set == 0 for r in t.records)


def test_unknown_direction_choice_rejected():
    with pytest.raises(ValueError):
        DmsConfig(direction_choice="alternate")


# -- escalation hook ------------------------------------------------------------------

def _twin_paraboloid():
    # both objectives identical: the filter degenerates to scalar descent,
    # so polling at the exact minimum fails forever
    return MultiObjective(
        n=2,
        m=2,
        fn=lambda x: np.array([0.5 * float(x @ x)] * 2),
        jacobian=lambda x: np.stack([x, x]),
    )


def test_escalation_widens_the_rotated_family_under_stall():
    t = dms_run(
        _twin_paraboloid(),
        np.zeros(2),
        DmsConfig(
            directions=DirectionConfig(kind="rotated", level=1),
            escalate_after=3,
            max_iterations=12,
            alpha_min=0.0,
        ),
    )
    assert all(r.status == UNSUCCESSFUL for r in t.records)
    labels = [s.label for s in t.direction_sets]
    assert labels[0] == "rotated(1)#0"
    assert len(labels) == 31  # levels 1..5 appended after 4 escalations
    assert max(r.direction_set for r in t.records) > 0


def test_no_escalation_without_the_hook():
    t = dms_run(
        _twin_paraboloid(),
        np.zeros(2),
        DmsConfig(directions=DirectionConfig(kind="rotated", level=1), max_iterations=12),
    )
    assert len(t.direction_sets) == 1


# -- selection strategies --------------------------------------------------------------

def test_fifo_selection_polls_oldest_entries_first():
    lg = _run(max_iterations=150)
    ff = _run(max_iterations=150, selection="fifo")
    assert [r.iterate_id for r in lg.records] != [r.iterate_id for r in ff.records]
    # fifo: the selected creation times never decrease while entries persist
    t0 = [ff.entries[r.iterate_id].created_at for r in ff.records]
    assert t0[0] == 0


def test_random_selection_reproducible():
    a = _run(max_iterations=100, selection="random", seed=11)
    b = _run(max_iterations=100, selection="random", seed=11)
    assert [r.iterate_id for r in a.records] == [r.iterate_id for r in b.records]


# -- generation chains: synthetic oracles ------------------------------------------------

def _entry(i, parent, created, stepsize=1.0):
    return ParetoEntry(
        id=i, point=np.zeros(1), value=np.array([float(i), -float(i)]),
        stepsize=stepsize, parent_id=parent, created_at=created,
    )


def _record(k, status):
    return IterationRecord(
        k=k, status=status, iterate_id=0, stepsize=1.0, margin=1.0,
        evaluations=0, hv_before=0.0, hv_after=0.0, crit=None, poll_crit=None,
        archive_size=1, direction_set=-1,
    )


def _synthetic(entries, archive_states, statuses):
    t = RunTrace(solver="dms", problem_name="synthetic")
    t.entries = {e.id: e for e in entries}
    t.archive_ids = [tuple(s) for s in archive_states]
    t.records = [_record(k, s) for k, s in enumerate(statuses)]
    return t


def test_single_split_yields_two_chains():
    t = _synthetic(
        entries=[_entry(0, None, 0), _entry(1, 0, 1), _entry(2, 0, 2)],
        archive_states=[(0,), (0, 1), (0, 1, 2), (0, 1, 2)],
        statuses=[SUCCESS_POLL, SUCCESS_POLL, UNSUCCESSFUL],
    )
    stats = linked_sequences(t, 0, 2)
    assert stats.chain_count == 2
    assert stats.max_chain_length == 2
    assert stats.per_chain_unsuccessful == (0, 0)


def test_binary_tree_of_depth_three_yields_four_chains():
    entries = [
        _entry(0, None, 0),
        _entry(1, 0, 1), _entry(2, 0, 1),
        _entry(3, 1, 2), _entry(4, 1, 2), _entry(5, 2, 2), _entry(6, 2, 2),
    ]
    states = [(0,), (0, 1, 2), (0, 1, 2, 3, 4, 5, 6), (0, 1, 2, 3, 4, 5, 6)]
    t = _synthetic(entries, states, [SUCCESS_POLL, SUCCESS_POLL, UNSUCCESSFUL])
    stats = linked_sequences(t, 0, 2)
    assert stats.chain_count == 4
    assert stats.max_chain_length == 3
    assert stats.per_chain_unsuccessful == (0, 0, 0, 0)


def test_unsuccessful_links_are_counted_per_chain():
    entries = [
        _entry(0, None, 0),
        _entry(1, 0, 1), _entry(2, 0, 1),
        _entry(3, 1, 2), _entry(4, 1, 2), _entry(5, 2, 2), _entry(6, 2, 2),
    ]
    states = [(0,), (0, 1, 2), (0, 1, 2, 3, 4, 5, 6), (0, 1, 2, 3, 4, 5, 6)]
    # the grandchildren were all created by an unsuccessful iteration
    t = _synthetic(entries, states, [SUCCESS_POLL, UNSUCCESSFUL, UNSUCCESSFUL])
    stats = linked_sequences(t, 0, 2)
    assert stats.per_chain_unsuccessful == (1, 1, 1, 1)


def test_window_restriction_cuts_roots():
    # restricting the window to the grandchild generation severs parents
    entries = [
        _entry(0, None, 0),
        _entry(1, 0, 1),
        _entry(2, 1, 2),
    ]
    states = [(0,), (1,), (2,), (2,)]
    t = _synthetic(entries, states, [SUCCESS_POLL, SUCCESS_POLL, UNSUCCESSFUL])
    full = linked_sequences(t, 0, 2)
    assert full.chain_count == 1 and full.max_chain_length == 3
    tail = linked_sequences(t, 2, 2)
    assert tail.chain_count == 1 and tail.max_chain_length == 1


def test_window_bounds_are_validated():
    t = _synthetic([_entry(0, None, 0)], [(0,), (0,)], [UNSUCCESSFUL])
    with pytest.raises(ValueError):
        linked_sequences(t, 0, 5)
    with pytest.raises(ValueError):
        count_iteration_sets(t, 1, 0)


def test_count_iteration_sets_matches_statuses():
    t = _run(max_iterations=90, directions=ROTATED2)
    succ, unsucc = count_iteration_sets(t, 0, len(t.records) - 1)
    assert succ + unsucc == len(t.records)
    assert succ == sum(1 for r in t.records if r.status != UNSUCCESSFUL)
    s2, u2 = count_iteration_sets(t, 10, 20)
    assert s2 + u2 == 11


def test_chain_counts_on_a_real_run_are_consistent():
    t = _run(max_iterations=200)
    stats = linked_sequences(t, 0, len(t.records) - 1)
    assert stats.chain_count == len(stats.per_chain_unsuccessful)
    assert stats.chain_count >= 1
    assert 1 <= stats.max_chain_length <= len(t.records) + 1
    _, unsucc = count_iteration_sets(t, 0, len(t.records) - 1)
    assert all(u <= unsucc for u in stats.per_chain_unsuccessful)
