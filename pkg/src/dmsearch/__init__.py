"""Derivative-free multiobjective optimization with verifiable run traces.

The solvers keep a full provenance trail — every archive entry, stepsize
change, and poll direction set — so the per-iteration inequalities behind
their worst-case complexity guarantees can be re-derived from the trace
after the fact.
"""

from .core import (
    ForcingFunction,
    MultiObjective,
    ObjectiveValue,
    Point,
    StepParams,
    evaluate,
    finite_difference_jacobian,
    forcing,
)
from .criticality import (
    CriticalityReport,
    criticality,
    criticality_ratio,
    min_norm_convex_closed_form,
    min_norm_convex_fw,
    poll_criticality,
)
from .directions import (
    DirectionConfig,
    PositiveSpanningSet,
    build_family,
    coordinate_set,
    is_positive_spanning,
    parse_directions,
    random_dense_set,
    rotated_family,
)
from .dominance import (
    ParetoArchive,
    ParetoEntry,
    dominates,
    filter_insert,
    in_margin_dominated,
    make_selection,
    read_archive_csv,
    write_archive_csv,
)
from .harness import (
    ExperimentConfig,
    ScalingReport,
    VerifyReport,
    read_run,
    run_experiment,
    run_single,
    verify_trace,
    write_run,
)
from .hypervolume import ReferenceTracker, hypervolume, hypervolume_increase
from .kernels import BACKEND as KERNEL_BACKEND
from .problems import ProblemSpec, get_problem, list_problems
from .solver_dms import (
    DmsConfig,
    IterationRecord,
    LinkedSequenceStats,
    RunTrace,
    count_iteration_sets,
    dms_run,
    linked_sequences,
)
from .solver_minmax import (
    MinMaxConfig,
    criticality_iteration_bound,
    fmax,
    minmax_run,
    minmax_update_rule,
    squared_stepsize_budget,
)

__version__ = "0.1.0"

__all__ = [
    "ForcingFunction",
    "MultiObjective",
    "ObjectiveValue",
    "Point",
    "StepParams",
    "evaluate",
    "finite_difference_jacobian",
    "forcing",
    "CriticalityReport",
    "criticality",
    "criticality_ratio",
    "min_norm_convex_closed_form",
    "min_norm_convex_fw",
    "poll_criticality",
    "DirectionConfig",
    "PositiveSpanningSet",
    "build_family",
    "coordinate_set",
    "is_positive_spanning",
    "parse_directions",
    "random_dense_set",
    "rotated_family",
    "ParetoArchive",
    "ParetoEntry",
    "dominates",
    "filter_insert",
    "in_margin_dominated",
    "make_selection",
    "read_archive_csv",
    "write_archive_csv",
    "ExperimentConfig",
    "ScalingReport",
    "VerifyReport",
    "read_run",
    "run_experiment",
    "run_single",
    "verify_trace",
    "write_run",
    "ReferenceTracker",
    "hypervolume",
    "hypervolume_increase",
    "KERNEL_BACKEND",
    "ProblemSpec",
    "get_problem",
    "list_problems",
    "DmsConfig",
    "IterationRecord",
    "LinkedSequenceStats",
    "RunTrace",
    "count_iteration_sets",
    "dms_run",
    "linked_sequences",
    "MinMaxConfig",
    "criticality_iteration_bound",
    "fmax",
    "minmax_run",
    "minmax_update_rule",
    "squared_stepsize_budget",
    "__version__",
]
