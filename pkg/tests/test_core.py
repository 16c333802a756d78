"""Value types: construction rules, forcing margins, evaluation counting."""

import numpy as np
import pytest

from dmsearch.core import (
    ForcingFunction,
    MultiObjective,
    ObjectiveValue,
    Point,
    StepParams,
    evaluate,
    finite_difference_jacobian,
    forcing,
)


def test_point_is_readonly_float64():
    p = Point([1, 2, 3])
    assert p.coords.dtype == np.float64
    assert p.n == 3
    with pytest.raises(ValueError):
        p.coords[0] = 9.0


def test_point_rejects_non_finite_and_non_vector():
    with pytest.raises(ValueError):
        Point([1.0, np.nan])
    with pytest.raises(ValueError):
        Point([1.0, np.inf])
    with pytest.raises(ValueError):
        Point(np.zeros((2, 2)))


def test_objective_value_needs_two_components():
    v = ObjectiveValue([1.0, 2.0])
    assert v.m == 2 and v.is_finite
    with pytest.raises(ValueError):
        ObjectiveValue([1.0])


def test_objective_value_allows_plus_inf_only():
    v = ObjectiveValue([1.0, np.inf])
    assert not v.is_finite
    with pytest.raises(ValueError):
        ObjectiveValue([1.0, -np.inf])
    with pytest.raises(ValueError):
        ObjectiveValue([1.0, np.nan])


def test_forcing_values():
    ff = ForcingFunction()  # c=1, p=2
    assert forcing(ff, 0.5) == 0.25
    assert ff(2.0) == 4.0
    cubic = ForcingFunction(c=0.5, p=3.0)
    assert cubic(2.0) == 4.0
    assert np.isclose(cubic(0.1), 0.5 * 1e-3)


def test_forcing_rejects_bad_parameters_and_argument():
    with pytest.raises(ValueError):
        ForcingFunction(c=0.0)
    with pytest.raises(ValueError):
        ForcingFunction(p=1.0)
    with pytest.raises(ValueError):
        forcing(ForcingFunction(), 0.0)
    with pytest.raises(ValueError):
        forcing(ForcingFunction(), -1.0)


def test_step_params_validation():
    StepParams(alpha0=2.0, beta1=0.25, beta2=0.5, gamma=2.0)
    with pytest.raises(ValueError):
        StepParams(alpha0=0.0)
    with pytest.raises(ValueError):
        StepParams(beta1=0.0)
    with pytest.raises(ValueError):
        StepParams(beta1=0.6, beta2=0.5)
    with pytest.raises(ValueError):
        StepParams(beta2=1.0)
    with pytest.raises(ValueError):
        StepParams(gamma=0.99)


def _paraboloids() -> MultiObjective:
    return MultiObjective(
        n=2,
        m=2,
        fn=lambda x: np.array([x @ x, (x[0] - 1.0) ** 2 + x[1] ** 2]),
        jacobian=lambda x: np.array([[2 * x[0], 2 * x[1]], [2 * (x[0] - 1.0), 2 * x[1]]]),
    )


def test_evaluate_counts_and_validates():
    obj = _paraboloids()
    assert obj.evaluations == 0
    v = evaluate(obj, np.array([1.0, 2.0]))
    assert isinstance(v, ObjectiveValue)
    assert np.allclose(v.values, [5.0, 4.0])
    obj.evaluate(np.zeros(2))
    assert obj.evaluations == 2
    obj.reset_evaluations()
    assert obj.evaluations == 0
    with pytest.raises(ValueError):
        evaluate(obj, np.zeros(3))
    with pytest.raises(ValueError):
        evaluate(obj, np.array([np.nan, 0.0]))


def test_evaluate_rejects_wrong_output_width():
    bad = MultiObjective(n=1, m=2, fn=lambda x: np.array([1.0, 2.0, 3.0]))
    with pytest.raises(ValueError):
        evaluate(bad, np.zeros(1))


def test_evaluation_counter_is_thread_safe():
    import concurrent.futures

    obj = _paraboloids()
    with concurrent.futures.ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda _: evaluate(obj, np.zeros(2)), range(400)))
    assert obj.evaluations == 400


def test_multiobjective_rejects_single_objective_and_bad_bounds():
    with pytest.raises(ValueError):
        MultiObjective(n=1, m=1, fn=lambda x: np.array([0.0]))
    with pytest.raises(ValueError):
        MultiObjective(n=1, m=2, fn=lambda x: np.zeros(2), f_bounds=(1.0, 0.0))


def test_finite_difference_matches_analytic_jacobian():
    obj = _paraboloids()
    rng = np.random.default_rng(3)
    for _ in range(5):
        x = rng.uniform(-2.0, 2.0, size=2)
        fd = finite_difference_jacobian(obj, x)
        assert np.allclose(fd, obj.jacobian(x), atol=1e-6)


def test_finite_difference_does_not_count_evaluations():
    obj = _paraboloids()
    finite_difference_jacobian(obj, np.zeros(2))
    assert obj.evaluations == 0
