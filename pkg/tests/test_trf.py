"""Bound-constrained least-squares solver: analytic optima, box handling."""

from __future__ import annotations

import math

import numpy as np
import pytest

from thingtwin.errors import NoProgressError
from thingtwin.trf import SolverConfig, SolverResult, least_squares_box

INF = math.inf


def run(fun, jac, v0, lb, ub, **cfg) -> SolverResult:
    return least_squares_box(fun, jac, np.asarray(v0, float),
                             np.asarray(lb, float), np.asarray(ub, float),
                             SolverConfig(**cfg) if cfg else SolverConfig())


# --- analytic optima --------------------------------------------------------------

def test_linear_least_squares_reaches_normal_equation_solution():
    a = np.array([[2.0, 0.5], [0.0, 1.0], [1.0, -1.0], [0.3, 0.3]])
    b = np.array([1.0, -2.0, 0.5, 3.0])
    v_star, *_ = np.linalg.lstsq(a, b, rcond=None)

    res = run(lambda v: a @ v - b, lambda v: a, [10.0, -10.0],
              [-INF, -INF], [INF, INF])
    assert res.converged
    assert np.allclose(res.v, v_star, atol=1e-6)


def test_rosenbrock_residual_form():
    # residuals (10(v1 - v0^2), 1 - v0): minimum at (1, 1) with zero cost
    def fun(v):
        return np.array([10.0 * (v[1] - v[0] ** 2), 1.0 - v[0]])

    def jac(v):
        return np.array([[-20.0 * v[0], 10.0], [-1.0, 0.0]])

    res = run(fun, jac, [-1.2, 1.0], [-INF, -INF], [INF, INF],
              ftol=1e-14, xtol=1e-14, max_iterations=500)
    assert np.allclose(res.v, [1.0, 1.0], atol=1e-6)
    assert res.cost <= 1e-12


def test_exponential_decay_rate_recovery():
    t = np.linspace(0.0, 5.0, 40)
    truth = 2.5 * np.exp(-0.7 * t)

    def fun(v):
        return v[0] * np.exp(-v[1] * t) - truth

    def jac(v):
        e = np.exp(-v[1] * t)
        return np.column_stack([e, -v[0] * t * e])

    res = run(fun, jac, [1.0, 0.1], [0.0, 0.0], [INF, INF])
    assert res.converged
    assert np.allclose(res.v, [2.5, 0.7], atol=1e-5)


# --- bounds -----------------------------------------------------------------------

def test_solution_pinned_at_active_bound():
    # unconstrained optimum v = -3; with lb = 0 the best feasible point is 0
    res = run(lambda v: v - (-3.0), lambda v: np.array([[1.0]]),
              [5.0], [0.0], [10.0])
    assert res.v[0] == pytest.approx(0.0, abs=1e-9)


def test_interior_optimum_with_finite_box():
    a = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    b = np.array([0.3, 0.8, 0.7])
    v_star, *_ = np.linalg.lstsq(a, b, rcond=None)
    assert np.all(v_star > 0.0) and np.all(v_star < 1.0)
    res = run(lambda v: a @ v - b, lambda v: a, [0.9, 0.1],
              [0.0, 0.0], [1.0, 1.0])
    assert np.allclose(res.v, v_star, atol=1e-6)


def test_initial_point_outside_box_is_projected():
    res = run(lambda v: v - 0.5, lambda v: np.eye(1), [99.0], [0.0], [1.0])
    assert res.cost_history[0] == pytest.approx((1.0 - 0.5) ** 2)
    assert res.v[0] == pytest.approx(0.5, abs=1e-8)


def test_every_iterate_stays_inside_the_box():
    lb = np.array([0.0, -1.0])
    ub = np.array([2.0, 1.0])
    seen: list[np.ndarray] = []

    def fun(v):
        seen.append(v.copy())
        return np.array([v[0] - 5.0, 3.0 * (v[1] + 4.0), v[0] * v[1] - 1.0])

    def jac(v):
        return np.array([[1.0, 0.0], [0.0, 3.0], [v[1], v[0]]])

    run(fun, jac, [1.0, 0.0], lb, ub, max_iterations=60)
    assert seen, "solver never evaluated the residuals"
    for v in seen:
        assert np.all(v >= lb - 1e-12) and np.all(v <= ub + 1e-12)


def test_inconsistent_bounds_rejected():
    with pytest.raises(ValueError):
        run(lambda v: v, lambda v: np.eye(1), [0.0], [1.0], [0.0])


# --- behavior guarantees -----------------------------------------------------------

def test_cost_history_is_non_increasing():
    t = np.linspace(0.0, 3.0, 25)
    truth = np.sin(1.3 * t) + 0.2 * t

    def fun(v):
        return v[0] * np.sin(v[1] * t) + v[2] * t - truth

    def jac(v):
        return np.column_stack([np.sin(v[1] * t),
                                v[0] * t * np.cos(v[1] * t), t])

    res = run(fun, jac, [0.5, 2.0, 0.0], [-10.0] * 3, [10.0] * 3,
              max_iterations=100)
    hist = res.cost_history
    assert len(hist) >= 2
    assert all(b <= a + 1e-15 for a, b in zip(hist, hist[1:]))


def test_deterministic_replay():
    def fun(v):
        return np.array([v[0] ** 2 - 2.0, v[0] + v[1], math.cos(v[1])])

    def jac(v):
        return np.array([[2.0 * v[0], 0.0], [1.0, 1.0],
                         [0.0, -math.sin(v[1])]])

    a = run(fun, jac, [1.0, 1.0], [-5.0, -5.0], [5.0, 5.0])
    b = run(fun, jac, [1.0, 1.0], [-5.0, -5.0], [5.0, 5.0])
    assert a.v.tolist() == b.v.tolist()
    assert a.cost_history == b.cost_history
    assert a.reason == b.reason


def test_zero_residual_start_converges_immediately():
    res = run(lambda v: np.zeros(2), lambda v: np.zeros((2, 1)),
              [1.0], [0.0], [2.0])
    assert res.converged
    assert res.reason == "gtol"
    assert res.iterations == 0


def test_max_iterations_reached_reports_reason():
    # tiny iteration budget on a slow problem
    t = np.linspace(0.0, 5.0, 30)
    truth = 2.5 * np.exp(-0.7 * t)

    def fun(v):
        return v[0] * np.exp(-v[1] * t) - truth

    def jac(v):
        e = np.exp(-v[1] * t)
        return np.column_stack([e, -v[0] * t * e])

    res = run(fun, jac, [0.1, 5.0], [0.0, 0.0], [INF, INF], max_iterations=2)
    assert not res.converged
    assert res.reason == "max_iterations"
    assert res.iterations <= 2


def test_lying_jacobian_raises_no_progress():
    # a Jacobian with the wrong sign makes every model step ascend; the solver
    # must refuse to pretend it converged
    def fun(v):
        return v - 10.0

    def jac(v):
        return -np.eye(1)

    with pytest.raises(NoProgressError):
        run(fun, jac, [0.0], [-INF], [INF])


def test_stalled_with_tiny_gradient_counts_as_converged():
    # flat residuals: gradient is zero at the (projected) start
    res = run(lambda v: np.array([1.0]), lambda v: np.array([[0.0]]),
              [0.5], [0.0], [1.0])
    assert res.converged


def test_badly_scaled_parameters_still_converge():
    # columns differ by 6 orders of magnitude; per-variable scaling must cope
    t = np.linspace(0.0, 1.0, 20)
    a = np.column_stack([t * 1e6, t ** 2 * 1e-3])
    v_true = np.array([3e-6, 2e3])
    b = a @ v_true

    res = run(lambda v: a @ v - b, lambda v: a, [1e-7, 1.0],
              [0.0, 0.0], [INF, INF], max_iterations=300)
    assert np.allclose(res.v, v_true, rtol=1e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(ftol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(xtol=-1.0)
