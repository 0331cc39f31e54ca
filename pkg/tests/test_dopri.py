"""Adaptive Runge-Kutta integrator: closed forms, order, breakpoints, budgets."""

from __future__ import annotations

import math

import numpy as np
import pytest

from thingtwin.dopri import solve, solve_fixed
from thingtwin.errors import StepSizeUnderflowError


def test_exponential_decay_closed_form():
    sol = solve(lambda t, y: -y, 0.0, 10.0, [1.0], rtol=1e-9, atol=1e-12)
    exact = math.exp(-10.0)
    assert abs(sol.y_end[0] - exact) / exact <= 1e-8
    assert sol.t_start == 0.0 and sol.t_end == 10.0


def test_harmonic_oscillator_closed_form():
    def f(t, y):
        return np.array([y[1], -y[0]])

    sol = solve(f, 0.0, 10.0, [1.0, 0.0], rtol=1e-9, atol=1e-12)
    assert abs(sol.y_end[0] - math.cos(10.0)) <= 1e-7
    assert abs(sol.y_end[1] + math.sin(10.0)) <= 1e-7


def test_dense_output_tracks_closed_form_between_steps():
    sol = solve(lambda t, y: -y, 0.0, 5.0, [1.0], rtol=1e-9, atol=1e-12)
    for t in np.linspace(0.0, 5.0, 137):
        assert abs(sol.value(t)[0] - math.exp(-t)) <= 1e-8


def test_dense_output_continuous_at_segment_joints():
    sol = solve(lambda t, y: np.array([math.sin(t) * y[0]]), 0.0, 8.0, [1.0])
    for seg in sol.segments[1:]:
        left = sol.value(seg.t0 - 1e-13)
        right = seg.y0
        assert abs(left[0] - right[0]) <= 1e-9


def test_value_outside_span_rejected_with_slack():
    sol = solve(lambda t, y: -y, 0.0, 1.0, [1.0])
    sol.value(0.0)
    sol.value(1.0)
    sol.value(1.0 + 1e-10)  # within the documented slack
    with pytest.raises(ValueError):
        sol.value(1.1)
    with pytest.raises(ValueError):
        sol.value(-0.1)


def test_time_dependent_rhs():
    # y' = 2t  ->  y = t^2
    sol = solve(lambda t, y: np.array([2.0 * t]), 0.0, 3.0, [0.0],
                rtol=1e-10, atol=1e-12)
    assert abs(sol.y_end[0] - 9.0) <= 1e-9


def test_zero_length_span():
    sol = solve(lambda t, y: -y, 2.0, 2.0, [3.0, 4.0])
    assert sol.y_end.tolist() == [3.0, 4.0]
    assert sol.value(2.0).tolist() == [3.0, 4.0]


def test_backward_span_rejected():
    with pytest.raises(ValueError):
        solve(lambda t, y: -y, 1.0, 0.0, [1.0])


def test_non_finite_initial_state_rejected():
    with pytest.raises(ValueError):
        solve(lambda t, y: -y, 0.0, 1.0, [math.nan])


def test_fifth_order_convergence_of_fixed_step():
    # y' = y cos t has the exact solution exp(sin t); halving the step must
    # shrink the endpoint error about 2^5 once h is in the asymptotic range
    def f(t, y):
        return y * math.cos(t)

    exact = math.exp(math.sin(4.0))
    errs = [abs(solve_fixed(f, 0.0, 4.0, [1.0], h).y_end[0] - exact)
            for h in (0.25, 0.125, 0.0625, 0.03125)]
    assert errs[0] > errs[1] > errs[2] > errs[3]
    order = math.log2(errs[2] / errs[3])
    assert 4.3 <= order <= 5.8


def test_dense_output_converges_at_method_order():
    def f(t, y):
        return y * math.cos(t)

    def max_dense_err(h: float) -> float:
        sol = solve_fixed(f, 0.0, 4.0, [1.0], h)
        return max(abs(sol.value(t)[0] - math.exp(math.sin(t)))
                   for t in np.linspace(0.01, 3.99, 200))

    coarse, fine = max_dense_err(0.25), max_dense_err(0.125)
    assert 20.0 <= coarse / fine <= 50.0


def test_fixed_step_lands_exactly_on_t1():
    sol = solve_fixed(lambda t, y: -y, 0.0, 1.0, [1.0], 0.3)
    assert sol.t_end == 1.0
    assert abs(sol.y_end[0] - math.exp(-1.0)) <= 1e-5


def test_breakpoints_make_discontinuous_forcing_exact():
    # u(t) steps 0 -> 1 at t=1/3 (not a nice binary fraction); the solution of
    # y' = u(t) is exactly max(0, t - 1/3)
    cut = 1.0 / 3.0

    def f(t, y):
        return np.array([1.0 if t >= cut else 0.0])

    sol = solve(f, 0.0, 1.0, [0.0], rtol=1e-10, atol=1e-12,
                breakpoints=[cut])
    assert abs(sol.y_end[0] - (1.0 - cut)) <= 1e-10
    # one accepted step ends exactly at the cut and the next starts there
    joints = [seg.t0 for seg in sol.segments]
    assert cut in joints
    assert abs(sol.value(cut)[0]) <= 1e-11


def test_breakpoints_outside_span_ignored():
    sol = solve(lambda t, y: -y, 0.0, 1.0, [1.0],
                breakpoints=[-5.0, 0.0, 1.0, 7.0])
    assert abs(sol.y_end[0] - math.exp(-1.0)) <= 1e-5


def test_step_budget_exhaustion_raises():
    def f(t, y):
        return np.array([math.cos(40.0 * t) * 40.0])

    with pytest.raises(StepSizeUnderflowError) as exc:
        solve(f, 0.0, 100.0, [0.0], rtol=1e-10, atol=1e-12, max_steps=10)
    assert "step budget" in str(exc.value)


def test_blow_up_collapses_step_and_raises():
    # y' = y^2 blows up at t=1; past it the controller shrinks h to nothing
    with pytest.raises(StepSizeUnderflowError):
        solve(lambda t, y: y ** 2, 0.0, 1.5, [1.0])


def test_max_step_is_respected():
    sol = solve(lambda t, y: -0.01 * y, 0.0, 10.0, [1.0], max_step=0.5)
    assert all(seg.h <= 0.5 + 1e-12 for seg in sol.segments)


def test_stiff_linear_problem_still_accurate():
    # lambda = -50 over a long span: expensive for an explicit method but
    # must stay accurate
    sol = solve(lambda t, y: -50.0 * y, 0.0, 2.0, [1.0], rtol=1e-8, atol=1e-12)
    assert abs(sol.y_end[0] - math.exp(-100.0)) <= 1e-12


def test_derivative_overflow_at_start_raises_underflow_not_a_crash():
    # f(t0, y0) is already non-finite: the start-step heuristic must fall
    # back to a probe step and let error control report the blow-up
    with pytest.raises(StepSizeUnderflowError):
        solve(lambda t, y: 1e200 * y ** 3, 0.0, 10.0, [1e200])
