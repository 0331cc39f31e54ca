"""Parameter learning: residuals, finite-difference Jacobian, fitting.

A fit searches the flat parameter vector (and, unless pinned, the initial
differential state) that minimizes the squared mismatch between the
integrated model and timestamped observations, subject to the parameter
hyperbox declared in the Thing Description and the optional initial-state
box. The search is the dogleg trust-region scheme of :mod:`thingtwin.trf`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (BoundsViolationError, ContinuousFitError, DynamicsError,
                     UnknownStateNameError)
from .observations import ObservationSet
from .schedule import ActionSchedule
from .system import CompiledSystem, Trajectory, integrate
from .trf import SolverConfig, least_squares_box

__all__ = ["FitConfig", "FitResult", "compute_residuals",
           "finite_difference_jacobian", "fit_parameters", "continuous_fit",
           "prediction_mse", "default_initial_state"]

log = logging.getLogger(__name__)

_BLOWUP_COST = 1e30
# hard ceiling on integrator steps for any single candidate evaluation
_FIT_MAX_STEPS = 20_000
# Candidates needing far more steps than the starting guess are treated as
# unreachable (residuals plateau, the search backs off). Sparse samples often
# cannot distinguish "actuator settles in seconds" from "settles in minutes",
# and without this fence the search drifts along such flat directions into
# ever-stiffer corners where every probe costs seconds of integration.
_FIT_BUDGET_FACTOR = 3
_FIT_BUDGET_FLOOR = 3_000


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 200
    ftol: float = 1e-8
    xtol: float = 1e-8
    fd_rel_step: float = 1e-6
    fix_initial_state: bool = False
    seed_guess_override: tuple[float, ...] | None = None
    rtol: float = 1e-6
    atol: float = 1e-8

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in ("ftol", "xtol", "fd_rel_step", "rtol", "atol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def solver(self) -> SolverConfig:
        return SolverConfig(ftol=self.ftol, xtol=self.xtol,
                            max_iterations=self.max_iterations)

    def to_dict(self) -> dict:
        return {
            "maxIterations": self.max_iterations,
            "ftol": self.ftol, "xtol": self.xtol,
            "fdRelStep": self.fd_rel_step,
            "fixInitialState": self.fix_initial_state,
            "seedGuessOverride": (list(self.seed_guess_override)
                                  if self.seed_guess_override else None),
            "rtol": self.rtol, "atol": self.atol,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FitConfig":
        override = obj.get("seedGuessOverride")
        return cls(
            max_iterations=int(obj.get("maxIterations", 200)),
            ftol=float(obj.get("ftol", 1e-8)),
            xtol=float(obj.get("xtol", 1e-8)),
            fd_rel_step=float(obj.get("fdRelStep", 1e-6)),
            fix_initial_state=bool(obj.get("fixInitialState", False)),
            seed_guess_override=(tuple(float(v) for v in override)
                                 if override is not None else None),
            rtol=float(obj.get("rtol", 1e-6)),
            atol=float(obj.get("atol", 1e-8)),
        )


@dataclass
class FitResult:
    params: np.ndarray
    initial_state: np.ndarray
    initial_time: float
    final_cost: float
    iterations: int
    cost_history: list[float]
    converged: bool
    reason: str
    test_mse: float | None
    param_labels: tuple[str, ...]
    param_bounds: tuple[tuple[float, float], ...]
    state_names: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "params": [
                {"label": label, "value": float(v),
                 "lower": _json_num(lo), "upper": _json_num(hi)}
                for label, v, (lo, hi) in zip(
                    self.param_labels, self.params, self.param_bounds)],
            "initialState": {name: float(v) for name, v in zip(
                self.state_names, self.initial_state)},
            "initialTime": self.initial_time,
            "finalCost": self.final_cost,
            "iterations": self.iterations,
            "costHistory": [float(c) for c in self.cost_history],
            "converged": self.converged,
            "reason": self.reason,
            "testMse": self.test_mse,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "FitResult":
        entries = obj["params"]
        return cls(
            params=np.array([e["value"] for e in entries], dtype=float),
            initial_state=np.array(
                list(obj["initialState"].values()), dtype=float),
            initial_time=float(obj["initialTime"]),
            final_cost=float(obj["finalCost"]),
            iterations=int(obj["iterations"]),
            cost_history=[float(c) for c in obj["costHistory"]],
            converged=bool(obj["converged"]),
            reason=str(obj.get("reason", "")),
            test_mse=(None if obj.get("testMse") is None
                      else float(obj["testMse"])),
            param_labels=tuple(e["label"] for e in entries),
            param_bounds=tuple(
                (_parse_num(e["lower"]), _parse_num(e["upper"]))
                for e in entries),
            state_names=tuple(obj["initialState"].keys()),
        )


def _json_num(v: float):
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return float(v)


def _parse_num(v) -> float:
    return float(v)


# --- residuals ----------------------------------------------------------------

def _check_obs_names(sys: CompiledSystem, obs: ObservationSet) -> None:
    unknown = [n for n in obs.names if n not in sys.state_names]
    if unknown:
        raise UnknownStateNameError(
            f"observations name unknown states {unknown}; "
            f"system states are {list(sys.state_names)}")


def _clamp_into(values: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                what: str) -> np.ndarray:
    """Snap values marginally outside the box; reject real violations."""
    values = np.asarray(values, dtype=float)
    slack = 1e-9 * np.maximum(1.0, np.abs(values))
    below = values < lo
    above = values > hi
    if np.any(values < lo - slack) or np.any(values > hi + slack):
        raise BoundsViolationError(f"{what} outside declared bounds")
    out = values.copy()
    out[below] = lo[below]
    out[above] = hi[above]
    return out


def _residual_plan(sys: CompiledSystem, obs: ObservationSet):
    """Deterministic order: sample times ascending, state order within each."""
    order = {name: i for i, name in enumerate(sys.state_names)}
    plan: list[tuple[int, int, float]] = []  # (time idx, state idx, observed)
    for k, rec in enumerate(obs.records):
        for name in sorted(rec, key=order.__getitem__):
            plan.append((k, order[name], rec[name]))
    return plan


def _residuals_from_traj(traj: Trajectory, plan) -> np.ndarray:
    return np.array([traj.values[k, s] - observed for k, s, observed in plan])


def compute_residuals(sys: CompiledSystem, obs: ObservationSet,
                      schedule: ActionSchedule, p, x0, *,
                      rtol: float = 1e-6, atol: float = 1e-8) -> np.ndarray:
    """Flattened (predicted - observed) over all observed values.

    Integration runs from the schedule horizon start to the last observation
    time; entries are ordered by sample time, then state declaration order.
    """
    _check_obs_names(sys, obs)
    lo_p, hi_p = sys.param_bounds()
    p = _clamp_into(np.asarray(p, float), lo_p, hi_p, "parameters")
    lo_x, hi_x = sys.state_bounds_arrays()
    x0 = _clamp_into(np.asarray(x0, float), lo_x, hi_x, "initial state")
    t0 = schedule.horizon[0]
    t_end = obs.times[-1]
    traj = integrate(sys, x0, p, schedule, span=(t0, t_end),
                     sample_times=np.asarray(obs.times), rtol=rtol, atol=atol)
    return _residuals_from_traj(traj, _residual_plan(sys, obs))


def finite_difference_jacobian(sys: CompiledSystem, obs: ObservationSet,
                               schedule: ActionSchedule, p, x0, *,
                               fd_rel_step: float = 1e-6,
                               fix_initial_state: bool = False,
                               rtol: float = 1e-6,
                               atol: float = 1e-8,
                               base_residuals=None,
                               residual_fn=None) -> np.ndarray:
    """Forward-difference Jacobian of the residuals w.r.t. [p; x0].

    Steps are ``fd_rel_step * max(|v_i|, 1)``; a step that would cross the
    upper bound switches to a backward difference. With
    ``fix_initial_state`` the x0 columns are omitted. ``base_residuals``
    (the residuals at (p, x0), if already computed) saves one integration.
    ``residual_fn`` replaces the residual evaluation on the packed vector
    (the fitting loop passes its budgeted, blow-up-tolerant evaluator).
    """
    p = np.asarray(p, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    lo_p, hi_p = sys.param_bounds()
    lo_x, hi_x = sys.state_bounds_arrays()
    if fix_initial_state:
        v = p.copy()
        hi = hi_p
    else:
        v = np.concatenate([p, x0])
        hi = np.concatenate([hi_p, hi_x])

    def default_residuals(vec: np.ndarray) -> np.ndarray:
        if fix_initial_state:
            return compute_residuals(sys, obs, schedule, vec, x0,
                                     rtol=rtol, atol=atol)
        return compute_residuals(sys, obs, schedule, vec[:p.size],
                                 vec[p.size:], rtol=rtol, atol=atol)

    residuals = residual_fn if residual_fn is not None else default_residuals
    r0 = (np.asarray(base_residuals, dtype=float)
          if base_residuals is not None else residuals(v))
    jac = np.empty((r0.size, v.size))
    for i in range(v.size):
        step = fd_rel_step * max(abs(v[i]), 1.0)
        if v[i] + step > hi[i]:
            step = -step
        probe = v.copy()
        probe[i] += step
        jac[:, i] = (residuals(probe) - r0) / step
    return jac


# --- fitting --------------------------------------------------------------------

def default_initial_state(sys: CompiledSystem, obs: ObservationSet) -> np.ndarray:
    """Earliest observation per differential state; 0 projected into the
    state box when a state was never observed."""
    lo, hi = sys.state_bounds_arrays()
    out = np.empty(len(sys.diff_states))
    for i, name in enumerate(sys.diff_states):
        first = obs.earliest(name)
        if first is not None:
            out[i] = first[1]
        else:
            out[i] = min(max(0.0, lo[i]), hi[i])
    return np.clip(out, lo, hi)


def prediction_mse(sys: CompiledSystem, p, x0, schedule: ActionSchedule,
                   obs: ObservationSet, *, outputs: Sequence[str] | None = None,
                   rtol: float = 1e-6, atol: float = 1e-8) -> float:
    """Mean squared error on the designated outputs at the observation times
    (evaluate-only: no fitting)."""
    _check_obs_names(sys, obs)
    names = tuple(outputs) if outputs is not None else sys.outputs
    t0 = schedule.horizon[0]
    traj = integrate(sys, x0, p, schedule, span=(t0, obs.times[-1]),
                     sample_times=np.asarray(obs.times), rtol=rtol, atol=atol)
    errors = []
    index = {name: sys.state_index(name) for name in names}
    for k, rec in enumerate(obs.records):
        for name in names:
            if name in rec:
                errors.append(traj.values[k, index[name]] - rec[name])
    if not errors:
        raise ValueError(f"no observations of outputs {list(names)}")
    return float(np.mean(np.square(errors)))


def fit_parameters(sys: CompiledSystem, obs: ObservationSet,
                   schedule: ActionSchedule, cfg: FitConfig = FitConfig(),
                   guess=None, *, x0_guess=None,
                   holdout: ObservationSet | None = None) -> FitResult:
    """Fit the parameter vector (and initial state unless pinned) to ``obs``.

    ``guess`` defaults to the Thing Description's declared guesses (or
    ``cfg.seed_guess_override``). ``x0_guess`` defaults to the earliest
    observations. A ``holdout`` set scores the fitted model on later data
    (``testMse``, designated outputs only).

    Candidate evaluations carry an integration-step budget scaled from the
    starting guess's own step count; candidates whose dynamics are too fast
    to integrate within it are costed as bad steps and rejected, which keeps
    the search out of stiff corners the observations cannot distinguish.
    """
    _check_obs_names(sys, obs)
    lo_p, hi_p = sys.param_bounds()
    lo_x, hi_x = sys.state_bounds_arrays()
    if guess is None:
        if cfg.seed_guess_override is not None:
            guess = np.asarray(cfg.seed_guess_override, dtype=float)
        else:
            guess = sys.param_guesses()
    else:
        guess = np.asarray(guess, dtype=float)
    if guess.shape != (sys.param_count,):
        raise ValueError(
            f"guess must have {sys.param_count} entries, got {guess.shape}")
    if np.any(guess < lo_p) or np.any(guess > hi_p):
        log.warning("initial guess outside the parameter box; projecting")
        guess = np.clip(guess, lo_p, hi_p)
    if x0_guess is None:
        x0_guess = default_initial_state(sys, obs)
    else:
        x0_guess = np.clip(np.asarray(x0_guess, dtype=float), lo_x, hi_x)

    n_p = sys.param_count
    plan = _residual_plan(sys, obs)
    t0 = schedule.horizon[0]
    t_end = obs.times[-1]
    sample_times = np.asarray(obs.times)

    def split(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if cfg.fix_initial_state:
            return v, x0_guess
        return v[:n_p], v[n_p:]

    budget = {"steps": _FIT_MAX_STEPS}

    def eval_residuals(v: np.ndarray) -> np.ndarray:
        p, x0 = split(v)
        traj = integrate(sys, x0, p, schedule, span=(t0, t_end),
                         sample_times=sample_times,
                         rtol=cfg.rtol, atol=cfg.atol,
                         max_steps=budget["steps"])
        return _residuals_from_traj(traj, plan)

    def eval_or_plateau(v: np.ndarray) -> np.ndarray:
        try:
            return eval_residuals(v)
        except DynamicsError:
            # a blown-up candidate is a bad step, not a fatal error
            return np.full(len(plan), np.sqrt(_BLOWUP_COST / len(plan)))

    last: dict = {"v": None, "r": None}

    def fun(v: np.ndarray) -> np.ndarray:
        if last["v"] is not None and np.array_equal(last["v"], v):
            return last["r"]
        r = eval_or_plateau(v)
        last["v"], last["r"] = v.copy(), r
        return r

    def jac(v: np.ndarray) -> np.ndarray:
        p, x0 = split(v)
        base = last["r"] if (last["v"] is not None
                             and np.array_equal(last["v"], v)) else None
        return finite_difference_jacobian(
            sys, obs, schedule, p, x0, fd_rel_step=cfg.fd_rel_step,
            fix_initial_state=cfg.fix_initial_state,
            rtol=cfg.rtol, atol=cfg.atol, base_residuals=base,
            residual_fn=eval_or_plateau)

    if cfg.fix_initial_state:
        v0, lb, ub = guess, lo_p, hi_p
    else:
        v0 = np.concatenate([guess, x0_guess])
        lb = np.concatenate([lo_p, lo_x])
        ub = np.concatenate([hi_p, hi_x])

    # The search tolerates candidates that cannot be integrated (they cost a
    # plateau and get rejected), but the starting point must be integrable,
    # otherwise there is no gradient anywhere to descend from.
    v_start = np.clip(v0, lb, ub)
    p_start, x0_start = split(v_start)
    try:
        start_traj = integrate(sys, x0_start, p_start, schedule,
                               span=(t0, t_end), sample_times=sample_times,
                               rtol=cfg.rtol, atol=cfg.atol,
                               max_steps=_FIT_MAX_STEPS)
    except DynamicsError as exc:
        exc.message = ("the initial candidate cannot be integrated over the "
                       f"training window: {exc.message}")
        exc.args = (exc.message,)
        raise
    last["v"] = v_start.copy()
    last["r"] = _residuals_from_traj(start_traj, plan)
    # the starting guess sets the scale of affordable integration effort
    budget["steps"] = min(max(_FIT_BUDGET_FACTOR * start_traj.step_count,
                              _FIT_BUDGET_FLOOR), _FIT_MAX_STEPS)

    solution = least_squares_box(fun, jac, v0, lb, ub, cfg.solver())
    p_hat, x0_hat = split(solution.v)

    test_mse = None
    if holdout is not None:
        test_mse = prediction_mse(
            sys, p_hat, x0_hat,
            schedule.with_horizon((t0, max(schedule.horizon[1],
                                           holdout.times[-1]))),
            holdout, rtol=cfg.rtol, atol=cfg.atol)

    return FitResult(
        params=np.asarray(p_hat, dtype=float).copy(),
        initial_state=np.asarray(x0_hat, dtype=float).copy(),
        initial_time=t0,
        final_cost=solution.cost,
        iterations=solution.iterations,
        cost_history=list(solution.cost_history),
        converged=solution.converged,
        reason=solution.reason,
        test_mse=test_mse,
        param_labels=tuple(info.label() for info in sys.params),
        param_bounds=tuple((info.lower, info.upper) for info in sys.params),
        state_names=tuple(sys.diff_states),
    )


def continuous_fit(sys: CompiledSystem,
                   rounds: Sequence[tuple[ObservationSet, ActionSchedule]],
                   cfg: FitConfig = FitConfig(),
                   guess=None) -> list[FitResult]:
    """Chain fits over successive observation rounds, warm-starting each
    round at the previous round's estimate.

    A failing round raises :class:`ContinuousFitError` carrying the results
    of the rounds that completed.
    """
    if not rounds:
        raise ValueError("continuous_fit needs at least one round")
    results: list[FitResult] = []
    current = guess
    for i, (obs, schedule) in enumerate(rounds):
        try:
            result = fit_parameters(sys, obs, schedule, cfg, current)
        except Exception as exc:
            raise ContinuousFitError(
                f"round {i} failed: {exc}", round_index=i,
                partial=results, cause=exc) from exc
        results.append(result)
        current = result.params
    return results
