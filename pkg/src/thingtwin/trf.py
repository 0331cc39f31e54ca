"""Bound-constrained nonlinear least squares, trust-region reflective style.

Minimizes ``sum(fun(v)**2)`` subject to ``lb <= v <= ub``. Each iteration
solves the trust-region subproblem with a Powell dogleg step in a diagonally
scaled space (per-variable scale = largest Jacobian column norm seen so far,
so badly scaled parameters still take useful steps) and then ranks three
in-box candidates by the quadratic model: the projected dogleg step, its
reflection off any crossed bounds, and the projected steepest-descent
(Cauchy) step. One residual evaluation per trial candidate; iterates never
leave the box, so the objective history is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoProgressError

__all__ = ["SolverConfig", "SolverResult", "least_squares_box"]

_ACCEPT_RATIO = 1e-4
_GROW, _SHRINK = 2.0, 0.25
_MAX_RADIUS = 1e12
# scaled-gradient level below which a stall counts as convergence, not failure
_STALL_GRAD_TOL = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    ftol: float = 1e-8
    xtol: float = 1e-8
    max_iterations: int = 200

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.ftol <= 0 or self.xtol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolverResult:
    v: np.ndarray
    cost: float
    cost_history: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    reason: str = "max_iterations"


def _dogleg(g: np.ndarray, gn_step: np.ndarray, jg_sq: float,
            radius: float) -> np.ndarray:
    """Powell dogleg: blend of Cauchy and Gauss-Newton steps within radius."""
    gn_norm = float(np.linalg.norm(gn_step))
    if gn_norm <= radius:
        return gn_step
    g_sq = float(g @ g)
    if g_sq == 0.0:
        return gn_step * (radius / gn_norm)
    if jg_sq == 0.0:
        cauchy = -g * (radius / np.sqrt(g_sq))
    else:
        cauchy = -g * (g_sq / jg_sq)
    c_norm = float(np.linalg.norm(cauchy))
    if c_norm >= radius:
        return cauchy * (radius / c_norm)
    diff = gn_step - cauchy
    a = float(diff @ diff)
    b = 2.0 * float(cauchy @ diff)
    c = c_norm ** 2 - radius ** 2
    disc = max(b * b - 4 * a * c, 0.0)
    beta = (-b + np.sqrt(disc)) / (2 * a) if a > 0 else 0.0
    return cauchy + beta * diff


def _project_step(v: np.ndarray, s: np.ndarray, lb: np.ndarray,
                  ub: np.ndarray) -> np.ndarray:
    return np.clip(v + s, lb, ub) - v


def _reflect_step(v: np.ndarray, s: np.ndarray, lb: np.ndarray,
                  ub: np.ndarray) -> np.ndarray:
    target = v + s
    over = target > ub
    target = np.where(over, 2 * ub - target, target)
    under = target < lb
    target = np.where(under, 2 * lb - target, target)
    return np.clip(target, lb, ub) - v


def _model_cost(r: np.ndarray, j: np.ndarray, s: np.ndarray) -> float:
    q = r + j @ s
    return float(q @ q)


def least_squares_box(fun, jac, v0, lb, ub,
                      cfg: SolverConfig = SolverConfig()) -> SolverResult:
    """Run the solver from ``v0`` (projected into the box).

    ``fun(v) -> residuals``; ``jac(v) -> (m, n) Jacobian``. Raises
    :class:`NoProgressError` if the very first iteration stalls with a
    non-negligible gradient (no descent is achievable).
    """
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    if np.any(lb > ub):
        raise ValueError("lower bounds must not exceed upper bounds")
    v = np.clip(np.asarray(v0, dtype=float), lb, ub)
    r = np.asarray(fun(v), dtype=float)
    cost = float(r @ r)
    result = SolverResult(v=v, cost=cost, cost_history=[cost])

    d = np.ones(v.size)  # per-variable scale (grows monotonically)
    radius = 0.0  # set from the first scaled iterate
    for it in range(cfg.max_iterations):
        j = np.asarray(jac(v), dtype=float)
        col = np.sqrt(np.sum(np.square(j), axis=0)) if j.size else np.ones(0)
        if it == 0:
            d = np.where(col > 0.0, col, 1.0)
            radius = max(float(np.linalg.norm(d * v)), 1.0)
        else:
            d = np.maximum(d, col)
        g = j.T @ r
        g_scaled = float(np.max(np.abs(g))) / max(1.0, cost) if g.size else 0.0
        if g_scaled <= 1e-12:
            result.converged = True
            result.reason = "gtol"
            return result
        # work in the scaled space u = d*v: J_s = J D^-1, step s = s_u / d
        j_s = j / d
        g_s = g / d
        gn_u = d * np.linalg.lstsq(j, -r, rcond=None)[0]
        jg_s = j_s @ g_s
        jg_sq = float(jg_s @ jg_s)
        accepted = False
        while not accepted:
            s_u = _dogleg(g_s, gn_u, jg_sq, radius)
            s = s_u / d
            candidates = [
                _project_step(v, s, lb, ub),
                _reflect_step(v, s, lb, ub),
            ]
            c_norm = float(np.linalg.norm(g_s))
            if c_norm > 0:
                tau = (c_norm ** 2 / jg_sq) if jg_sq > 0 else radius / c_norm
                cauchy_u = -g_s * min(tau, radius / c_norm)
                candidates.append(_project_step(v, cauchy_u / d, lb, ub))
            best, best_model = None, cost
            for cand in candidates:
                norm_u = float(np.linalg.norm(d * cand))
                if norm_u == 0.0:
                    continue
                if norm_u > radius * (1 + 1e-10):
                    cand = cand * (radius / norm_u)
                model = _model_cost(r, j, cand)
                if model < best_model:
                    best, best_model = cand, model
            if best is not None:
                v_new = np.clip(v + best, lb, ub)
                r_new = np.asarray(fun(v_new), dtype=float)
                cost_new = (float(r_new @ r_new)
                            if np.all(np.isfinite(r_new)) else np.inf)
                predicted = cost - best_model
                actual = cost - cost_new
                ratio = actual / predicted if predicted > 0 else -1.0
            else:
                v_new, r_new, cost_new = v, r, cost
                actual, ratio = -1.0, -1.0

            if actual > 0 and ratio > _ACCEPT_RATIO:
                step_u = float(np.linalg.norm(d * (v_new - v)))
                if ratio > 0.75 and step_u >= 0.8 * radius:
                    radius = min(radius * _GROW, _MAX_RADIUS)
                elif ratio < 0.25:
                    radius *= _SHRINK
                v, r, cost = v_new, r_new, cost_new
                result.v, result.cost = v, cost
                result.cost_history.append(cost)
                result.iterations = it + 1
                accepted = True
                if actual <= cfg.ftol * max(cost_new, 1e-300):
                    result.converged = True
                    result.reason = "ftol"
                    return result
                if step_u <= cfg.xtol * (cfg.xtol + float(np.linalg.norm(d * v))):
                    result.converged = True
                    result.reason = "xtol"
                    return result
            else:
                radius *= _SHRINK
                if radius < cfg.xtol * (cfg.xtol + float(np.linalg.norm(d * v))):
                    if it == 0 and g_scaled > _STALL_GRAD_TOL:
                        raise NoProgressError(
                            "no descent step found on the first iteration",
                            gradient_norm=g_scaled)
                    result.converged = True
                    result.reason = "xtol"
                    return result
    result.reason = "max_iterations"
    return result
