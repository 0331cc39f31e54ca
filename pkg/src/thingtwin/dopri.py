"""Explicit Dormand-Prince 5(4) Runge-Kutta solver with dense output.

The pair is the classic 7-stage FSAL method (Dormand & Prince 1980); the
dense output is the standard quartic interpolant over the accepted stages,
so sample times never have to coincide with step endpoints. Integration
spans are split at supplied breakpoints (action discontinuities) and the
solver restarts exactly there, keeping each step inside a region where the
right-hand side is smooth.

This module is generic over ``f(t, y) -> ndarray``; system assembly and
algebraic-state handling live in :mod:`thingtwin.system`.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import StepSizeUnderflowError

__all__ = ["DenseSolution", "solve", "solve_fixed"]

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = (
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# solution minus embedded 4th-order weights
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200,
               22 / 525, -1 / 40])
# quartic dense-output coefficients (theta^1..theta^4 per stage)
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass(frozen=True)
class _Segment:
    t0: float
    h: float
    y0: np.ndarray
    q: np.ndarray  # (n, 4) dense-output matrix


class DenseSolution:
    """Piecewise-quartic interpolant produced by :func:`solve`."""

    def __init__(self, t_start: float, t_end: float,
                 segments: list[_Segment], y_end: np.ndarray):
        self.t_start = t_start
        self.t_end = t_end
        self.segments = segments
        self.y_end = y_end
        self._starts = [s.t0 for s in segments]

    def value(self, t: float) -> np.ndarray:
        span = self.t_end - self.t_start
        slack = 1e-9 * max(abs(span), 1.0)
        if not (self.t_start - slack <= t <= self.t_end + slack):
            raise ValueError(
                f"t={t!r} outside solution span "
                f"[{self.t_start!r}, {self.t_end!r}]")
        if not self.segments:  # zero-length span
            return self.y_end.copy()
        i = bisect.bisect_right(self._starts, t) - 1
        if i < 0:
            i = 0
        seg = self.segments[i]
        theta = (t - seg.t0) / seg.h
        powers = np.array([theta, theta ** 2, theta ** 3, theta ** 4])
        return seg.y0 + seg.h * (seg.q @ powers)


def _initial_step(f: Callable, t0: float, y0: np.ndarray, f0: np.ndarray,
                  span: float, rtol: float, atol: float) -> float:
    """Hairer-style starting step size estimate (two extra evaluations).

    When the derivative overflows near the starting point the estimate
    falls back to a conservative probe step; the main loop's error control
    then shrinks it further and reports underflow instead of dividing by
    an underflowed quantity here.
    """
    fallback = min(1e-6, span)
    scale = atol + np.abs(y0) * rtol
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    if not math.isfinite(d1):
        return fallback
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    h0 = min(h0, span)
    if h0 <= 0.0:
        return fallback
    y1 = y0 + h0 * f0
    f1 = np.asarray(f(t0 + h0, y1), dtype=float)
    d2 = _rms((f1 - f0) / scale) / h0
    if not math.isfinite(d2):
        return fallback
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def _rms(x: np.ndarray) -> float:
    if x.size == 0:
        return 0.0
    return float(np.sqrt(np.mean(np.square(x))))


def solve(f: Callable[[float, np.ndarray], np.ndarray], t0: float, t1: float,
          y0: Sequence[float], *, rtol: float = 1e-6, atol: float = 1e-8,
          breakpoints: Sequence[float] = (), max_step: float = math.inf,
          max_steps: int = 1_000_000,
          segment_fn: Callable[[float, float],
                               Callable[[float, np.ndarray], np.ndarray]]
          | None = None) -> DenseSolution:
    """Integrate ``y' = f(t, y)`` over ``[t0, t1]`` adaptively.

    ``breakpoints`` are times where ``f`` is discontinuous in ``t``; the
    solver never steps across one. Because stage evaluations land exactly
    on a segment's right boundary, a caller whose ``f`` jumps AT that
    boundary (e.g. zero-order-hold inputs switching there) must supply
    ``segment_fn``: called as ``segment_fn(a, b)`` for each smooth segment,
    it returns the right-hand side to use throughout ``[a, b]`` — typically
    ``f`` with the discontinuous inputs frozen to their values on ``[a, b)``.
    Otherwise the final step's error estimate chases the jump and the step
    size collapses at tight tolerances. Raises
    :class:`StepSizeUnderflowError` when error control collapses the step
    (e.g. the solution blows up) or when more than ``max_steps`` accepted
    steps would be needed (parameter regions too fast for the step budget
    are treated like blow-ups by callers that search parameter space).
    """
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")
    if t1 < t0:
        raise ValueError(f"backward span [{t0}, {t1}]")
    cuts = [t for t in sorted(set(breakpoints)) if t0 < t < t1]
    boundaries = [t0] + cuts + [t1]
    segments: list[_Segment] = []
    y = y0
    # overflow in a trial step is detected via isfinite and the step is
    # rejected, so numpy's warnings about it are noise
    with np.errstate(over="ignore", invalid="ignore"):
        for a, b in zip(boundaries[:-1], boundaries[1:]):
            f_seg = f if segment_fn is None else segment_fn(a, b)
            y = _solve_smooth(f_seg, a, b, y, rtol, atol, max_step, segments,
                              max_steps)
    return DenseSolution(t0, t1, segments, y)


def _solve_smooth(f, t0: float, t1: float, y0: np.ndarray, rtol: float,
                  atol: float, max_step: float,
                  segments: list[_Segment], max_steps: int) -> np.ndarray:
    n = y0.size
    t, y = t0, y0
    if t1 == t0:
        return y0
    k0 = np.asarray(f(t, y), dtype=float)
    h = min(_initial_step(f, t, y, k0, t1 - t0, rtol, atol), max_step)
    stages = np.empty((7, n))
    stages[0] = k0
    eps = float(np.finfo(float).eps)
    rejected = False
    while t < t1:
        if len(segments) >= max_steps:
            raise StepSizeUnderflowError(
                f"step budget of {max_steps} steps exhausted", t=t)
        tiny = 16 * eps * max(abs(t), abs(t1 - t0))
        if h < tiny:
            raise StepSizeUnderflowError(
                f"step size {h!r} fell below resolution", t=t)
        clipped = False
        if t + h >= t1:
            h = t1 - t
            clipped = True
        for i in range(1, 6):
            yi = y + h * (stages[:i].T @ _A[i])
            stages[i] = f(t + _C[i] * h, yi)
        y_new = y + h * (stages[:6].T @ _B)
        t_new = t1 if clipped else t + h
        if np.all(np.isfinite(y_new)):
            stages[6] = f(t_new, y_new)
            err = h * (stages.T @ _E)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            norm = _rms(err / scale) if np.all(np.isfinite(err)) else math.inf
        else:
            norm = math.inf
        if norm <= 1.0:
            segments.append(_Segment(t, h, y, stages.T @ _P))
            t, y = t_new, y_new
            stages[0] = stages[6]  # FSAL
            factor = (_MAX_FACTOR if norm == 0.0
                      else min(_MAX_FACTOR, _SAFETY * norm ** -0.2))
            if rejected:
                factor = min(1.0, factor)
            rejected = False
            h = min(h * factor, max_step)
        else:
            rejected = True
            factor = (_MIN_FACTOR if not math.isfinite(norm)
                      else max(_MIN_FACTOR, _SAFETY * norm ** -0.2))
            h *= min(1.0, factor)
    return y


def solve_fixed(f: Callable[[float, np.ndarray], np.ndarray], t0: float,
                t1: float, y0: Sequence[float], h: float) -> DenseSolution:
    """Same method with a fixed step (no error control); for convergence
    studies and step-halving diagnostics."""
    y = np.asarray(y0, dtype=float)
    if h <= 0:
        raise ValueError("step must be positive")
    n = y.size
    segments: list[_Segment] = []
    steps = max(1, math.ceil((t1 - t0) / h - 1e-12))
    stages = np.empty((7, n))
    t = t0
    for step in range(steps):
        t_next = t1 if step == steps - 1 else t0 + (step + 1) * h
        hs = t_next - t
        stages[0] = f(t, y)
        for i in range(1, 6):
            yi = y + hs * (stages[:i].T @ _A[i])
            stages[i] = f(t + _C[i] * hs, yi)
        y_new = y + hs * (stages[:6].T @ _B)
        stages[6] = f(t_next, y_new)
        segments.append(_Segment(t, hs, y, stages.T @ _P))
        t, y = t_next, y_new
    return DenseSolution(t0, t1, segments, y)
