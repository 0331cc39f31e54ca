"""Executable dynamical systems compiled from resolved Thing models.

:func:`assemble_system` turns a :class:`~thingtwin.resolve.ResolvedModels`
into a :class:`CompiledSystem` whose right-hand side and algebraic map are
generated Python functions (``exec`` of rendered source), evaluated over the
flat parameter vector and an :class:`~thingtwin.schedule.ActionSchedule` of
piecewise-constant channels. :func:`integrate` produces a :class:`Trajectory`
with dense output, so any time inside the span can be queried afterwards.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dopri import DenseSolution, solve, solve_fixed
from .errors import (NumericDomainError, UnknownChannelError,
                     UnknownOutputError, UnknownStateNameError)
from .expr import BinOp, Call, Const, Neg
from .resolve import (AlgState, DiffState, ParamSlot, ResolvedModels,
                      SignalRef, render_parsed)
from .schedule import ActionSchedule

__all__ = ["CompiledSystem", "Trajectory", "assemble_system", "integrate",
           "integrate_fixed", "sample_action", "round_half_away",
           "structure_signature"]

_INF = float("inf")


def round_half_away(v: float) -> float:
    """Round to nearest integer, halves away from zero (not banker's)."""
    if not math.isfinite(v):
        raise ValueError(f"round of non-finite value {v!r}")
    return float(math.floor(v + 0.5)) if v >= 0 else float(math.ceil(v - 0.5))


_CALL_IMPL = {"cos": "_cos", "sin": "_sin", "abs": "abs", "max": "max",
              "min": "min", "round": "_round"}


def _gen(e, diff_index: dict[str, int], alg_index: dict[str, int],
         chan_index: dict[str, int]) -> str:
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, ParamSlot):
        return f"p[{e.slot}]"
    if isinstance(e, DiffState):
        return f"x[{diff_index[e.name]}]"
    if isinstance(e, AlgState):
        return f"y[{alg_index[e.name]}]"
    if isinstance(e, SignalRef):
        return f"sig[{chan_index[e.name]}](t)"
    if isinstance(e, Call):
        args = ", ".join(_gen(a, diff_index, alg_index, chan_index)
                         for a in e.args)
        return f"{_CALL_IMPL[e.fn]}({args})"
    if isinstance(e, BinOp):
        lhs = _gen(e.lhs, diff_index, alg_index, chan_index)
        rhs = _gen(e.rhs, diff_index, alg_index, chan_index)
        return f"({lhs} {e.op} {rhs})"
    if isinstance(e, Neg):
        return f"(-{_gen(e.arg, diff_index, alg_index, chan_index)})"
    raise TypeError(f"unexpected node {e!r}")


def _compile(resolved: ResolvedModels, chan_names: tuple[str, ...]):
    diff_index = {n: i for i, n in enumerate(resolved.diff_states)}
    alg_index = {n: i for i, n in enumerate(resolved.alg_states)}
    chan_index = {n: k for k, n in enumerate(chan_names)}
    n_alg = len(resolved.alg_states)

    lines = ["def _alg(t, x, p, sig):"]
    if n_alg:
        lines.append(f"    y = [0.0] * {n_alg}")
        for name in resolved.alg_order:
            body = _gen(resolved.alg[name], diff_index, alg_index, chan_index)
            lines.append(f"    y[{alg_index[name]}] = {body}")
        lines.append("    return y")
    else:
        lines.append("    return []")
    lines.append("")
    lines.append("def _rhs(t, x, p, sig):")
    if n_alg:
        lines.append("    y = _alg(t, x, p, sig)")
    if resolved.diff_states:
        exprs = ", ".join(
            _gen(resolved.rhs[name], diff_index, alg_index, chan_index)
            for name in resolved.diff_states)
        lines.append(f"    return [{exprs}]")
    else:
        lines.append("    return []")
    source = "\n".join(lines)
    namespace = {"_cos": math.cos, "_sin": math.sin,
                 "_round": round_half_away, "max": max, "min": min,
                 "abs": abs, "__builtins__": {}}
    exec(compile(source, "<thingtwin-model>", "exec"), namespace)
    return namespace["_alg"], namespace["_rhs"], source


@dataclass
class CompiledSystem:
    """A resolved model set with generated evaluators and metadata."""

    resolved: ResolvedModels
    diff_states: tuple[str, ...]
    alg_states: tuple[str, ...]
    outputs: tuple[str, ...]
    channel_names: tuple[str, ...]
    state_bounds: tuple[tuple[float, float], ...]  # per differential state
    source: str

    def __post_init__(self) -> None:
        self._alg_fn, self._rhs_fn, src = _compile(self.resolved,
                                                   self.channel_names)
        self.source = src
        self._diff_index = {n: i for i, n in enumerate(self.diff_states)}
        self._alg_index = {n: i for i, n in enumerate(self.alg_states)}

    # --- metadata ---------------------------------------------------------

    @property
    def state_names(self) -> tuple[str, ...]:
        return self.diff_states + self.alg_states

    @property
    def params(self):
        return self.resolved.params

    @property
    def param_count(self) -> int:
        return len(self.resolved.params)

    def param_guesses(self) -> np.ndarray:
        return np.array(self.resolved.param_guesses(), dtype=float)

    def param_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([p.lower for p in self.resolved.params])
        hi = np.array([p.upper for p in self.resolved.params])
        return lo, hi

    def state_bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.array([b[0] for b in self.state_bounds])
        hi = np.array([b[1] for b in self.state_bounds])
        return lo, hi

    def state_index(self, name: str) -> int:
        """Index of ``name`` in the combined (diff + alg) state vector."""
        if name in self._diff_index:
            return self._diff_index[name]
        if name in self._alg_index:
            return len(self.diff_states) + self._alg_index[name]
        raise UnknownStateNameError(f"no state {name!r}")

    def describe(self) -> str:
        return render_parsed(self.resolved)

    # --- evaluation --------------------------------------------------------

    def make_sig(self, schedule: ActionSchedule):
        missing = [n for n in self.channel_names
                   if not schedule.has_channel(n)]
        if missing:
            raise UnknownChannelError(
                f"schedule lacks channels {missing} required by the system")
        return tuple(schedule.sampler(n) for n in self.channel_names)

    def eval_algebraic(self, t: float, x: Sequence[float], p: Sequence[float],
                       schedule: ActionSchedule) -> np.ndarray:
        """Algebraic state values at (t, x), in declaration order."""
        sig = self.make_sig(schedule)
        try:
            return np.asarray(self._alg_fn(t, np.asarray(x, float), p, sig),
                              dtype=float)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise NumericDomainError(str(exc), t=t) from exc

    def eval_rhs(self, t: float, x: Sequence[float], p: Sequence[float],
                 schedule: ActionSchedule) -> np.ndarray:
        """Derivatives of the differential states at (t, x)."""
        sig = self.make_sig(schedule)
        try:
            return np.asarray(self._rhs_fn(t, np.asarray(x, float), p, sig),
                              dtype=float)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise NumericDomainError(str(exc), t=t) from exc


def assemble_system(resolved: ResolvedModels,
                    outputs: Sequence[str] | None = None,
                    state_bounds: dict[str, tuple[float, float]] | None = None,
                    ) -> CompiledSystem:
    """Build a :class:`CompiledSystem`.

    ``outputs`` designates the states scored by prediction error (default:
    all states). ``state_bounds`` optionally boxes initial differential
    states for fitting; unlisted states are unbounded.
    """
    states = resolved.states()
    if outputs is None:
        outputs = states
    for name in outputs:
        if name not in states:
            raise UnknownOutputError(f"output {name!r} is not a model state")
    bounds = []
    state_bounds = dict(state_bounds or {})
    for name in state_bounds:
        if name not in resolved.diff_states:
            raise UnknownStateNameError(
                f"state bound for {name!r}, which is not a differential state")
    for name in resolved.diff_states:
        bounds.append(tuple(map(float, state_bounds.get(name, (-_INF, _INF)))))
    return CompiledSystem(
        resolved=resolved,
        diff_states=resolved.diff_states,
        alg_states=resolved.alg_states,
        outputs=tuple(outputs),
        channel_names=tuple(resolved.channels),
        state_bounds=tuple(bounds),
        source="",
    )


def structure_signature(sys: CompiledSystem) -> tuple[str, ...]:
    """Render the system shape with channel names normalized away, for
    comparing whether two systems share the same structure."""
    norm = {n: f"ch{k}" for k, n in enumerate(sys.channel_names)}
    lines = []
    for line in render_parsed(sys.resolved).splitlines():
        for name, alias in norm.items():
            line = line.replace(f'readProperty("{name}")',
                                f'readProperty("{alias}")')
        lines.append(line)
    return tuple(lines)


def sample_action(schedule: ActionSchedule, name: str, t: float) -> float:
    """Zero-order-hold sample of one schedule channel."""
    return schedule.sample(name, t)


class Trajectory:
    """Integration result: dense interpolant plus a sampled grid.

    ``value_at`` serves the full state vector (differential then algebraic)
    at any time inside the span, evaluated from the integrator's dense
    output; algebraic states are recomputed exactly from their expressions.
    """

    def __init__(self, system: CompiledSystem, p: np.ndarray,
                 schedule: ActionSchedule, dense: DenseSolution,
                 sample_times: np.ndarray):
        self.system = system
        self.p = np.asarray(p, dtype=float)
        self.schedule = schedule
        self.dense = dense
        self._sig = system.make_sig(schedule)
        self.times = np.asarray(sample_times, dtype=float)
        self.values = np.array([self._full_state(t) for t in self.times]) \
            if self.times.size else np.empty((0, len(system.state_names)))

    @property
    def span(self) -> tuple[float, float]:
        return (self.dense.t_start, self.dense.t_end)

    @property
    def step_count(self) -> int:
        """Number of accepted integrator steps behind this trajectory.

        A gauge of how much effort the model demanded at these parameters;
        stiff parameter regions show up as large counts.
        """
        return len(self.dense.segments)

    @property
    def names(self) -> tuple[str, ...]:
        return self.system.state_names

    def _full_state(self, t: float) -> np.ndarray:
        x = self.dense.value(t)
        try:
            y = self.system._alg_fn(t, x, self.p, self._sig)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise NumericDomainError(str(exc), t=t) from exc
        return np.concatenate([x, np.asarray(y, dtype=float)])

    def value_at(self, t: float) -> np.ndarray:
        return self._full_state(t)

    def state_at(self, t: float) -> dict[str, float]:
        vec = self._full_state(t)
        return {name: float(v) for name, v in zip(self.names, vec)}

    def series(self, name: str) -> np.ndarray:
        return self.values[:, self.system.state_index(name)]

    def to_records(self) -> list[dict[str, float]]:
        out = []
        for i, t in enumerate(self.times):
            rec = {"t": float(t)}
            rec.update({name: float(v)
                        for name, v in zip(self.names, self.values[i])})
            out.append(rec)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(("t",) + self.names) + "\n")
        for i, t in enumerate(self.times):
            row = [repr(float(t))]
            row += [repr(float(v)) for v in self.values[i]]
            buf.write(",".join(row) + "\n")
        return buf.getvalue()


def _prepare(sys: CompiledSystem, x0, p, schedule: ActionSchedule,
             span: tuple[float, float] | None):
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (len(sys.diff_states),):
        raise ValueError(
            f"x0 must have {len(sys.diff_states)} entries "
            f"({', '.join(sys.diff_states)}), got shape {x0.shape}")
    p = np.asarray(p, dtype=float)
    if p.shape != (sys.param_count,):
        raise ValueError(
            f"p must have {sys.param_count} entries, got shape {p.shape}")
    if span is None:
        span = schedule.horizon
    sig = sys.make_sig(schedule)

    def f(t: float, x: np.ndarray) -> np.ndarray:
        try:
            return sys._rhs_fn(t, x, p, sig)
        except (ZeroDivisionError, ValueError, OverflowError) as exc:
            raise NumericDomainError(str(exc), t=t) from exc

    def f_for_segment(a: float, b: float):
        # Channels are piecewise constant, so inside a segment bounded by
        # schedule breakpoints they equal their value at the segment start.
        # Freezing them keeps stage evaluations at the right boundary from
        # picking up the post-switch value (and skips per-call sampling).
        held = tuple(s(a) for s in sig)
        frozen = tuple((lambda t, v=v: v) for v in held)

        def f_seg(t: float, x: np.ndarray) -> np.ndarray:
            try:
                return sys._rhs_fn(t, x, p, frozen)
            except (ZeroDivisionError, ValueError, OverflowError) as exc:
                raise NumericDomainError(str(exc), t=t) from exc

        return f_seg

    return x0, p, span, f, f_for_segment


def _sample_grid(span: tuple[float, float],
                 sample_times) -> np.ndarray:
    if sample_times is None:
        return np.array(span, dtype=float)
    grid = np.asarray(sample_times, dtype=float)
    if grid.size and (np.any(np.diff(grid) < 0)):
        raise ValueError("sample times must be non-decreasing")
    slack = 1e-9 * max(abs(span[1] - span[0]), 1.0)
    if grid.size and (grid[0] < span[0] - slack or grid[-1] > span[1] + slack):
        raise ValueError(
            f"sample times must lie within the span {span}")
    return grid


def integrate(sys: CompiledSystem, x0, p, schedule: ActionSchedule,
              span: tuple[float, float] | None = None,
              sample_times=None, *, rtol: float = 1e-6, atol: float = 1e-8,
              max_step: float = math.inf,
              max_steps: int = 1_000_000) -> Trajectory:
    """Integrate the system over ``span`` (default: the schedule horizon).

    The integrator restarts at every schedule breakpoint inside the span and
    holds channel values constant per segment, so zero-order-hold
    discontinuities never sit inside a step and never leak into a boundary
    stage evaluation. ``sample_times`` (default: the span endpoints) populate
    the trajectory's sampled grid; they are answered from dense output and do
    not influence stepping.
    """
    x0, p, span, f, f_for_segment = _prepare(sys, x0, p, schedule, span)
    grid = _sample_grid(span, sample_times)
    cuts = schedule.breakpoint_times(span[0], span[1])
    dense = solve(f, span[0], span[1], x0, rtol=rtol, atol=atol,
                  breakpoints=cuts, max_step=max_step, max_steps=max_steps,
                  segment_fn=f_for_segment)
    return Trajectory(sys, p, schedule, dense, grid)


def integrate_fixed(sys: CompiledSystem, x0, p, schedule: ActionSchedule,
                    span: tuple[float, float] | None = None,
                    sample_times=None, *, h: float) -> Trajectory:
    """Fixed-step variant (no error control); for convergence diagnostics."""
    x0, p, span, f, _ = _prepare(sys, x0, p, schedule, span)
    grid = _sample_grid(span, sample_times)
    dense = solve_fixed(f, span[0], span[1], x0, h)
    return Trajectory(sys, p, schedule, dense, grid)
