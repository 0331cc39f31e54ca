"""Digital twins: live, queryable instances of a compiled behavioral system.

A twin is anchored at ``anchor_time`` with two maps: ``anchor_state`` assigns
a value to every differential state, and ``anchor_actions`` assigns the
initial commanded value to every input channel.  (These are separate maps
because a writable modeled property is *both*: reads serve its model value,
writes feed its command channel.)  From the anchor the twin integrates
forward on demand under its *effective schedule* — the anchor channel values
extended by any commands written later — and serves property reads at
arbitrary virtual times at or after the anchor.  Reads are cached: the twin
keeps a single dense solution from the anchor and extends it when a read
requires a longer horizon, so repeated reads at the same instant return
identical values.

``what_if`` answers hypothetical questions (extra commands over a lookahead
window, optionally checked against a circular keep-in fence) without
changing the twin's committed state.  ``resync`` rebases the anchor onto
fresh measurements, keeping any still-pending future commands.
``evaluate_precision`` replays a recorded run against the twin, repeatedly
resyncing sensor-backed states and scoring keep-in forecasts.
"""

from __future__ import annotations

import json
import math
import uuid
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    InsufficientCoverageError,
    ReadOnlyPropertyError,
    TimeBeforeAnchorError,
    TimeInPastError,
    UnknownChannelError,
    UnknownPropertyError,
    UnknownStateNameError,
)
from .schedule import ActionSchedule
from .system import CompiledSystem, Trajectory, integrate

__all__ = [
    "Twin",
    "GeoFence",
    "WhatIfResult",
    "PrecisionReport",
    "SampledTruth",
    "spawn_twin",
    "restore_twin",
    "evaluate_precision",
]

_TIME_SLACK = 1e-9


class SampledTruth:
    """Recorded ground truth as linearly interpolated sample series.

    Offers the same reading surface as a dense trajectory (``span``,
    ``names``, ``state_at``, ``series``) so it can stand in as the truth
    argument of :func:`evaluate_precision` when only logged samples are
    available.
    """

    def __init__(self, times: Sequence[float],
                 series: Mapping[str, Sequence[float]]) -> None:
        self._times = np.asarray(times, dtype=float)
        if self._times.ndim != 1 or self._times.size < 2:
            raise ValueError("truth needs at least two sample times")
        if np.any(np.diff(self._times) <= 0):
            raise ValueError("truth sample times must be strictly increasing")
        self._series = {}
        for name, values in series.items():
            arr = np.asarray(values, dtype=float)
            if arr.shape != self._times.shape:
                raise ValueError(
                    f"series {name!r} has {arr.size} values for "
                    f"{self._times.size} times")
            self._series[name] = arr

    @classmethod
    def from_observations(cls, obs) -> "SampledTruth":
        names = [n for n in obs.names
                 if all(n in rec for rec in obs.records)]
        series = {n: [rec[n] for rec in obs.records] for n in names}
        return cls(obs.times, series)

    @property
    def span(self) -> tuple[float, float]:
        return float(self._times[0]), float(self._times[-1])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._series)

    def series(self, name: str) -> np.ndarray:
        return np.array(self._series[name])

    def state_at(self, t: float) -> dict[str, float]:
        return {
            name: float(np.interp(t, self._times, values))
            for name, values in self._series.items()
        }


@dataclass(frozen=True)
class GeoFence:
    """Circular keep-in region in the plane of two position states."""

    center: tuple[float, float]
    radius: float
    x_state: str = "positionX"
    y_state: str = "positionY"

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("fence radius must be positive")

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.center[0], y - self.center[1]) <= self.radius

    def to_dict(self) -> dict:
        return {
            "center": [float(self.center[0]), float(self.center[1])],
            "radius": float(self.radius),
            "xState": self.x_state,
            "yState": self.y_state,
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GeoFence":
        center = doc["center"]
        return cls(
            center=(float(center[0]), float(center[1])),
            radius=float(doc["radius"]),
            x_state=str(doc.get("xState", "positionX")),
            y_state=str(doc.get("yState", "positionY")),
        )


@dataclass(frozen=True)
class WhatIfResult:
    """Outcome of a hypothetical command sequence over a lookahead window."""

    start_time: float
    end_time: float
    trajectory: Trajectory
    final_state: dict[str, float]
    fence: GeoFence | None
    inside_fence: bool | None
    alert: str | None

    def to_dict(self) -> dict:
        doc = {
            "startTime": self.start_time,
            "endTime": self.end_time,
            "finalState": {k: float(v) for k, v in self.final_state.items()},
            "insideFence": self.inside_fence,
            "alert": self.alert,
            "trajectory": self.trajectory.to_records(),
        }
        if self.fence is not None:
            doc["fence"] = self.fence.to_dict()
        return doc


@dataclass(frozen=True)
class PrecisionReport:
    """Precision of repeated keep-in forecasts against recorded truth.

    ``precision`` is ``TP / (TP + FP)`` and is *undefined* (``None``, with
    ``defined`` False) when nothing was predicted positive — never NaN.
    """

    true_positives: int
    false_positives: int
    look_ahead: float
    threshold: float
    sample_times: tuple[float, ...]
    predicted_inside: tuple[bool, ...]
    truth_inside: tuple[bool, ...]

    @property
    def sample_count(self) -> int:
        return len(self.sample_times)

    @property
    def predicted_positives(self) -> int:
        return self.true_positives + self.false_positives

    @property
    def defined(self) -> bool:
        return self.predicted_positives > 0

    @property
    def precision(self) -> float | None:
        if not self.defined:
            return None
        return self.true_positives / self.predicted_positives

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "precisionDefined": self.defined,
            "truePositives": self.true_positives,
            "falsePositives": self.false_positives,
            "predictedPositives": self.predicted_positives,
            "lookAhead": self.look_ahead,
            "threshold": self.threshold,
            "sampleCount": self.sample_count,
            "sampleTimes": list(self.sample_times),
            "predictedInside": list(self.predicted_inside),
            "truthInside": list(self.truth_inside),
        }


class Twin:
    """A spawned instance of a compiled system with committed parameters."""

    def __init__(
        self,
        system: CompiledSystem,
        params: Sequence[float],
        anchor_time: float,
        anchor_state: Mapping[str, float],
        anchor_actions: Mapping[str, float] | None = None,
        twin_id: str | None = None,
        *,
        rtol: float = 1e-6,
        atol: float = 1e-8,
    ) -> None:
        params = np.asarray(params, dtype=float)
        if params.shape != (system.param_count,):
            raise ValueError(
                f"expected {system.param_count} parameters, got {params.shape}")
        anchor_actions = dict(anchor_actions or {})
        # Convenience: channel values supplied inside anchor_state are moved
        # over, unless the name is also a differential state (then it stays
        # a state and the channel needs an explicit anchor_actions entry).
        diff = set(system.diff_states)
        channels = set(system.channel_names)
        state_part: dict[str, float] = {}
        for name, value in anchor_state.items():
            if name in diff:
                state_part[name] = float(value)
            elif name in channels:
                anchor_actions.setdefault(name, float(value))
            else:
                raise UnknownStateNameError(
                    f"anchor value {name!r} is neither a differential state "
                    f"nor a command channel of the system")
        for name in anchor_actions:
            if name not in channels:
                raise UnknownChannelError(
                    f"anchor action {name!r} is not a command channel")
        missing = [n for n in system.diff_states if n not in state_part]
        if missing:
            raise UnknownStateNameError(
                "anchor state must cover every differential state; missing: "
                + ", ".join(missing))
        missing = [n for n in system.channel_names if n not in anchor_actions]
        if missing:
            raise UnknownChannelError(
                "anchor must provide a value for every command channel; "
                "missing: " + ", ".join(missing))
        self.system = system
        self.params = params
        self.twin_id = twin_id or f"twin-{uuid.uuid4().hex[:12]}"
        self.anchor_time = float(anchor_time)
        self.anchor_state = {n: state_part[n] for n in system.diff_states}
        self.anchor_actions = {
            n: float(anchor_actions[n]) for n in system.channel_names}
        self.virtual_time = float(anchor_time)
        self.rtol = float(rtol)
        self.atol = float(atol)
        # Committed future commands, keyed by channel, re-anchored on resync.
        self._pending: dict[str, list[tuple[float, float]]] = {}
        self._cache: Trajectory | None = None

    # -- schedule assembly ----------------------------------------------

    def pending_actions(self) -> dict[str, list[tuple[float, float]]]:
        return {k: list(v) for k, v in self._pending.items()}

    def effective_schedule(self, until: float) -> ActionSchedule:
        """Anchor channel values plus committed commands, up to ``until``."""
        horizon_end = max(float(until), self.anchor_time)
        sched = ActionSchedule((self.anchor_time, horizon_end))
        for name in self.system.channel_names:
            sched.set(name, self.anchor_time, self.anchor_actions[name])
            for t, v in self._pending.get(name, ()):
                sched.set(name, t, v)
        return sched

    def _anchor_vector(self) -> np.ndarray:
        return np.array(
            [self.anchor_state[n] for n in self.system.diff_states], dtype=float)

    def _ensure_cache(self, until: float) -> Trajectory:
        until = max(float(until), self.anchor_time)
        cache = self._cache
        if cache is None or cache.span[1] < until - _TIME_SLACK:
            self._cache = integrate(
                self.system,
                self._anchor_vector(),
                self.params,
                self.effective_schedule(until),
                span=(self.anchor_time, until),
                rtol=self.rtol,
                atol=self.atol,
            )
        return self._cache

    # -- property interaction --------------------------------------------

    def _check_time(self, at: float | None) -> float:
        t = self.virtual_time if at is None else float(at)
        if t < self.anchor_time - _TIME_SLACK:
            raise TimeBeforeAnchorError(
                f"time {t} precedes the twin anchor at {self.anchor_time}")
        return max(t, self.anchor_time)

    def read_property(self, name: str, at: float | None = None) -> float:
        """Read a property value at a virtual time (default: current).

        Modeled properties always serve the model value; writable unmodeled
        properties serve their commanded (zero-order-hold) value.
        """
        td = self.system.resolved.td
        prop = td.property(name)
        if prop is None:
            raise UnknownPropertyError(f"unknown property {name!r}")
        if prop.write_only:
            raise UnknownPropertyError(f"property {name!r} is write-only")
        t = self._check_time(at)
        if name in self.system.state_names:
            traj = self._ensure_cache(t)
            idx = self.system.state_index(name)
            return float(traj.value_at(t)[idx])
        if name in self.system.channel_names:
            return self.effective_schedule(max(t, self.virtual_time)).sample(name, t)
        raise UnknownPropertyError(
            f"property {name!r} has no behavioral model and is not a "
            f"command channel; the twin cannot serve it")

    def write_property(self, name: str, value: float,
                       at: float | None = None) -> None:
        """Commit a command: the channel takes ``value`` from time ``at`` on."""
        td = self.system.resolved.td
        prop = td.property(name)
        if prop is None:
            raise UnknownPropertyError(f"unknown property {name!r}")
        if not prop.writable or name not in self.system.channel_names:
            raise ReadOnlyPropertyError(f"property {name!r} is not writable")
        t = self.virtual_time if at is None else float(at)
        if t < self.virtual_time - _TIME_SLACK:
            raise TimeInPastError(
                f"cannot command {name!r} at {t}: twin time is already "
                f"{self.virtual_time}")
        t = max(t, self.anchor_time)
        history = self._pending.setdefault(name, [])
        history[:] = [(bt, bv) for bt, bv in history if bt != t]
        history.append((float(t), float(value)))
        history.sort(key=lambda pair: pair[0])
        cache = self._cache
        if cache is not None and t <= cache.span[1] + _TIME_SLACK:
            self._cache = None

    def set_time(self, t: float) -> None:
        """Move the twin's virtual clock (never before the anchor)."""
        t = float(t)
        if t < self.anchor_time - _TIME_SLACK:
            raise TimeBeforeAnchorError(
                f"time {t} precedes the twin anchor at {self.anchor_time}")
        self.virtual_time = max(t, self.anchor_time)

    # -- state maintenance -------------------------------------------------

    def state_at(self, t: float) -> dict[str, float]:
        """Full modeled state (differential and algebraic) at time ``t``."""
        t = self._check_time(t)
        traj = self._ensure_cache(t)
        row = traj.value_at(t)
        return {n: float(row[i]) for i, n in enumerate(self.system.state_names)}

    def resync(self, t: float, measured: Mapping[str, float],
               clear_pending: bool = False) -> None:
        """Rebase the anchor at ``t`` onto measured values.

        A measured name that is a differential state updates that state;
        otherwise it must be a command channel and updates the channel's
        anchor value. Differential states absent from ``measured`` carry
        over from the twin's own prediction at ``t``; channels absent carry
        their effective scheduled value. Commands scheduled after ``t``
        stay committed unless ``clear_pending`` is set.
        """
        t = float(t)
        if t < self.anchor_time - _TIME_SLACK:
            raise TimeBeforeAnchorError(
                f"resync time {t} precedes the twin anchor at {self.anchor_time}")
        t = max(t, self.anchor_time)
        diff = set(self.system.diff_states)
        channels = set(self.system.channel_names)
        for name in measured:
            if name not in diff and name not in channels:
                raise UnknownStateNameError(
                    f"resync value {name!r} is neither a differential state "
                    f"nor a command channel")
        predicted = self.state_at(t)
        schedule = self.effective_schedule(t)
        new_state = {
            name: float(measured.get(name, predicted[name]))
            for name in self.system.diff_states
        }
        new_actions: dict[str, float] = {}
        for name in self.system.channel_names:
            if name in measured and name not in diff:
                new_actions[name] = float(measured[name])
            else:
                new_actions[name] = schedule.sample(name, t)
        if clear_pending:
            self._pending = {}
        else:
            trimmed = {
                name: [(bt, bv) for bt, bv in points if bt > t]
                for name, points in self._pending.items()
            }
            self._pending = {k: v for k, v in trimmed.items() if v}
        self.anchor_time = t
        self.anchor_state = new_state
        self.anchor_actions = new_actions
        self.virtual_time = t
        self._cache = None

    # -- hypotheticals -------------------------------------------------------

    def what_if(
        self,
        actions: Mapping[str, Sequence[tuple[float, float]]] | None,
        lookahead: float,
        fence: GeoFence | None = None,
        *,
        sample_count: int = 101,
    ) -> WhatIfResult:
        """Forecast the window ``[virtual_time, virtual_time + lookahead]``
        under hypothetical extra commands, without mutating the twin."""
        if not lookahead > 0:
            raise ValueError("lookahead must be positive")
        t0 = self.virtual_time
        t1 = t0 + float(lookahead)
        overlay: list[tuple[str, float, float]] = []
        channels = set(self.system.channel_names)
        for name, points in (actions or {}).items():
            prop = self.system.resolved.td.property(name)
            if prop is None or name not in channels:
                raise UnknownChannelError(
                    f"hypothetical command targets unknown channel {name!r}")
            if not prop.writable:
                raise ReadOnlyPropertyError(
                    f"property {name!r} is not writable")
            for t, v in points:
                t = float(t)
                if t < t0 - _TIME_SLACK or t > t1 + _TIME_SLACK:
                    raise TimeInPastError(
                        f"hypothetical command at {t} falls outside the "
                        f"window [{t0}, {t1}]")
                overlay.append((name, min(max(t, t0), t1), float(v)))
        if fence is not None:
            states = set(self.system.state_names)
            for axis in (fence.x_state, fence.y_state):
                if axis not in states:
                    raise UnknownStateNameError(
                        f"fence references unknown state {axis!r}")
        base = self.state_at(t0)
        x0 = np.array([base[n] for n in self.system.diff_states], dtype=float)
        sched = self.effective_schedule(t1)
        for name, t, v in overlay:
            sched.set(name, t, v)
        samples = np.linspace(t0, t1, max(2, int(sample_count)))
        traj = integrate(
            self.system, x0, self.params, sched,
            span=(t0, t1), sample_times=samples,
            rtol=self.rtol, atol=self.atol,
        )
        row = traj.value_at(t1)
        final = {n: float(row[i]) for i, n in enumerate(self.system.state_names)}
        inside: bool | None = None
        alert: str | None = None
        if fence is not None:
            inside = fence.contains(final[fence.x_state], final[fence.y_state])
            if not inside:
                alert = (
                    f"forecast exits the fence: ({fence.x_state}, "
                    f"{fence.y_state}) = ({final[fence.x_state]:.3f}, "
                    f"{final[fence.y_state]:.3f}) at t={t1} is outside the "
                    f"radius-{fence.radius} circle at {fence.center}")
        return WhatIfResult(
            start_time=t0,
            end_time=t1,
            trajectory=traj,
            final_state=final,
            fence=fence,
            inside_fence=inside,
            alert=alert,
        )

    # -- persistence ----------------------------------------------------------

    def clone(self) -> "Twin":
        other = Twin(
            self.system, self.params, self.anchor_time, self.anchor_state,
            self.anchor_actions, twin_id=self.twin_id,
            rtol=self.rtol, atol=self.atol)
        other.virtual_time = self.virtual_time
        other._pending = {k: list(v) for k, v in self._pending.items()}
        return other

    def snapshot(self) -> dict:
        """Serializable committed state (the lazy cache is excluded)."""
        return {
            "twinId": self.twin_id,
            "thingId": self.system.resolved.td.id,
            "anchorTime": self.anchor_time,
            "anchorState": dict(self.anchor_state),
            "anchorActions": dict(self.anchor_actions),
            "virtualTime": self.virtual_time,
            "params": [float(v) for v in self.params],
            "pendingActions": {
                name: [[t, v] for t, v in points]
                for name, points in sorted(self._pending.items())
            },
        }

    def snapshot_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)


def spawn_twin(
    system: CompiledSystem,
    params: Sequence[float],
    anchor_time: float,
    anchor_state: Mapping[str, float],
    anchor_actions: Mapping[str, float] | None = None,
    twin_id: str | None = None,
    **kwargs,
) -> Twin:
    """Create a twin of ``system`` anchored at the given time and state."""
    return Twin(system, params, anchor_time, anchor_state, anchor_actions,
                twin_id, **kwargs)


def restore_twin(system: CompiledSystem, doc: Mapping) -> Twin:
    """Rebuild a twin from a :meth:`Twin.snapshot` document."""
    twin = Twin(
        system,
        [float(v) for v in doc["params"]],
        float(doc["anchorTime"]),
        {k: float(v) for k, v in doc["anchorState"].items()},
        {k: float(v) for k, v in doc.get("anchorActions", {}).items()},
        twin_id=str(doc["twinId"]),
    )
    twin.virtual_time = float(doc.get("virtualTime", twin.anchor_time))
    for name, points in doc.get("pendingActions", {}).items():
        twin._pending[name] = [(float(t), float(v)) for t, v in points]
    return twin


def evaluate_precision(
    truth: Trajectory,
    twin: Twin,
    sample_times: Iterable[float],
    look_ahead: float,
    threshold: float,
    *,
    x_state: str = "positionX",
    y_state: str = "positionY",
) -> PrecisionReport:
    """Score repeated keep-in forecasts of ``twin`` against recorded truth.

    At each sample time the twin (a working copy; the caller's twin is left
    untouched) is resynced onto the truth values of its sensor-backed
    differential states, then asked whether the vehicle will still be inside
    a circle of radius ``threshold`` centred on its current true position
    after ``look_ahead`` seconds. A forecast "inside" is a positive; it
    counts as true when the recorded truth is indeed still inside.
    """
    if not look_ahead > 0:
        raise ValueError("look_ahead must be positive")
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    times = sorted(float(t) for t in sample_times)
    if not times:
        raise ValueError("at least one sample time is required")
    t_lo, t_hi = truth.span
    if times[0] < t_lo - _TIME_SLACK or times[-1] + look_ahead > t_hi + _TIME_SLACK:
        raise InsufficientCoverageError(
            f"truth covers [{t_lo}, {t_hi}] but forecasts need "
            f"[{times[0]}, {times[-1] + look_ahead}]")
    names = truth.names
    for axis in (x_state, y_state):
        if axis not in names:
            raise InsufficientCoverageError(
                f"truth trajectory lacks the position state {axis!r}")
    sensor_backed = [
        n for n in twin.system.diff_states
        if n in twin.system.resolved.sensor_backed()
    ]
    missing = [n for n in sensor_backed if n not in names]
    if missing:
        raise InsufficientCoverageError(
            "truth trajectory lacks sensor-backed states: " + ", ".join(missing))
    work = twin.clone()
    predicted_flags: list[bool] = []
    truth_flags: list[bool] = []
    tp = 0
    fp = 0
    for t in times:
        now = truth.state_at(t)
        later = truth.state_at(t + look_ahead)
        work.resync(t, {n: now[n] for n in sensor_backed})
        fence = GeoFence(center=(now[x_state], now[y_state]),
                         radius=threshold, x_state=x_state, y_state=y_state)
        forecast = work.state_at(t + look_ahead)
        predicted = fence.contains(forecast[x_state], forecast[y_state])
        actual = fence.contains(later[x_state], later[y_state])
        predicted_flags.append(predicted)
        truth_flags.append(actual)
        if predicted and actual:
            tp += 1
        elif predicted and not actual:
            fp += 1
    return PrecisionReport(
        true_positives=tp,
        false_positives=fp,
        look_ahead=float(look_ahead),
        threshold=float(threshold),
        sample_times=tuple(times),
        predicted_inside=tuple(predicted_flags),
        truth_inside=tuple(truth_flags),
    )
