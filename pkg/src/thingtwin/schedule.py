"""Piecewise-constant (zero-order-hold) named channels over a time horizon.

An :class:`ActionSchedule` drives integrations: each channel holds a sorted
list of ``(time, value)`` breakpoints; sampling at ``t`` returns the value of
the latest breakpoint at or before ``t``, extended by the first value before
the first breakpoint.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .errors import UnknownChannelError

__all__ = ["ActionSchedule"]


@dataclass
class ActionSchedule:
    horizon: tuple[float, float]
    _channels: dict[str, tuple[list[float], list[float]]] = field(
        default_factory=dict)

    def __post_init__(self) -> None:
        t0, t1 = self.horizon
        if not t0 <= t1:
            raise ValueError(f"empty horizon [{t0}, {t1}]")

    @classmethod
    def from_breakpoints(cls, horizon: tuple[float, float],
                         channels: dict[str, list[tuple[float, float]]]
                         ) -> "ActionSchedule":
        sched = cls(horizon)
        for name, points in channels.items():
            for t, v in points:
                sched.set(name, t, v)
        return sched

    @property
    def channel_names(self) -> tuple[str, ...]:
        return tuple(self._channels)

    def has_channel(self, name: str) -> bool:
        return name in self._channels

    def set(self, name: str, t: float, value: float) -> None:
        """Add a breakpoint; a second write at the same (name, t) overwrites."""
        times, values = self._channels.setdefault(name, ([], []))
        i = bisect.bisect_left(times, t)
        if i < len(times) and times[i] == t:
            values[i] = float(value)
        else:
            times.insert(i, t)
            values.insert(i, float(value))

    def sample(self, name: str, t: float) -> float:
        """Channel value at ``t`` under zero-order hold."""
        if name not in self._channels:
            raise UnknownChannelError(f"no channel {name!r}")
        times, values = self._channels[name]
        i = bisect.bisect_right(times, t) - 1
        if i < 0:
            i = 0  # extend the first value backwards
        return values[i]

    def sampler(self, name: str):
        """A fast ``f(t) -> value`` closure for one channel."""
        if name not in self._channels:
            raise UnknownChannelError(f"no channel {name!r}")
        times, values = self._channels[name]
        br = bisect.bisect_right

        def f(t: float) -> float:
            i = br(times, t) - 1
            return values[i] if i >= 0 else values[0]

        return f

    def breakpoints(self, name: str) -> list[tuple[float, float]]:
        if name not in self._channels:
            raise UnknownChannelError(f"no channel {name!r}")
        times, values = self._channels[name]
        return list(zip(times, values))

    def breakpoint_times(self, t0: float, t1: float) -> list[float]:
        """All breakpoint times of any channel strictly inside (t0, t1)."""
        out: set[float] = set()
        for times, _ in self._channels.values():
            lo = bisect.bisect_right(times, t0)
            hi = bisect.bisect_left(times, t1)
            out.update(times[lo:hi])
        return sorted(out)

    def restricted(self, names: set[str] | frozenset[str]) -> "ActionSchedule":
        sched = ActionSchedule(self.horizon)
        for name in names:
            if name in self._channels:
                times, values = self._channels[name]
                sched._channels[name] = (list(times), list(values))
        return sched

    def overlaid(self, other: "ActionSchedule") -> "ActionSchedule":
        """A copy with ``other``'s breakpoints applied on top (later wins)."""
        sched = self.copy()
        for name in other.channel_names:
            for t, v in other.breakpoints(name):
                sched.set(name, t, v)
        return sched

    def copy(self) -> "ActionSchedule":
        sched = ActionSchedule(self.horizon)
        for name, (times, values) in self._channels.items():
            sched._channels[name] = (list(times), list(values))
        return sched

    def with_horizon(self, horizon: tuple[float, float]) -> "ActionSchedule":
        sched = self.copy()
        sched.horizon = horizon
        return sched

    def to_dict(self) -> dict:
        return {
            "horizon": list(self.horizon),
            "channels": {name: [[t, v] for t, v in zip(times, values)]
                         for name, (times, values) in self._channels.items()},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "ActionSchedule":
        horizon = tuple(obj["horizon"])
        return cls.from_breakpoints(
            (float(horizon[0]), float(horizon[1])),
            {name: [(float(t), float(v)) for t, v in points]
             for name, points in obj["channels"].items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ActionSchedule):
            return NotImplemented
        return (self.horizon == other.horizon
                and self._channels == other._channels)
