"""Timestamped, possibly partial observations of named states."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

__all__ = ["ObservationSet"]


@dataclass(frozen=True)
class ObservationSet:
    """Strictly increasing sample times, each with a partial record.

    A record maps state names to observed values; states may be missing at
    any given time (sensors report independently).
    """

    times: tuple[float, ...]
    records: tuple[Mapping[str, float], ...]

    def __post_init__(self) -> None:
        if len(self.times) != len(self.records):
            raise ValueError("times and records must align")
        if not self.times:
            raise ValueError("an ObservationSet needs at least one sample")
        for a, b in zip(self.times, self.times[1:]):
            if not b > a:
                raise ValueError(
                    f"observation times must be strictly increasing "
                    f"({a!r} then {b!r})")

    @classmethod
    def from_series(cls, times: Iterable[float],
                    series: Mapping[str, Iterable[float]]) -> "ObservationSet":
        times = tuple(float(t) for t in times)
        columns = {name: list(vals) for name, vals in series.items()}
        for name, vals in columns.items():
            if len(vals) != len(times):
                raise ValueError(f"series {name!r} length mismatch")
        records = tuple(
            {name: float(columns[name][i]) for name in columns}
            for i in range(len(times)))
        return cls(times, records)

    @property
    def names(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for rec in self.records:
            for name in rec:
                seen.setdefault(name)
        return tuple(seen)

    def __len__(self) -> int:
        return len(self.times)

    def restricted(self, names: Iterable[str]) -> "ObservationSet":
        """Keep only the given state names (rows left empty are kept)."""
        keep = set(names)
        records = tuple({n: v for n, v in rec.items() if n in keep}
                        for rec in self.records)
        return ObservationSet(self.times, records)

    def window(self, t0: float, t1: float) -> "ObservationSet":
        """Samples with t0 <= t <= t1."""
        pairs = [(t, rec) for t, rec in zip(self.times, self.records)
                 if t0 <= t <= t1]
        if not pairs:
            raise ValueError(f"no observations in [{t0}, {t1}]")
        return ObservationSet(tuple(p[0] for p in pairs),
                              tuple(p[1] for p in pairs))

    def split_at(self, t: float) -> tuple["ObservationSet", "ObservationSet"]:
        """(samples with time <= t, samples with time > t)."""
        head = [(tt, rec) for tt, rec in zip(self.times, self.records)
                if tt <= t]
        tail = [(tt, rec) for tt, rec in zip(self.times, self.records)
                if tt > t]
        if not head or not tail:
            raise ValueError(f"split at {t} leaves an empty side")
        return (ObservationSet(tuple(p[0] for p in head),
                               tuple(p[1] for p in head)),
                ObservationSet(tuple(p[0] for p in tail),
                               tuple(p[1] for p in tail)))

    def earliest(self, name: str) -> tuple[float, float] | None:
        """(time, value) of the first observation of ``name``, if any."""
        for t, rec in zip(self.times, self.records):
            if name in rec:
                return t, rec[name]
        return None

    def count_values(self) -> int:
        return sum(len(rec) for rec in self.records)

    def to_dict(self) -> dict:
        return {"times": list(self.times),
                "records": [dict(rec) for rec in self.records]}

    @classmethod
    def from_dict(cls, obj: dict) -> "ObservationSet":
        return cls(tuple(float(t) for t in obj["times"]),
                   tuple({str(k): float(v) for k, v in rec.items()}
                         for rec in obj["records"]))
