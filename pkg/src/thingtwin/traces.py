"""Trace files: recorded observations plus commanded actions, CSV or JSON.

CSV schema: header ``t,<column names...>``; one row per sample instant with
strictly increasing ``t`` (seconds). Empty cells mean "not observed here".
Columns named by the caller's writable set are interpreted as commands: a
breakpoint is recorded at the first non-empty row and at every later row
where the value changes. All other columns become observation series.

The JSON form is an array of records ``[{"t": ..., "<name>": ...}, ...]``
with the same interpretation.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable

from .errors import TraceError
from .observations import ObservationSet
from .schedule import ActionSchedule

__all__ = ["load_trace", "save_trace", "dump_trace", "parse_trace"]


def _rows_from_csv(text: str) -> tuple[list[str], list[dict[str, float]]]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise TraceError("SchemaMismatch", "empty trace file") from None
    if not header or header[0] != "t":
        raise TraceError("SchemaMismatch",
                         "first CSV column must be 't'")
    names = header[1:]
    if len(set(names)) != len(names):
        raise TraceError("SchemaMismatch", "duplicate column names")
    rows: list[dict[str, float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise TraceError(
                "SchemaMismatch",
                f"row {lineno} has {len(row)} cells, expected {len(header)}")
        rec: dict[str, float] = {}
        for col, cell in zip(header, row):
            cell = cell.strip()
            if cell == "" and col != "t":
                continue
            try:
                rec[col] = float(cell)
            except ValueError:
                raise TraceError(
                    "BadNumber",
                    f"row {lineno}, column {col!r}: not a number: {cell!r}"
                ) from None
        if "t" not in rec:
            raise TraceError("BadNumber", f"row {lineno} lacks a time")
        rows.append(rec)
    return names, rows


def _rows_from_json(text: str) -> tuple[list[str], list[dict[str, float]]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceError("JsonSyntax",
                         f"invalid JSON at offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(doc, list):
        raise TraceError("SchemaMismatch", "JSON trace must be an array")
    names: dict[str, None] = {}
    rows: list[dict[str, float]] = []
    for i, rec in enumerate(doc):
        if not isinstance(rec, dict) or "t" not in rec:
            raise TraceError("SchemaMismatch",
                             f"record {i} must be an object with 't'")
        clean: dict[str, float] = {}
        for key, value in rec.items():
            if value is None:
                continue
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TraceError(
                    "BadNumber",
                    f"record {i}, field {key!r}: not a number: {value!r}")
            clean[key] = float(value)
            if key != "t":
                names.setdefault(key)
        rows.append(clean)
    return list(names), rows


def parse_trace(text: str, fmt: str, writables: Iterable[str] = ()
                ) -> tuple[ObservationSet, ActionSchedule]:
    """Parse trace text. ``fmt`` is ``"csv"`` or ``"json"``."""
    if fmt == "csv":
        names, rows = _rows_from_csv(text)
    elif fmt == "json":
        names, rows = _rows_from_json(text)
    else:
        raise TraceError("UnknownFormat", f"unknown trace format {fmt!r}")
    if not rows:
        raise TraceError("SchemaMismatch", "trace has no samples")
    times = [rec["t"] for rec in rows]
    for i, (a, b) in enumerate(zip(times, times[1:])):
        if not b > a:
            raise TraceError(
                "NonMonotoneTime",
                f"sample {i + 1}: time {b!r} does not increase past {a!r}")
    writable_set = set(writables)
    actions = ActionSchedule((times[0], times[-1]))
    last: dict[str, float] = {}
    obs_records: list[dict[str, float]] = []
    for rec in rows:
        t = rec["t"]
        obs_rec: dict[str, float] = {}
        for name in names:
            if name not in rec:
                continue
            value = rec[name]
            if name in writable_set:
                if name not in last or last[name] != value:
                    actions.set(name, t, value)
                    last[name] = value
            else:
                obs_rec[name] = value
        obs_records.append(obs_rec)
    obs = ObservationSet(tuple(times), tuple(obs_records))
    return obs, actions


def load_trace(path, fmt: str | None = None, writables: Iterable[str] = ()
               ) -> tuple[ObservationSet, ActionSchedule]:
    """Load a trace file; format inferred from the extension unless given."""
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower() or "csv"
    return parse_trace(path.read_text(encoding="utf-8"), fmt, writables)


def dump_trace(obs: ObservationSet, actions: ActionSchedule,
               fmt: str = "csv") -> str:
    """Serialize observations and actions on the observation grid.

    Action channels are sampled at each observation instant; breakpoints
    that sit on the grid round-trip exactly through :func:`parse_trace`.
    """
    action_names = list(actions.channel_names)
    obs_names = [n for n in obs.names if n not in action_names]
    columns = obs_names + action_names
    if fmt == "csv":
        out = io.StringIO()
        out.write(",".join(["t"] + columns) + "\n")
        for t, rec in zip(obs.times, obs.records):
            cells = [repr(float(t))]
            for name in obs_names:
                cells.append(repr(float(rec[name])) if name in rec else "")
            for name in action_names:
                cells.append(repr(actions.sample(name, t)))
            out.write(",".join(cells) + "\n")
        return out.getvalue()
    if fmt == "json":
        records = []
        for t, rec in zip(obs.times, obs.records):
            row: dict[str, float] = {"t": float(t)}
            for name in obs_names:
                if name in rec:
                    row[name] = float(rec[name])
            for name in action_names:
                row[name] = actions.sample(name, t)
            records.append(row)
        return json.dumps(records, indent=2)
    raise TraceError("UnknownFormat", f"unknown trace format {fmt!r}")


def save_trace(path, obs: ObservationSet, actions: ActionSchedule,
               fmt: str | None = None) -> None:
    path = Path(path)
    if fmt is None:
        fmt = path.suffix.lstrip(".").lower() or "csv"
    path.write_text(dump_trace(obs, actions, fmt), encoding="utf-8")
