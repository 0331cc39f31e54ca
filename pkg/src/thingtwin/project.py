"""On-disk project store: Thing Descriptions, traces, fits, twin snapshots.

Layout under the project root::

    things/<key>/td.jsonld          the Thing Description document
    things/<key>/traces/<name>.<fmt>
    things/<key>/fits/<fit-id>.json
    twins/<twin-id>.json

``<key>`` is a filesystem-safe slug of the TD id. Trace files are never
mutated once written, and fit documents are append-only (each fit gets a
fresh id). A twin's snapshot file is that twin's live persisted state and is
rewritten when the twin changes; twin ids themselves are never reused.

Every fit and twin document records the SHA-256 hash of the TD text it was
produced from, so applying it after the TD changed is detectable.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

from .errors import ProjectError, TraceError
from .observations import ObservationSet
from .schedule import ActionSchedule
from .td import ThingDescription, parse_td
from .traces import parse_trace

__all__ = ["Project", "td_hash"]

_TRACE_FORMATS = ("csv", "json")


def td_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _slug(name: str) -> str:
    out = re.sub(r"[^A-Za-z0-9._-]+", "-", name).strip("-.")
    if not out:
        raise ProjectError("BadName", f"cannot derive a file name from {name!r}")
    return out


def _safe_name(name: str) -> str:
    if not re.fullmatch(r"[A-Za-z0-9._-]+", name) or name.startswith("."):
        raise ProjectError(
            "BadName",
            f"name {name!r} must use only letters, digits, '.', '_', '-'")
    return name


class Project:
    """A directory of things, traces, fits and twin snapshots."""

    def __init__(self, root) -> None:
        self.root = Path(root)
        (self.root / "things").mkdir(parents=True, exist_ok=True)
        (self.root / "twins").mkdir(parents=True, exist_ok=True)

    # -- things ------------------------------------------------------------

    def _thing_dir(self, key: str) -> Path:
        return self.root / "things" / key

    def thing_keys(self) -> list[str]:
        return sorted(p.name for p in (self.root / "things").iterdir()
                      if (p / "td.jsonld").is_file())

    def key_of(self, thing_id: str) -> str:
        """Resolve a TD id (or an already-valid key) to a project key."""
        for key in self.thing_keys():
            if key == thing_id:
                return key
        for key in self.thing_keys():
            if self.td(key).id == thing_id:
                return key
        raise ProjectError("UnknownThing", f"no thing {thing_id!r} in project")

    def add_thing(self, text: str) -> str:
        """Parse and store a TD document; returns the project key.

        Re-adding a TD with the same id replaces the stored document (fits
        and twins made from the old text become stale via the hash).
        """
        td = parse_td(text)
        key = _slug(td.id)
        directory = self._thing_dir(key)
        (directory / "traces").mkdir(parents=True, exist_ok=True)
        (directory / "fits").mkdir(parents=True, exist_ok=True)
        (directory / "td.jsonld").write_text(text, encoding="utf-8")
        return key

    def td_text(self, key: str) -> str:
        path = self._thing_dir(key) / "td.jsonld"
        if not path.is_file():
            raise ProjectError("UnknownThing", f"no thing {key!r} in project")
        return path.read_text(encoding="utf-8")

    def td(self, key: str) -> ThingDescription:
        return parse_td(self.td_text(key))

    def td_hash(self, key: str) -> str:
        return td_hash(self.td_text(key))

    # -- traces --------------------------------------------------------------

    def _trace_path(self, key: str, name: str) -> Path | None:
        for fmt in _TRACE_FORMATS:
            path = self._thing_dir(key) / "traces" / f"{name}.{fmt}"
            if path.is_file():
                return path
        return None

    def trace_names(self, key: str) -> list[str]:
        directory = self._thing_dir(key) / "traces"
        if not directory.is_dir():
            return []
        return sorted(p.stem for p in directory.iterdir()
                      if p.suffix.lstrip(".") in _TRACE_FORMATS)

    def save_trace(self, key: str, name: str, text: str, fmt: str) -> str:
        if fmt not in _TRACE_FORMATS:
            raise TraceError("UnknownFormat", f"unknown trace format {fmt!r}")
        name = _safe_name(name)
        if self._trace_path(key, name) is not None:
            raise ProjectError(
                "DuplicateTrace",
                f"trace {name!r} already exists; traces are never overwritten")
        directory = self._thing_dir(key) / "traces"
        if not directory.is_dir():
            raise ProjectError("UnknownThing", f"no thing {key!r} in project")
        # Validate before persisting so broken uploads are rejected whole.
        parse_trace(text, fmt)
        (directory / f"{name}.{fmt}").write_text(text, encoding="utf-8")
        return name

    def load_trace(self, key: str, name: str
                   ) -> tuple[ObservationSet, ActionSchedule]:
        path = self._trace_path(key, _safe_name(name))
        if path is None:
            raise ProjectError("UnknownTrace",
                               f"no trace {name!r} for thing {key!r}")
        td = self.td(key)
        writables = [p.name for p in td.properties if p.writable]
        return parse_trace(path.read_text(encoding="utf-8"),
                           path.suffix.lstrip("."), writables)

    # -- fits -----------------------------------------------------------------

    def fit_ids(self, key: str) -> list[str]:
        directory = self._thing_dir(key) / "fits"
        if not directory.is_dir():
            return []
        return sorted(p.stem for p in directory.glob("*.json"))

    def next_fit_id(self, key: str) -> str:
        existing = self.fit_ids(key)
        n = 1
        while f"fit-{n:04d}" in existing:
            n += 1
        return f"fit-{n:04d}"

    def save_fit(self, key: str, fit_id: str, doc: dict) -> str:
        fit_id = _safe_name(fit_id)
        directory = self._thing_dir(key) / "fits"
        if not directory.is_dir():
            raise ProjectError("UnknownThing", f"no thing {key!r} in project")
        path = directory / f"{fit_id}.json"
        if path.exists():
            raise ProjectError(
                "DuplicateFit",
                f"fit {fit_id!r} already exists; fits are append-only")
        path.write_text(json.dumps(doc, indent=2, sort_keys=True),
                        encoding="utf-8")
        return fit_id

    def load_fit(self, key: str, fit_id: str) -> dict:
        path = self._thing_dir(key) / "fits" / f"{_safe_name(fit_id)}.json"
        if not path.is_file():
            raise ProjectError("UnknownFit",
                               f"no fit {fit_id!r} for thing {key!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    # -- twins ------------------------------------------------------------------

    def twin_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "twins").glob("*.json"))

    def save_twin(self, twin_id: str, doc: dict) -> None:
        path = self.root / "twins" / f"{_safe_name(twin_id)}.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True),
                        encoding="utf-8")

    def load_twin(self, twin_id: str) -> dict:
        path = self.root / "twins" / f"{_safe_name(twin_id)}.json"
        if not path.is_file():
            raise ProjectError("UnknownTwin", f"no twin {twin_id!r} in project")
        return json.loads(path.read_text(encoding="utf-8"))

    def next_twin_id(self) -> str:
        existing = set(self.twin_ids())
        n = 1
        while f"twin-{n:04d}" in existing:
            n += 1
        return f"twin-{n:04d}"
