"""HTTP-shaped service core: a transport-free request router over a Project.

``TwinService.handle_request(method, path, body, query)`` returns
``(status, payload)`` where payload is JSON-serializable. The stdlib HTTP
wrapper and the CLI both call this router, which keeps their results
identical by construction.

Routes (JSON in/out):

    GET    /things
    POST   /things                         {"td": <document or text>}
    GET    /things/{id}
    GET    /things/{id}/properties/{name}
    PUT    /things/{id}/properties/{name}  -> 422 (no physical device attached)
    GET    /things/{id}/traces
    POST   /things/{id}/traces             {"name", "format", "content"}
    GET    /things/{id}/traces/{name}
    POST   /things/{id}/fit                {"trace", "config"?, "trainUntil"?,
                                            "holdoutAfter"?, "observe"?,
                                            "outputs"?, "stateBounds"?,
                                            "guess"?, "async"?}
    GET    /things/{id}/fits
    GET    /things/{id}/fits/{fitId}
    POST   /things/{id}/spawn              {"fitId" | "params", "anchorTime",
                                            "trace"? | ("anchorState" +
                                            "anchorActions"), "twinId"?}
    GET    /jobs/{jobId}
    GET    /twins
    GET    /twins/{id}
    GET    /twins/{id}/properties/{name}?t=
    PUT    /twins/{id}/properties/{name}   {"value", "t"?}
    PUT    /twins/{id}/time                {"t"}
    POST   /twins/{id}/resync              {"t", "state", "clearActions"?}
    POST   /twins/{id}/whatif              {"actions"?, "lookahead",
                                            "fence"?, "sampleCount"?}
    POST   /twins/{id}/precision           {"truthTrace", "sampleTimes",
                                            "lookAhead", "threshold", ...}
    GET    /twins/{id}/trajectory?from=&to=&step=

Statuses: 400 invalid request, 404 unknown resource, 409 stale fit/twin
against the current TD text, 422 model/trace/numeric errors (diagnostic
payload), 200/201/202 success.
"""

from __future__ import annotations

import json
import math
import threading
from typing import Any, Mapping

import numpy as np

from .errors import (
    DynamicsError,
    LearningError,
    ProjectError,
    ResolutionError,
    ModelSyntaxError,
    TdError,
    ThingTwinError,
    TraceError,
    TwinError,
    UnknownChannelError,
    UnknownPropertyError,
    UnknownStateNameError,
)
from .fitting import FitConfig, FitResult, fit_parameters
from .project import Project
from .resolve import resolve_models, validate_td
from .system import CompiledSystem, assemble_system, integrate
from .twin import GeoFence, SampledTruth, Twin, evaluate_precision, restore_twin

__all__ = ["TwinService", "Request", "json_response"]

_BAD_REQUEST = (
    ValueError, KeyError, TypeError, UnknownPropertyError,
    UnknownStateNameError, UnknownChannelError,
)


class _HttpError(Exception):
    def __init__(self, status: int, payload: dict):
        super().__init__(payload.get("message", ""))
        self.status = status
        self.payload = payload


def _err(status: int, code: str, message: str, **extra) -> _HttpError:
    payload = {"error": code, "message": message}
    payload.update(extra)
    return _HttpError(status, payload)


def _need(body: Mapping | None, key: str) -> Any:
    if not isinstance(body, Mapping) or key not in body:
        raise _err(400, "MissingField", f"request body needs {key!r}")
    return body[key]


def json_response(status: int, payload: Any) -> tuple[int, Any]:
    return status, payload


class Request:
    """Parsed request path: segments plus query mapping."""

    def __init__(self, method: str, path: str,
                 query: Mapping[str, str] | None):
        self.method = method.upper()
        self.segments = [seg for seg in path.split("/") if seg]
        self.query = dict(query or {})


class TwinService:
    """Stateful router owning live twins, compiled systems, and fit jobs."""

    def __init__(self, project: Project,
                 solver_defaults: Mapping[str, Any] | None = None) -> None:
        self.project = project
        self.solver_defaults = dict(solver_defaults or {})
        self._twins: dict[str, Twin] = {}
        self._twin_hash: dict[str, str] = {}
        self._systems: dict[tuple[str, str, tuple], CompiledSystem] = {}
        self._jobs: dict[str, dict] = {}
        self._job_counter = 0
        self._lock = threading.RLock()

    # -- helpers -----------------------------------------------------------

    def _system(self, key: str, state_bounds: Mapping | None = None,
                outputs=None) -> CompiledSystem:
        digest = self.project.td_hash(key)
        bounds_key = tuple(sorted(
            (k, float(v[0]), float(v[1]))
            for k, v in (state_bounds or {}).items()))
        outputs_key = tuple(outputs) if outputs else ()
        cache_key = (key, digest, bounds_key + ("|",) + outputs_key)
        with self._lock:
            system = self._systems.get(cache_key)
        if system is None:
            td = self.project.td(key)
            resolved = resolve_models(td)
            bounds = {k: (float(v[0]), float(v[1]))
                      for k, v in (state_bounds or {}).items()}
            system = assemble_system(resolved, outputs=outputs,
                                     state_bounds=bounds or None)
            with self._lock:
                self._systems[cache_key] = system
        return system

    def _twin(self, twin_id: str) -> Twin:
        with self._lock:
            twin = self._twins.get(twin_id)
            stored_hash = self._twin_hash.get(twin_id)
        if twin is not None:
            key = self.project.key_of(twin.system.resolved.td.id)
            if stored_hash == self.project.td_hash(key):
                return twin
            with self._lock:
                self._twins.pop(twin_id, None)
                self._twin_hash.pop(twin_id, None)
            raise _err(409, "StaleTwin",
                       f"twin {twin_id!r} was spawned from a different "
                       f"version of the TD; re-fit and re-spawn")
        doc = self.project.load_twin(twin_id)  # ProjectError -> 404
        stored_hash = doc.get("tdHash")
        key = self.project.key_of(doc["thingKey"])
        if stored_hash != self.project.td_hash(key):
            raise _err(409, "StaleTwin",
                       f"twin {twin_id!r} was spawned from a different "
                       f"version of the TD; re-fit and re-spawn")
        bounds = doc.get("stateBounds") or {}
        system = self._system(key, bounds)
        twin = restore_twin(system, doc["snapshot"])
        with self._lock:
            self._twins[twin_id] = twin
            self._twin_hash[twin_id] = stored_hash
        return twin

    def _persist_twin(self, twin: Twin) -> None:
        key = self.project.key_of(twin.system.resolved.td.id)
        bounds = {}
        for name, (lo, hi) in zip(twin.system.diff_states,
                                  twin.system.state_bounds):
            if math.isinf(lo) and math.isinf(hi):
                continue  # the unbounded default; no need to persist
            bounds[name] = [lo if math.isfinite(lo) else "-inf",
                            hi if math.isfinite(hi) else "inf"]
        doc = {
            "thingKey": key,
            "tdHash": self._twin_hash.get(
                twin.twin_id, self.project.td_hash(key)),
            "stateBounds": bounds,
            "snapshot": twin.snapshot(),
        }
        self.project.save_twin(twin.twin_id, doc)

    # -- entry point ---------------------------------------------------------

    def handle_request(self, method: str, path: str,
                       body: Mapping | None = None,
                       query: Mapping[str, str] | None = None
                       ) -> tuple[int, Any]:
        req = Request(method, path, query)
        try:
            return self._route(req, body)
        except _HttpError as exc:
            return exc.status, exc.payload
        except ProjectError as exc:
            if exc.code.startswith("Unknown"):
                return 404, {"error": exc.code, "message": exc.message}
            if exc.code.startswith("Duplicate"):
                return 409, {"error": exc.code, "message": exc.message}
            return 400, {"error": exc.code, "message": exc.message}
        except (TdError, ModelSyntaxError, ResolutionError, TraceError,
                DynamicsError, LearningError) as exc:
            payload = {"error": exc.code, "message": exc.message}
            if exc.path:
                payload["path"] = exc.path
            return 422, payload
        except TwinError as exc:
            return 400, {"error": exc.code, "message": exc.message}
        except _BAD_REQUEST as exc:
            return 400, {"error": type(exc).__name__, "message": str(exc)}

    # -- routing --------------------------------------------------------------

    def _route(self, req: Request, body: Mapping | None) -> tuple[int, Any]:
        seg = req.segments
        m = req.method
        if not seg:
            return 200, {"service": "thingtwin", "routes": ["things", "twins"]}
        if seg[0] == "things":
            return self._route_things(req, body)
        if seg[0] == "twins":
            return self._route_twins(req, body)
        if seg[0] == "jobs" and len(seg) == 2 and m == "GET":
            return self._get_job(seg[1])
        raise _err(404, "UnknownRoute", f"no route for {m} /{'/'.join(seg)}")

    # -- /things -----------------------------------------------------------

    def _route_things(self, req: Request, body: Mapping | None
                      ) -> tuple[int, Any]:
        seg, m = req.segments, req.method
        if len(seg) == 1:
            if m == "GET":
                return 200, {"things": [self._thing_summary(k)
                                        for k in self.project.thing_keys()]}
            if m == "POST":
                return self._post_thing(body)
        if len(seg) >= 2:
            key = self.project.key_of(seg[1])
            if len(seg) == 2 and m == "GET":
                return 200, self._thing_detail(key)
            if len(seg) == 4 and seg[2] == "properties":
                return self._thing_property(key, seg[3], m)
            if seg[2] == "traces":
                return self._route_traces(key, seg, m, body)
            if len(seg) == 3 and seg[2] == "fit" and m == "POST":
                return self._post_fit(key, body)
            if seg[2] == "fits" and m == "GET":
                if len(seg) == 3:
                    return 200, {"fits": self.project.fit_ids(key)}
                if len(seg) == 4:
                    return 200, self.project.load_fit(key, seg[3])
            if len(seg) == 3 and seg[2] == "spawn" and m == "POST":
                return self._post_spawn(key, body)
        raise _err(404, "UnknownRoute",
                   f"no route for {m} /{'/'.join(seg)}")

    def _thing_summary(self, key: str) -> dict:
        td = self.project.td(key)
        return {
            "key": key,
            "id": td.id,
            "title": td.title,
            "tdHash": self.project.td_hash(key),
            "properties": list(td.property_names),
        }

    def _thing_detail(self, key: str) -> dict:
        td = self.project.td(key)
        diagnostics = [
            {"severity": d.severity, "code": d.code, "path": d.path,
             "message": d.message}
            for d in validate_td(td)
        ]
        summary = self._thing_summary(key)
        summary["td"] = json.loads(self.project.td_text(key))
        summary["diagnostics"] = diagnostics
        summary["traces"] = self.project.trace_names(key)
        summary["fits"] = self.project.fit_ids(key)
        return summary

    def _post_thing(self, body: Mapping | None) -> tuple[int, Any]:
        doc = _need(body, "td")
        text = doc if isinstance(doc, str) else json.dumps(doc, indent=2)
        key = self.project.add_thing(text)  # TdError -> 422
        return 201, self._thing_summary(key)

    def _thing_property(self, key: str, name: str, method: str
                        ) -> tuple[int, Any]:
        td = self.project.td(key)
        prop = td.property(name)
        if prop is None:
            raise _err(404, "UnknownProperty",
                       f"thing {key!r} has no property {name!r}")
        if method == "GET":
            return 200, {
                "name": prop.name,
                "type": prop.value_type,
                "readOnly": prop.read_only,
                "writeOnly": prop.write_only,
                "writable": prop.writable,
                "observable": prop.observable,
                "valueFrom": prop.value_from.value,
                "model": prop.model_source,
                "inputs": [mi.title for mi in prop.inputs],
            }
        if method == "PUT":
            raise _err(422, "NoDevice",
                       "no physical device is attached to this thing; spawn "
                       "a twin and write to it instead")
        raise _err(404, "UnknownRoute", f"no {method} on thing properties")

    # -- traces ----------------------------------------------------------------

    def _route_traces(self, key: str, seg: list[str], method: str,
                      body: Mapping | None) -> tuple[int, Any]:
        if len(seg) == 3 and method == "GET":
            return 200, {"traces": self.project.trace_names(key)}
        if len(seg) == 3 and method == "POST":
            name = str(_need(body, "name"))
            fmt = str(body.get("format", "csv")) if body else "csv"
            content = str(_need(body, "content"))
            self.project.save_trace(key, name, content, fmt)
            return 201, {"name": name, "format": fmt}
        if len(seg) == 4 and method == "GET":
            obs, actions = self.project.load_trace(key, seg[3])
            return 200, {
                "name": seg[3],
                "observations": obs.to_dict(),
                "actions": actions.to_dict(),
            }
        raise _err(404, "UnknownRoute", f"no route for {method} traces")

    # -- fitting -------------------------------------------------------------

    def _fit_config(self, body: Mapping | None) -> FitConfig:
        merged = dict(self.solver_defaults)
        if body and body.get("config"):
            merged.update(body["config"])
        return FitConfig.from_dict(merged)

    def _run_fit(self, key: str, body: Mapping) -> dict:
        trace = str(_need(body, "trace"))
        obs, schedule = self.project.load_trace(key, trace)
        state_bounds = body.get("stateBounds") or {}
        outputs = body.get("outputs")
        system = self._system(key, state_bounds, tuple(outputs) if outputs else None)
        observe = body.get("observe")
        if observe:
            names = [n for n in observe if n in obs.names]
            missing = [n for n in observe if n not in obs.names]
            if missing:
                raise _err(400, "UnknownSeries",
                           f"trace {trace!r} has no series {missing}")
        else:
            names = [n for n in obs.names if n in system.state_names]
        if not names:
            raise _err(400, "NoObservedStates",
                       "no observed series matches a modeled state")
        train = obs.restricted(names)
        holdout = None
        split_doc: dict[str, float] = {}
        # Carve the holdout off the full series first so that trainUntil and
        # holdoutAfter may coincide (train on [t0, T], score on (T, end]).
        if body.get("holdoutAfter") is not None:
            t_split = float(body["holdoutAfter"])
            train, holdout = train.split_at(t_split)
            split_doc["holdoutAfter"] = t_split
        if body.get("trainUntil") is not None:
            train = train.window(train.times[0], float(body["trainUntil"]))
            split_doc["trainUntil"] = float(body["trainUntil"])
        cfg = self._fit_config(body)
        guess = body.get("guess")
        result = fit_parameters(
            system, train, schedule, cfg,
            guess=[float(g) for g in guess] if guess is not None else None,
            holdout=holdout,
        )
        fit_id = self.project.next_fit_id(key)
        doc = {
            "fitId": fit_id,
            "thingKey": key,
            "tdHash": self.project.td_hash(key),
            "trace": trace,
            "observe": names,
            "stateBounds": {k: [float(v[0]), float(v[1])]
                            for k, v in state_bounds.items()},
            "outputs": list(outputs) if outputs else None,
            "config": cfg.to_dict(),
            "result": result.to_dict(),
            **split_doc,
        }
        self.project.save_fit(key, fit_id, doc)
        return doc

    def _post_fit(self, key: str, body: Mapping | None) -> tuple[int, Any]:
        if body is None:
            raise _err(400, "MissingField", "fit request needs a JSON body")
        if body.get("async"):
            with self._lock:
                self._job_counter += 1
                job_id = f"job-{self._job_counter:04d}"
                self._jobs[job_id] = {"status": "running"}

            def work() -> None:
                try:
                    doc = self._run_fit(key, body)
                    with self._lock:
                        self._jobs[job_id] = {"status": "done", "result": doc}
                except _HttpError as exc:
                    with self._lock:
                        self._jobs[job_id] = {
                            "status": "failed", "error": exc.payload}
                except ThingTwinError as exc:
                    with self._lock:
                        self._jobs[job_id] = {
                            "status": "failed",
                            "error": {"error": exc.code,
                                      "message": exc.message}}

            threading.Thread(target=work, daemon=True).start()
            return 202, {"jobId": job_id, "status": "running"}
        return 200, self._run_fit(key, body)

    def _get_job(self, job_id: str) -> tuple[int, Any]:
        with self._lock:
            job = self._jobs.get(job_id)
        if job is None:
            raise _err(404, "UnknownJob", f"no job {job_id!r}")
        return 200, {"jobId": job_id, **job}

    # -- spawning ------------------------------------------------------------

    def _post_spawn(self, key: str, body: Mapping | None) -> tuple[int, Any]:
        if body is None:
            raise _err(400, "MissingField", "spawn request needs a JSON body")
        current_hash = self.project.td_hash(key)
        state_bounds: Mapping = {}
        fit_doc = None
        if body.get("fitId") is not None:
            fit_doc = self.project.load_fit(key, str(body["fitId"]))
            if fit_doc.get("tdHash") != current_hash:
                raise _err(409, "StaleFit",
                           f"fit {body['fitId']!r} was computed against a "
                           f"different version of the TD; re-fit first")
            params = [float(v) for v in _fit_params(fit_doc)]
            state_bounds = fit_doc.get("stateBounds") or {}
        elif body.get("params") is not None:
            params = [float(v) for v in body["params"]]
        else:
            raise _err(400, "MissingField",
                       "spawn needs either 'fitId' or explicit 'params'")
        system = self._system(key, state_bounds)
        anchor_time = float(_need(body, "anchorTime"))
        if body.get("anchorState") is not None:
            anchor_state = {k: float(v)
                            for k, v in body["anchorState"].items()}
            anchor_actions = {k: float(v)
                              for k, v in (body.get("anchorActions") or {}).items()}
        elif fit_doc is not None and body.get("trace"):
            anchor_state, anchor_actions = self._anchor_from_trace(
                system, fit_doc, str(body["trace"]), key, anchor_time)
        else:
            raise _err(400, "MissingField",
                       "spawn needs 'anchorState' (+'anchorActions') or a "
                       "'trace' plus 'fitId' to derive the anchor from")
        twin_id = str(body.get("twinId") or self.project.next_twin_id())
        with self._lock:
            exists = twin_id in self._twins
        if exists or _twin_file_exists(self.project, twin_id):
            raise _err(409, "DuplicateTwin",
                       f"twin id {twin_id!r} already exists; twin ids are "
                       f"never reused")
        twin = Twin(system, params, anchor_time, anchor_state,
                    anchor_actions, twin_id=twin_id)
        with self._lock:
            self._twins[twin_id] = twin
            self._twin_hash[twin_id] = current_hash
        self._persist_twin(twin)
        return 201, {"twinId": twin_id, "twin": twin.snapshot()}

    def _anchor_from_trace(self, system: CompiledSystem, fit_doc: Mapping,
                           trace: str, key: str, anchor_time: float
                           ) -> tuple[dict, dict]:
        """Roll the fitted model forward under the recorded actions to the
        anchor instant; channels anchor at their recorded values there."""
        _, schedule = self.project.load_trace(key, trace)
        result = FitResult.from_dict(fit_doc["result"])
        t0 = float(result.initial_time)
        if anchor_time < t0:
            raise _err(400, "TimeBeforeAnchor",
                       f"anchorTime {anchor_time} precedes the fit's initial "
                       f"time {t0}")
        x0 = np.asarray(result.initial_state, dtype=float)
        horizon = schedule.with_horizon(
            (min(t0, schedule.horizon[0]), max(anchor_time, schedule.horizon[1])))
        traj = integrate(system, x0, np.asarray(result.params), horizon,
                         span=(t0, anchor_time),
                         sample_times=[t0, anchor_time])
        row = traj.value_at(anchor_time)
        anchor_state = {
            name: float(row[system.state_index(name)])
            for name in system.diff_states
        }
        anchor_actions = {
            name: schedule.sample(name, anchor_time)
            for name in system.channel_names
        }
        return anchor_state, anchor_actions

    # -- /twins ------------------------------------------------------------------

    def _route_twins(self, req: Request, body: Mapping | None
                     ) -> tuple[int, Any]:
        seg, m = req.segments, req.method
        if len(seg) == 1 and m == "GET":
            return 200, {"twins": self._twin_list()}
        if len(seg) >= 2:
            twin_id = seg[1]
            if len(seg) == 2 and m == "GET":
                twin = self._twin(twin_id)
                return 200, twin.snapshot()
            if len(seg) == 4 and seg[2] == "properties":
                return self._twin_property(twin_id, seg[3], m, body,
                                           req.query)
            if len(seg) == 3 and seg[2] == "time" and m == "PUT":
                twin = self._twin(twin_id)
                twin.set_time(float(_need(body, "t")))
                self._persist_twin(twin)
                return 200, {"virtualTime": twin.virtual_time}
            if len(seg) == 3 and seg[2] == "resync" and m == "POST":
                return self._post_resync(twin_id, body)
            if len(seg) == 3 and seg[2] == "whatif" and m == "POST":
                return self._post_whatif(twin_id, body)
            if len(seg) == 3 and seg[2] == "precision" and m == "POST":
                return self._post_precision(twin_id, body)
            if len(seg) == 3 and seg[2] == "trajectory" and m == "GET":
                return self._get_trajectory(twin_id, req.query)
        raise _err(404, "UnknownRoute", f"no route for {m} /{'/'.join(seg)}")

    def _twin_list(self) -> list[dict]:
        ids = set(self.project.twin_ids())
        with self._lock:
            ids.update(self._twins)
        out = []
        for twin_id in sorted(ids):
            try:
                twin = self._twin(twin_id)
            except _HttpError:
                out.append({"twinId": twin_id, "stale": True})
                continue
            out.append({
                "twinId": twin.twin_id,
                "thingId": twin.system.resolved.td.id,
                "anchorTime": twin.anchor_time,
                "virtualTime": twin.virtual_time,
                "stale": False,
            })
        return out

    def _twin_property(self, twin_id: str, name: str, method: str,
                       body: Mapping | None, query: Mapping[str, str]
                       ) -> tuple[int, Any]:
        twin = self._twin(twin_id)
        if method == "GET":
            at = float(query["t"]) if "t" in query else None
            value = twin.read_property(name, at)
            return 200, {
                "name": name,
                "t": twin.virtual_time if at is None else at,
                "value": value,
            }
        if method == "PUT":
            value = float(_need(body, "value"))
            at = None
            if body and body.get("t") is not None:
                at = float(body["t"])
            elif "t" in query:
                at = float(query["t"])
            twin.write_property(name, value, at)
            self._persist_twin(twin)
            return 200, {"name": name, "value": value,
                         "t": twin.virtual_time if at is None else at}
        raise _err(404, "UnknownRoute", f"no {method} on twin properties")

    def _post_resync(self, twin_id: str, body: Mapping | None
                     ) -> tuple[int, Any]:
        twin = self._twin(twin_id)
        t = float(_need(body, "t"))
        state = {k: float(v) for k, v in _need(body, "state").items()}
        clear = bool(body.get("clearActions", False)) if body else False
        twin.resync(t, state, clear_pending=clear)
        self._persist_twin(twin)
        return 200, twin.snapshot()

    def _post_whatif(self, twin_id: str, body: Mapping | None
                     ) -> tuple[int, Any]:
        twin = self._twin(twin_id)
        if body is None:
            raise _err(400, "MissingField", "whatif needs a JSON body")
        actions = {
            str(name): [(float(t), float(v)) for t, v in points]
            for name, points in (body.get("actions") or {}).items()
        }
        fence = None
        if body.get("fence") is not None:
            fence = GeoFence.from_dict(body["fence"])
        result = twin.what_if(
            actions,
            float(_need(body, "lookahead")),
            fence,
            sample_count=int(body.get("sampleCount", 101)),
        )
        return 200, result.to_dict()

    def _post_precision(self, twin_id: str, body: Mapping | None
                        ) -> tuple[int, Any]:
        twin = self._twin(twin_id)
        if body is None:
            raise _err(400, "MissingField", "precision needs a JSON body")
        key = self.project.key_of(twin.system.resolved.td.id)
        obs, _ = self.project.load_trace(key, str(_need(body, "truthTrace")))
        truth = SampledTruth.from_observations(obs)
        report = evaluate_precision(
            truth,
            twin,
            [float(t) for t in _need(body, "sampleTimes")],
            float(_need(body, "lookAhead")),
            float(_need(body, "threshold")),
            x_state=str(body.get("xState", "positionX")),
            y_state=str(body.get("yState", "positionY")),
        )
        return 200, report.to_dict()

    def _get_trajectory(self, twin_id: str, query: Mapping[str, str]
                        ) -> tuple[int, Any]:
        twin = self._twin(twin_id)
        t_from = float(query.get("from", twin.anchor_time))
        t_to = float(query.get("to", twin.virtual_time))
        if t_to < t_from:
            raise _err(400, "BadWindow", "'to' must be >= 'from'")
        step = float(query["step"]) if "step" in query else (
            (t_to - t_from) / 100 if t_to > t_from else 1.0)
        if step <= 0:
            raise _err(400, "BadWindow", "'step' must be positive")
        times = [t_from]
        while times[-1] + step <= t_to + 1e-9:
            times.append(times[-1] + step)
        if times[-1] < t_to:
            times.append(t_to)
        rows = [twin.state_at(t) for t in times]
        series = {
            name: [row[name] for row in rows]
            for name in twin.system.state_names
        }
        return 200, {
            "twinId": twin_id,
            "times": times,
            "states": series,
            "anchorTime": twin.anchor_time,
            "virtualTime": twin.virtual_time,
        }


def _fit_params(fit_doc: Mapping) -> list[float]:
    result = fit_doc.get("result") or {}
    return [float(entry["value"]) for entry in result.get("params", [])]


def _twin_file_exists(project: Project, twin_id: str) -> bool:
    try:
        project.load_twin(twin_id)
    except ProjectError:
        return False
    return True
