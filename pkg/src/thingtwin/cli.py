"""Command-line interface.

Subcommands::

    thingtwin parse <td.jsonld>
    thingtwin simulate room|drone [--config FILE] [--set k=v ...]
                                  [--actions FILE] --out TRACE
    thingtwin fit <td.jsonld> <trace file> [--project DIR] [--config FILE]
                  [--set k=v ...] [--train-until T] [--holdout-after T]
                  [--observe a,b] [--outputs a,b]
                  [--state-bounds name=lo:hi,...] [--spawn-at T]
    thingtwin spawn <thing> --fit FITID --trace NAME --at T [--project DIR]
    thingtwin whatif <twin> --lookahead S [--actions FILE]
                     [--fence cx,cy,r] [--project DIR]
    thingtwin precision <twin> --truth NAME --tla S --dthr M
                        --samples T0:T1:STEP [--project DIR]
    thingtwin serve [--host H] [--port N] [--project DIR] [--config FILE]

Every data-bearing subcommand prints one JSON document on stdout; errors go
to stderr. Exit codes: 0 success, 1 validation failure (bad input, unknown
resource, stale fit), 2 numeric failure (integration or optimization).

``--config`` names a key=value file (``#`` comments allowed) holding solver
defaults (maxIterations, ftol, xtol, fdRelStep, rtol, atol,
fixInitialState, seedGuessOverride) plus ``host``/``port`` for ``serve``
and simulator fields for ``simulate``; ``--set k=v`` overrides single keys.
The ``THINGTWIN_PORT`` environment variable supplies the default port.

The fit/spawn/whatif/precision commands operate on a project directory
(``--project``, default ``./twinproject``) through the same router as the
HTTP API, so their outputs match the corresponding endpoints exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import DynamicsError, LearningError, ThingTwinError
from .project import Project
from .resolve import render_parsed, resolve_models, validate_td
from .schedule import ActionSchedule
from .service import TwinService
from .simulators import (DroneSimConfig, RoomSimConfig, default_drone_joystick,
                         default_room_actions, simulate_drone, simulate_room)
from .td import parse_td
from .traces import save_trace
from . import httpd


def _inf_str(v: float):
    if v == float("inf"):
        return "inf"
    if v == float("-inf"):
        return "-inf"
    return v

__all__ = ["main", "run_cli", "load_config"]

_EXIT_OK = 0
_EXIT_VALIDATION = 1
_EXIT_NUMERIC = 2

_NUMERIC_CODES = {
    "NumericDomain", "StepSizeUnderflow", "NoProgress",
    "ContinuousFitFailed", "BoundsViolation",
}


def load_config(path) -> dict:
    """Parse a key=value config file; values are JSON literals when they
    parse as such, bare strings otherwise."""
    out: dict = {}
    for lineno, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(
                f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip()] = _parse_value(value.strip())
    return out


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _collect_config(args) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        cfg.update(load_config(args.config))
    for pair in getattr(args, "set", None) or []:
        if "=" not in pair:
            raise ValueError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        cfg[key.strip()] = _parse_value(value.strip())
    return cfg


def _emit(payload) -> None:
    json.dump(payload, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _service_call(service: TwinService, method: str, path: str,
                  body=None, query=None) -> int:
    status, payload = service.handle_request(method, path, body, query)
    if 200 <= status < 300:
        _emit(payload)
        return _EXIT_OK
    print(f"HTTP {status}: {json.dumps(payload)}", file=sys.stderr)
    if payload.get("error") in _NUMERIC_CODES:
        return _EXIT_NUMERIC
    return _EXIT_VALIDATION


def _load_actions_file(path) -> ActionSchedule:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return ActionSchedule.from_dict(doc)


# --- subcommands ------------------------------------------------------------


def _cmd_parse(args) -> int:
    text = Path(args.td).read_text(encoding="utf-8")
    td = parse_td(text)
    diagnostics = validate_td(td)
    report = {
        "id": td.id,
        "title": td.title,
        "diagnostics": [
            {"severity": d.severity, "code": d.code, "path": d.path,
             "message": d.message}
            for d in diagnostics
        ],
    }
    errors = [d for d in diagnostics if d.severity == "error"]
    if not errors:
        resolved = resolve_models(td)
        report["parsedModel"] = render_parsed(resolved).splitlines()
        report["differentialStates"] = list(resolved.diff_states)
        report["algebraicStates"] = list(resolved.alg_states)
        report["parameters"] = [
            {"slot": p.slot, "label": p.label(), "guess": p.guess,
             "lower": _inf_str(p.lower), "upper": _inf_str(p.upper)}
            for p in resolved.params
        ]
        report["channels"] = dict(resolved.channels)
    _emit(report)
    return _EXIT_OK if not errors else _EXIT_VALIDATION


def _cmd_simulate(args) -> int:
    cfg_map = _collect_config(args)
    if args.plant == "room":
        fields = {f: cfg_map[f] for f in
                  ("beta", "t_out_mean", "noise_mu", "noise_sigma", "seed",
                   "duration", "sample_period", "initial") if f in cfg_map}
        if "beta" in fields:
            fields["beta"] = tuple(float(b) for b in fields["beta"])
        if "initial" in fields:
            fields["initial"] = tuple(float(v) for v in fields["initial"])
        cfg = RoomSimConfig(**fields)
        actions = (
            _load_actions_file(args.actions) if args.actions
            else default_room_actions(cfg.duration))
        truth, obs, actions = simulate_room(cfg, actions)
    else:
        fields = {f: cfg_map[f] for f in
                  ("alpha", "seed", "duration", "sample_period", "initial")
                  if f in cfg_map}
        if "alpha" in fields:
            fields["alpha"] = tuple(float(a) for a in fields["alpha"])
        if "initial" in fields:
            fields["initial"] = tuple(float(v) for v in fields["initial"])
        cfg = DroneSimConfig(**fields)
        actions = (
            _load_actions_file(args.actions) if args.actions
            else default_drone_joystick(cfg.duration))
        truth, obs, actions = simulate_drone(cfg, actions)
    out = Path(args.out)
    fmt = out.suffix.lstrip(".").lower() or "csv"
    save_trace(out, obs, actions, fmt)
    _emit({
        "plant": args.plant,
        "out": str(out),
        "format": fmt,
        "samples": len(obs),
        "span": list(truth.span),
        "series": list(obs.names),
        "actionChannels": list(actions.channel_names),
    })
    return _EXIT_OK


def _import_thing(project: Project, td_path: str) -> str:
    return project.add_thing(Path(td_path).read_text(encoding="utf-8"))


def _import_trace(project: Project, key: str, trace_path: str) -> str:
    path = Path(trace_path)
    name = path.stem
    fmt = path.suffix.lstrip(".").lower() or "csv"
    text = path.read_text(encoding="utf-8")
    existing = project.trace_names(key)
    if name in existing:
        current = project._trace_path(key, name)
        if current is not None and current.read_text(encoding="utf-8") == text:
            return name
        raise ThingTwinError(
            f"trace {name!r} already exists in the project with different "
            f"content; pick another file name")
    project.save_trace(key, name, text, fmt)
    return name


def _cmd_fit(args) -> int:
    project = Project(args.project)
    service = TwinService(project)
    key = _import_thing(project, args.td)
    trace = _import_trace(project, key, args.trace)
    body: dict = {"trace": trace}
    cfg_map = _collect_config(args)
    if cfg_map:
        body["config"] = cfg_map
    if args.train_until is not None:
        body["trainUntil"] = args.train_until
    if args.holdout_after is not None:
        body["holdoutAfter"] = args.holdout_after
    if args.observe:
        body["observe"] = args.observe.split(",")
    if args.outputs:
        body["outputs"] = args.outputs.split(",")
    if args.state_bounds:
        body["stateBounds"] = _parse_state_bounds(args.state_bounds)
    status, payload = service.handle_request(
        "POST", f"/things/{key}/fit", body)
    if status != 200:
        print(f"HTTP {status}: {json.dumps(payload)}", file=sys.stderr)
        return (_EXIT_NUMERIC if payload.get("error") in _NUMERIC_CODES
                else _EXIT_VALIDATION)
    if args.spawn_at is not None:
        spawn_body = {
            "fitId": payload["fitId"],
            "trace": trace,
            "anchorTime": args.spawn_at,
        }
        status2, spawned = service.handle_request(
            "POST", f"/things/{key}/spawn", spawn_body)
        if status2 != 201:
            print(f"HTTP {status2}: {json.dumps(spawned)}", file=sys.stderr)
            return _EXIT_VALIDATION
        payload = {**payload, "spawned": spawned}
    _emit(payload)
    return _EXIT_OK


def _parse_state_bounds(text: str) -> dict:
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, rng = part.partition("=")
        lo, _, hi = rng.partition(":")
        out[name.strip()] = [float(lo), float(hi)]
    return out


def _cmd_spawn(args) -> int:
    service = TwinService(Project(args.project))
    body = {
        "fitId": args.fit,
        "trace": args.trace,
        "anchorTime": args.at,
    }
    if args.twin_id:
        body["twinId"] = args.twin_id
    return _service_call(service, "POST", f"/things/{args.thing}/spawn", body)


def _cmd_whatif(args) -> int:
    service = TwinService(Project(args.project))
    body: dict = {"lookahead": args.lookahead}
    if args.actions:
        doc = json.loads(Path(args.actions).read_text(encoding="utf-8"))
        body["actions"] = doc.get("channels", doc) if isinstance(doc, dict) else doc
    if args.fence:
        cx, cy, r = (float(v) for v in args.fence.split(","))
        fence = {"center": [cx, cy], "radius": r}
        if args.fence_states:
            xs, ys = args.fence_states.split(",")
            fence["xState"] = xs
            fence["yState"] = ys
        body["fence"] = fence
    if args.samples is not None:
        body["sampleCount"] = args.samples
    return _service_call(service, "POST", f"/twins/{args.twin}/whatif", body)


def _cmd_precision(args) -> int:
    service = TwinService(Project(args.project))
    t0, t1, step = (float(v) for v in args.samples.split(":"))
    times = []
    t = t0
    while t <= t1 + 1e-9:
        times.append(round(t, 12))
        t += step
    body = {
        "truthTrace": args.truth,
        "sampleTimes": times,
        "lookAhead": args.tla,
        "threshold": args.dthr,
    }
    if args.fence_states:
        xs, ys = args.fence_states.split(",")
        body["xState"] = xs
        body["yState"] = ys
    return _service_call(service, "POST",
                         f"/twins/{args.twin}/precision", body)


def _cmd_serve(args) -> int:
    cfg_map = _collect_config(args)
    host = args.host or cfg_map.get("host", "127.0.0.1")
    port = args.port
    if port is None:
        port = int(cfg_map.get("port", os.environ.get("THINGTWIN_PORT", 8484)))
    solver_keys = {"maxIterations", "ftol", "xtol", "fdRelStep",
                   "fixInitialState", "seedGuessOverride", "rtol", "atol"}
    solver_defaults = {k: v for k, v in cfg_map.items() if k in solver_keys}
    service = TwinService(Project(args.project),
                          solver_defaults=solver_defaults)
    print(f"serving project {args.project} on http://{host}:{port}",
          file=sys.stderr)
    httpd.serve_forever(service, host, port, quiet=args.quiet)
    return _EXIT_OK


# --- argument wiring ------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thingtwin",
        description="Digital-twin synthesis from behavioral Thing "
                    "Descriptions: parse, simulate, fit, spawn, query.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="validate a TD and dump its models")
    p.add_argument("td")
    p.set_defaults(fn=_cmd_parse)

    p = sub.add_parser("simulate", help="run a reference plant, write a trace")
    p.add_argument("plant", choices=("room", "drone"))
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="K=V",
                   help="override one config key")
    p.add_argument("--actions", help="JSON action-schedule file")
    p.add_argument("--out", required=True, help="trace output (.csv/.json)")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("fit", help="fit a TD's parameters to a trace")
    p.add_argument("td")
    p.add_argument("trace")
    p.add_argument("--project", default="./twinproject")
    p.add_argument("--config", help="key=value solver config file")
    p.add_argument("--set", action="append", metavar="K=V")
    p.add_argument("--train-until", type=float, dest="train_until")
    p.add_argument("--holdout-after", type=float, dest="holdout_after")
    p.add_argument("--observe", help="comma-separated observed series")
    p.add_argument("--outputs", help="comma-separated held-out MSE outputs")
    p.add_argument("--state-bounds", dest="state_bounds",
                   metavar="name=lo:hi,...")
    p.add_argument("--spawn-at", type=float, dest="spawn_at",
                   help="also spawn a twin anchored at this time")
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("spawn", help="spawn a twin from a stored fit")
    p.add_argument("thing")
    p.add_argument("--fit", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--at", type=float, required=True)
    p.add_argument("--twin-id", dest="twin_id")
    p.add_argument("--project", default="./twinproject")
    p.set_defaults(fn=_cmd_spawn)

    p = sub.add_parser("whatif", help="hypothetical forecast on a twin")
    p.add_argument("twin")
    p.add_argument("--lookahead", type=float, required=True)
    p.add_argument("--actions", help="JSON file: {channel: [[t, value]...]}")
    p.add_argument("--fence", metavar="CX,CY,R")
    p.add_argument("--fence-states", dest="fence_states", metavar="X,Y")
    p.add_argument("--samples", type=int)
    p.add_argument("--project", default="./twinproject")
    p.set_defaults(fn=_cmd_whatif)

    p = sub.add_parser("precision",
                       help="score keep-in forecasts against a truth trace")
    p.add_argument("twin")
    p.add_argument("--truth", required=True, help="trace name in the project")
    p.add_argument("--tla", type=float, required=True)
    p.add_argument("--dthr", type=float, required=True)
    p.add_argument("--samples", required=True, metavar="T0:T1:STEP")
    p.add_argument("--fence-states", dest="fence_states", metavar="X,Y")
    p.add_argument("--project", default="./twinproject")
    p.set_defaults(fn=_cmd_precision)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--project", default="./twinproject")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="K=V")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=_cmd_serve)

    return parser


def run_cli(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DynamicsError, LearningError) as exc:
        return _fail(str(exc), _EXIT_NUMERIC)
    except ThingTwinError as exc:
        return _fail(str(exc), _EXIT_VALIDATION)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}", _EXIT_VALIDATION)


def main() -> None:
    sys.exit(run_cli())
