"""Shared fixtures: parsed packaged Thing Descriptions, compiled systems,
and the seeded reference simulations reused across the suite.

The heavyweight artifacts (48 h room run, 30 s drone run, the designed-guess
room fit) are session-scoped so the acceptance tests and the unit tests pay
for them once.
"""

from __future__ import annotations

import time
from types import SimpleNamespace

import numpy as np
import pytest

from thingtwin import (
    DroneSimConfig,
    FitConfig,
    RoomSimConfig,
    assemble_system,
    default_drone_joystick,
    default_room_actions,
    fit_parameters,
    packaged_td,
    parse_td,
    resolve_models,
    simulate_drone,
    simulate_room,
)

HOUR = 3600.0

ROOM_STATE_BOUNDS = {
    "temperature": (-20.0, 50.0),
    "temperature1": (-20.0, 50.0),
    "cooler": (0.0, 9.0),
}

# Simulator state names -> twin model state names for the quadcopter.
DRONE_STATE_MAP = {
    "positionX": "positionX",
    "positionY": "positionY",
    "positionZ": "positionZ",
    "yaw": "yaw",
    "velX": "velocityX",
    "velY": "velocityY",
    "velBodyZ": "velocityZ",
    "yawRate": "yawrate",
}


def drone_state_from_truth(truth, t: float) -> dict[str, float]:
    """The twin-model differential state corresponding to a simulator
    truth sample (the two systems name their states differently)."""
    row = truth.state_at(t)
    return {twin_name: row[sim_name]
            for sim_name, twin_name in DRONE_STATE_MAP.items()}


def drone_true_params(cfg: DroneSimConfig) -> np.ndarray:
    """The twin-model parameter vector that reproduces the simulator.

    Slot order follows the twin TD's declaration order (velocityZ, yawrate,
    accelerationbodyX, accelerationbodyY pairs), while the simulator config
    orders its coefficients by physical subsystem.
    """
    a = cfg.alpha
    return np.array([a[4], a[5], a[6], a[7], a[0], a[1], a[2], a[3]])


@pytest.fixture(scope="session")
def room_td():
    return parse_td(packaged_td("room"))


@pytest.fixture(scope="session")
def drone_td():
    return parse_td(packaged_td("drone"))


@pytest.fixture(scope="session")
def room_resolved(room_td):
    return resolve_models(room_td)


@pytest.fixture(scope="session")
def drone_resolved(drone_td):
    return resolve_models(drone_td)


@pytest.fixture(scope="session")
def room_system(room_resolved):
    return assemble_system(room_resolved, outputs=("temperature",),
                           state_bounds=ROOM_STATE_BOUNDS)


@pytest.fixture(scope="session")
def drone_system(drone_resolved):
    return assemble_system(drone_resolved)


@pytest.fixture(scope="session")
def room_run():
    """48 h seeded room simulation under the reference action schedule."""
    cfg = RoomSimConfig()
    actions = default_room_actions(cfg.duration)
    truth, obs, actions = simulate_room(cfg, actions)
    return SimpleNamespace(
        cfg=cfg,
        truth=truth,
        raw_obs=obs,
        obs=obs.restricted(("temperature", "temperature1")),
        actions=actions,
    )


@pytest.fixture(scope="session")
def room_designed_fit(room_system, room_run):
    """Fit of the room model on [0, 34 h] from the declared guesses,
    scored on the held-out tail (34 h, 48 h]. Shared by several tests;
    the wall-clock time of the fit call is recorded."""
    train = room_run.obs.window(0.0, 34.0 * HOUR)
    holdout = room_run.obs.window(34.0 * HOUR + 1e-9, 48.0 * HOUR)
    started = time.perf_counter()
    result = fit_parameters(room_system, train, room_run.actions, FitConfig(),
                            holdout=holdout)
    runtime = time.perf_counter() - started
    return SimpleNamespace(result=result, runtime=runtime,
                           train=train, holdout=holdout)


@pytest.fixture(scope="session")
def drone_run():
    """30 s seeded quadcopter flight under the reference joystick."""
    cfg = DroneSimConfig(duration=30.0)
    joystick = default_drone_joystick(cfg.duration)
    truth, obs, actions = simulate_drone(cfg, joystick)
    return SimpleNamespace(cfg=cfg, truth=truth, obs=obs, actions=actions)
