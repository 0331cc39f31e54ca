"""Reference simulators that play the role of the physical systems.

Both simulators are themselves expressed in the package's model language
(with their true coefficients inlined as literals) and integrated with the
same solver, but their equation structure intentionally differs from the
corresponding twin models: the smart-home plant drives four differential
states (two room temperatures and two heater powers) with an instantaneous
cooling stage and a noisy piecewise-constant outdoor temperature, while the
quadcopter plant integrates body-frame velocities and rotates them into the
inertial frame kinematically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import UnknownChannelError
from .observations import ObservationSet
from .rng import Rng
from .schedule import ActionSchedule
from .system import CompiledSystem, Trajectory, assemble_system, integrate
from .resolve import resolve_models
from .td import parse_td

__all__ = ["RoomSimConfig", "DroneSimConfig", "simulate_room",
           "simulate_drone", "room_sim_system", "drone_sim_system",
           "add_noise", "default_room_actions", "default_drone_joystick",
           "random_drone_joystick"]

_TRUTH_RTOL = 1e-8
_TRUTH_ATOL = 1e-10


# --- smart home -----------------------------------------------------------------

@dataclass(frozen=True)
class RoomSimConfig:
    """Two coupled rooms; room A has a heater and a cooler, room B a heater.

    ``beta`` lists the plant coefficients: (1) room-A thermal rate,
    (2) room-A leakage, (3) inter-room coupling, (4) room-B thermal rate,
    (5) room-B leakage, (6) heater rate, (7) heater-A gain, (8) heater-B
    gain, (9) cooling gain per setpoint step.
    """

    beta: tuple[float, ...] = (0.001, 0.1, 0.1, 0.002, 0.1,
                               0.001, 1.0, 0.5, 0.1)
    t_out_mean: float = 15.0
    noise_mu: float = 0.0
    noise_sigma: float = 0.1
    seed: int = 0
    duration: float = 48 * 3600.0
    sample_period: float = 600.0
    initial: tuple[float, float, float, float] = (16.0, 15.5, 0.0, 0.0)

    def __post_init__(self) -> None:
        if len(self.beta) != 9:
            raise ValueError("beta must have 9 entries")
        if self.duration <= 0 or self.sample_period <= 0:
            raise ValueError("duration and sample_period must be positive")


def _room_sim_td(beta: tuple[float, ...]) -> str:
    b = [repr(float(v)) for v in beta]
    doc = {
        "id": "urn:thingtwin:sim:smart-home",
        "title": "smart home plant",
        "properties": {
            "tempA": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {b[0]} * ({b[1]} * (input(tout) - self)"
                    f" + input(hA) - input(cool)"
                    f" + {b[2]} * (input(tB) - self))",
                "dtwt:modelInput": [
                    {"title": "tout", "propertyName": "outdoorTemperature"},
                    {"title": "hA", "propertyName": "heatA"},
                    {"title": "cool", "propertyName": "cooling"},
                    {"title": "tB", "propertyName": "tempB"},
                ],
            },
            "tempB": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {b[3]} * ({b[4]} * (input(tout) - self)"
                    f" + input(hB) + {b[2]} * (input(tA) - self))",
                "dtwt:modelInput": [
                    {"title": "tout", "propertyName": "outdoorTemperature"},
                    {"title": "hB", "propertyName": "heatB"},
                    {"title": "tA", "propertyName": "tempA"},
                ],
            },
            "heatA": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {b[5]} * ({b[6]} * input(bh) - self)",
                "dtwt:modelInput": [
                    {"title": "bh", "propertyName": "heaterSwitch"}],
            },
            "heatB": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {b[5]} * ({b[7]} * input(bh) - self)",
                "dtwt:modelInput": [
                    {"title": "bh", "propertyName": "heaterSwitch"}],
            },
            "cooling": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": f"self = {b[8]} * input(cref)",
                "dtwt:modelInput": [
                    {"title": "cref", "propertyName": "coolerKnob"}],
            },
            "heaterSwitch": {"type": "number", "readOnly": False},
            "coolerKnob": {"type": "integer", "readOnly": False},
            "outdoorTemperature": {"type": "number", "readOnly": False},
        },
    }
    return json.dumps(doc)


def room_sim_system(cfg: RoomSimConfig) -> CompiledSystem:
    """The plant as a compiled system (exposed for structural comparisons)."""
    return assemble_system(resolve_models(parse_td(_room_sim_td(cfg.beta))),
                           outputs=("tempA",))


def default_room_actions(duration: float = 48 * 3600.0) -> ActionSchedule:
    """A two-day exercise schedule that keeps both inputs informative:
    the shared heater toggles six times and the cooler knob steps through
    seven setpoints, so heating, cooling and coupling effects all appear
    in the training window."""
    h = 3600.0
    actions = ActionSchedule((0.0, duration))
    actions.set("heater", 0.0, 0.0)
    for t, v in ((2 * h, 1.0), (10 * h, 0.0), (20 * h, 1.0),
                 (30 * h, 0.0), (38 * h, 1.0), (44 * h, 0.0)):
        if t < duration:
            actions.set("heater", t, v)
    actions.set("cooler", 0.0, 0.0)
    for t, v in ((6 * h, 5.0), (14 * h, 0.0), (24 * h, 9.0),
                 (32 * h, 2.0), (40 * h, 7.0), (46 * h, 0.0)):
        if t < duration:
            actions.set("cooler", t, v)
    return actions


def _validate_room_actions(actions: ActionSchedule) -> None:
    for name in ("heater", "cooler"):
        if not actions.has_channel(name):
            raise UnknownChannelError(
                f"room actions need a {name!r} channel")
    for _, v in actions.breakpoints("heater"):
        if v not in (0.0, 1.0):
            raise ValueError(f"heater switch must be 0 or 1, got {v!r}")
    for _, v in actions.breakpoints("cooler"):
        if v != int(v) or not 0 <= v <= 9:
            raise ValueError(
                f"cooler setpoint must be an integer in 0..9, got {v!r}")


def simulate_room(cfg: RoomSimConfig, actions: ActionSchedule
                  ) -> tuple[Trajectory, ObservationSet, ActionSchedule]:
    """Run the smart-home plant under a heater/cooler-setpoint schedule.

    The action channels carry the room thing's commanded streams: ``heater``
    is the shared switch (0/1) and ``cooler`` is the knob setpoint (integer
    0..9). Returns (truth trajectory, observations, the action schedule).
    The outdoor temperature is resampled at every observation instant
    (mean + Gaussian noise, held constant in between); both room
    temperatures are observed with the same Gaussian noise. Observation
    series: temperature, temperature1, heaterPowerA, heaterPowerB, cooler
    (the cooling power), heater (the switch echo).
    """
    _validate_room_actions(actions)
    sys = room_sim_system(cfg)
    times = _grid(cfg.duration, cfg.sample_period)
    rng = Rng(cfg.seed)
    tout, noise_a, noise_b = [], [], []
    for _ in times:
        tout.append(cfg.t_out_mean
                    + rng.gaussian(cfg.noise_mu, cfg.noise_sigma))
        noise_a.append(rng.gaussian(cfg.noise_mu, cfg.noise_sigma))
        noise_b.append(rng.gaussian(cfg.noise_mu, cfg.noise_sigma))

    sim_actions = ActionSchedule((0.0, cfg.duration))
    for t, v in actions.breakpoints("heater"):
        sim_actions.set("heaterSwitch", t, v)
    for t, v in actions.breakpoints("cooler"):
        sim_actions.set("coolerKnob", t, v)
    for t, v in zip(times, tout):
        sim_actions.set("outdoorTemperature", t, v)

    truth = integrate(sys, cfg.initial, [], sim_actions,
                      span=(0.0, cfg.duration), sample_times=times,
                      rtol=_TRUTH_RTOL, atol=_TRUTH_ATOL)
    i_ta = sys.state_index("tempA")
    i_tb = sys.state_index("tempB")
    i_ha = sys.state_index("heatA")
    i_hb = sys.state_index("heatB")
    i_c = sys.state_index("cooling")
    records = []
    for k, t in enumerate(times):
        row = truth.values[k]
        records.append({
            "temperature": float(row[i_ta] + noise_a[k]),
            "temperature1": float(row[i_tb] + noise_b[k]),
            "heaterPowerA": float(row[i_ha]),
            "heaterPowerB": float(row[i_hb]),
            "cooler": float(row[i_c]),
            "heater": actions.sample("heater", t),
        })
    obs = ObservationSet(tuple(times), tuple(records))
    return truth, obs, actions


# --- quadcopter -------------------------------------------------------------------

@dataclass(frozen=True)
class DroneSimConfig:
    """First-order joystick-response quadcopter.

    ``alpha`` lists the true response coefficients: elevator rate/gain,
    aileron rate/gain, throttle rate/gain, rudder rate/gain.
    """

    alpha: tuple[float, ...] = (2.0, 3.0, 2.0, 3.0, 1.5, 2.0, 3.0, 1.5)
    seed: int = 0
    duration: float = 30.0
    sample_period: float = 0.1
    initial: tuple[float, ...] = (0.0,) * 8  # x y z yaw vbX vbY vZ yawRate

    def __post_init__(self) -> None:
        if len(self.alpha) != 8:
            raise ValueError("alpha must have 8 entries")
        if len(self.initial) != 8:
            raise ValueError("initial must have 8 entries")
        if self.duration <= 0 or self.sample_period <= 0:
            raise ValueError("duration and sample_period must be positive")


def _drone_sim_td(alpha: tuple[float, ...]) -> str:
    a = [repr(float(v)) for v in alpha]
    doc = {
        "id": "urn:thingtwin:sim:quadcopter",
        "title": "quadcopter plant",
        "properties": {
            "positionX": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": "dot(self) = input(vX)",
                "dtwt:modelInput": [
                    {"title": "vX", "propertyName": "velX", "model": "self"}],
            },
            "positionY": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": "dot(self) = input(vY)",
                "dtwt:modelInput": [
                    {"title": "vY", "propertyName": "velY", "model": "self"}],
            },
            "positionZ": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": "dot(self) = input(vZ)",
                "dtwt:modelInput": [
                    {"title": "vZ", "propertyName": "velBodyZ",
                     "model": "self"}],
            },
            "yaw": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": "dot(self) = input(w)",
                "dtwt:modelInput": [
                    {"title": "w", "propertyName": "yawRate",
                     "model": "self"}],
            },
            "velX": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": "self = math.cos(input(psi)) * input(u)"
                              " - math.sin(input(psi)) * input(v)",
                "dtwt:modelInput": [
                    {"title": "psi", "propertyName": "yaw", "model": "self"},
                    {"title": "u", "propertyName": "velBodyX",
                     "model": "self"},
                    {"title": "v", "propertyName": "velBodyY",
                     "model": "self"},
                ],
            },
            "velY": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model": "self = math.sin(input(psi)) * input(u)"
                              " + math.cos(input(psi)) * input(v)",
                "dtwt:modelInput": [
                    {"title": "psi", "propertyName": "yaw", "model": "self"},
                    {"title": "u", "propertyName": "velBodyX",
                     "model": "self"},
                    {"title": "v", "propertyName": "velBodyY",
                     "model": "self"},
                ],
            },
            "velBodyX": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {a[0]} * ({a[1]} * input(el) - self)",
                "dtwt:modelInput": [
                    {"title": "el", "propertyName": "El"}],
            },
            "velBodyY": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {a[2]} * ({a[3]} * input(ai) - self)",
                "dtwt:modelInput": [
                    {"title": "ai", "propertyName": "Ai"}],
            },
            "velBodyZ": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {a[4]} * ({a[5]} * input(th) - self)",
                "dtwt:modelInput": [
                    {"title": "th", "propertyName": "Th"}],
            },
            "yawRate": {
                "type": "number", "readOnly": True,
                "dtwt:valueFrom": "model",
                "dtwt:model":
                    f"dot(self) = {a[6]} * ({a[7]} * input(ru) - self)",
                "dtwt:modelInput": [
                    {"title": "ru", "propertyName": "Ru"}],
            },
            "Th": {"type": "number", "readOnly": False},
            "Ru": {"type": "number", "readOnly": False},
            "El": {"type": "number", "readOnly": False},
            "Ai": {"type": "number", "readOnly": False},
        },
    }
    return json.dumps(doc)


def drone_sim_system(cfg: DroneSimConfig) -> CompiledSystem:
    return assemble_system(
        resolve_models(parse_td(_drone_sim_td(cfg.alpha))),
        outputs=("positionX", "positionY", "positionZ"))


_JOYSTICK = ("Th", "Ru", "El", "Ai")


def default_drone_joystick(duration: float = 30.0) -> ActionSchedule:
    """A gentle mixed maneuver: climb, accelerate forward, weave sideways
    and turn, so every command channel carries information."""
    joystick = ActionSchedule((0.0, duration))
    for name in _JOYSTICK:
        joystick.set(name, 0.0, 0.0)
    for t, v in ((0.0, 0.5), (10.0, 0.0)):
        joystick.set("Th", t, v)
    for t, v in ((2.0, 0.4), (12.0, 0.0), (22.0, 0.3)):
        joystick.set("El", t, v)
    for t, v in ((5.0, 0.3), (15.0, -0.3), (20.0, 0.0)):
        joystick.set("Ai", t, v)
    for t, v in ((8.0, 0.2), (18.0, -0.1), (25.0, 0.0)):
        joystick.set("Ru", t, v)
    return joystick


def random_drone_joystick(duration: float, seed: int, *,
                          period: float = 2.0,
                          amplitude: float = 0.4) -> ActionSchedule:
    """A seeded piecewise-constant joystick: every ``period`` seconds each
    channel jumps to a fresh uniform value in [-amplitude, amplitude]
    (channels in Th, Ru, El, Ai order at each breakpoint time)."""
    if duration <= 0 or period <= 0 or amplitude <= 0:
        raise ValueError("duration, period and amplitude must be positive")
    rng = Rng(seed)
    joystick = ActionSchedule((0.0, duration))
    t = 0.0
    while t < duration:
        for name in _JOYSTICK:
            joystick.set(name, t, rng.uniform_in(-amplitude, amplitude))
        t += period
    return joystick


def simulate_drone(cfg: DroneSimConfig, joystick: ActionSchedule
                   ) -> tuple[Trajectory, ObservationSet, ActionSchedule]:
    """Fly the quadcopter plant under a joystick schedule.

    The joystick schedule must provide exactly the channels Th, Ru, El, Ai.
    Observation series: positionX, positionY, positionZ, yaw (noiseless;
    see :func:`add_noise`).
    """
    missing = [c for c in _JOYSTICK if not joystick.has_channel(c)]
    extra = [c for c in joystick.channel_names if c not in _JOYSTICK]
    if missing or extra:
        raise UnknownChannelError(
            f"joystick channels must be exactly {list(_JOYSTICK)}; "
            f"missing {missing}, unexpected {extra}")
    sys = drone_sim_system(cfg)
    times = _grid(cfg.duration, cfg.sample_period)
    sim_actions = joystick.with_horizon((0.0, cfg.duration))
    truth = integrate(sys, cfg.initial, [], sim_actions,
                      span=(0.0, cfg.duration), sample_times=times,
                      rtol=_TRUTH_RTOL, atol=_TRUTH_ATOL)
    indices = {name: sys.state_index(name)
               for name in ("positionX", "positionY", "positionZ", "yaw")}
    records = tuple(
        {name: float(truth.values[k, i]) for name, i in indices.items()}
        for k in range(len(times)))
    obs = ObservationSet(tuple(times), records)
    return truth, obs, joystick


def _grid(duration: float, period: float) -> list[float]:
    count = int(math.floor(duration / period + 1e-9))
    return [k * period for k in range(count + 1)]


def add_noise(obs: ObservationSet, sigma: dict[str, float],
              seed: int) -> ObservationSet:
    """Observations with Gaussian noise added to the named series.

    Draw order: sample times ascending, named series in sorted order, so a
    seed fully determines the result.
    """
    rng = Rng(seed)
    names = sorted(sigma)
    records = []
    for rec in obs.records:
        new = dict(rec)
        for name in names:
            if name in new:
                new[name] = new[name] + rng.gaussian(0.0, sigma[name])
        records.append(new)
    return ObservationSet(obs.times, tuple(records))
