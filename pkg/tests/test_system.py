"""Compiled systems: generated evaluators vs hand-coded oracles, integration."""

from __future__ import annotations

import math

import numpy as np
import pytest

from thingtwin import (
    ActionSchedule,
    ObservationSet,
    assemble_system,
    integrate,
    integrate_fixed,
    parse_td,
    resolve_models,
)
from thingtwin.errors import (
    NumericDomainError,
    UnknownChannelError,
    UnknownOutputError,
    UnknownStateNameError,
)
from thingtwin.rng import Rng
from thingtwin.system import round_half_away, structure_signature


def room_rhs_oracle(t, x, p, heater, cooler):
    """The two-room dynamics, hand-written from the document's model strings."""
    T0, T1, C = x
    y_heater = heater
    clamp = max(0.0, min(round_half_away(cooler), 9.0))
    dT0 = p[1] * (((p[2] * (p[3] - T0)) + ((p[0] * y_heater) + (-C)))
                  + (p[4] * (T1 - T0)))
    dT1 = p[6] * (((p[7] * (p[3] - T1)) + (p[5] * y_heater))
                  + (p[4] * (T0 - T1)))
    dC = p[8] * ((p[9] * clamp) - C)
    return [dT0, dT1, dC]


def room_schedule(heater=800.0, cooler=4.2, horizon=(0.0, 1000.0)):
    return ActionSchedule.from_breakpoints(
        horizon, {"heater": [(0.0, heater)], "cooler": [(0.0, cooler)]})


# --- half-away rounding -----------------------------------------------------------

def test_round_half_away_matches_definition():
    cases = {0.0: 0.0, 0.4: 0.0, 0.5: 1.0, 1.5: 2.0, 2.5: 3.0, 2.4999: 2.0,
             -0.5: -1.0, -1.5: -2.0, -2.5: -3.0, -0.4: 0.0, 9.0: 9.0}
    for v, expected in cases.items():
        assert round_half_away(v) == expected, v


def test_round_half_away_rejects_non_finite():
    for bad in (math.inf, -math.inf, math.nan):
        with pytest.raises(ValueError):
            round_half_away(bad)


# --- generated evaluators vs hand-coded oracle -------------------------------------

def test_room_rhs_matches_hand_coded_oracle(room_system):
    rng = Rng(314159)
    schedule = room_schedule(heater=612.0, cooler=3.7)
    for _ in range(25):
        x = [rng.uniform_in(-10.0, 40.0), rng.uniform_in(-10.0, 40.0),
             rng.uniform_in(0.0, 9.0)]
        p = [rng.uniform_in(0.0, 2.0) for _ in range(10)]
        t = rng.uniform_in(0.0, 1000.0)
        got = room_system.eval_rhs(t, x, p, schedule)
        expected = room_rhs_oracle(t, x, p, 612.0, 3.7)
        assert np.allclose(got, expected, rtol=1e-15, atol=0.0)


def test_room_rhs_tracks_schedule_breakpoints(room_system):
    schedule = ActionSchedule.from_breakpoints(
        (0.0, 100.0),
        {"heater": [(0.0, 0.0), (50.0, 900.0)], "cooler": [(0.0, 0.0)]})
    x = [20.0, 20.0, 0.0]
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 0.1]
    before = room_system.eval_rhs(10.0, x, p, schedule)
    after = room_system.eval_rhs(60.0, x, p, schedule)
    assert np.allclose(before, room_rhs_oracle(10.0, x, p, 0.0, 0.0))
    assert np.allclose(after, room_rhs_oracle(60.0, x, p, 900.0, 0.0))
    assert after[0] > before[0]  # the heater warms room A


def test_room_algebraic_state_serves_heater_channel(room_system):
    schedule = room_schedule(heater=777.0)
    y = room_system.eval_algebraic(5.0, [20.0, 20.0, 0.0],
                                   [1.0] * 10, schedule)
    assert y.tolist() == [777.0]


def test_cooler_command_clamp_behavior(room_system):
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 1.0]
    x = [20.0, 20.0, 0.0]
    # commands round half away from zero, then clamp into [0, 9]
    for cmd, effective in [(-3.0, 0.0), (0.4, 0.0), (0.5, 1.0), (4.5, 5.0),
                           (8.9, 9.0), (240.0, 9.0)]:
        got = room_system.eval_rhs(0.0, x, p, room_schedule(cooler=cmd))
        assert got[2] == pytest.approx(0.1 * (1.0 * effective - 0.0)), cmd


# --- metadata and validation --------------------------------------------------------

def test_state_indexing(room_system):
    assert room_system.state_names == ("temperature", "temperature1",
                                       "cooler", "heater")
    assert [room_system.state_index(n) for n in room_system.state_names] \
        == [0, 1, 2, 3]
    with pytest.raises(UnknownStateNameError):
        room_system.state_index("ghost")


def test_room_state_bounds(room_system):
    assert room_system.state_bounds == ((-20.0, 50.0), (-20.0, 50.0),
                                        (0.0, 9.0))
    lo, hi = room_system.state_bounds_arrays()
    assert lo.tolist() == [-20.0, -20.0, 0.0]
    assert hi.tolist() == [50.0, 50.0, 9.0]


def test_outputs_must_be_states(room_resolved):
    with pytest.raises(UnknownOutputError):
        assemble_system(room_resolved, outputs=("temperature", "ghost"))


def test_state_bounds_only_for_differential_states(room_resolved):
    with pytest.raises(UnknownStateNameError):
        assemble_system(room_resolved, state_bounds={"heater": (0.0, 1.0)})
    sys = assemble_system(room_resolved)
    assert sys.state_bounds == ((-math.inf, math.inf),) * 3


def test_missing_channel_detected(room_system):
    incomplete = ActionSchedule.from_breakpoints(
        (0.0, 10.0), {"heater": [(0.0, 1.0)]})
    with pytest.raises(UnknownChannelError):
        room_system.eval_rhs(0.0, [20.0, 20.0, 0.0], [1.0] * 10, incomplete)


def test_numeric_domain_error_carries_time():
    td = parse_td("""{
        "id": "urn:dev:test:div", "title": "d",
        "properties": {
            "p": {"dtwt:model": "self = 1.0 / value()"}
        }
    }""")
    sys = assemble_system(resolve_models(td))
    zero = ActionSchedule.from_breakpoints((0.0, 10.0), {"p": [(0.0, 0.0)]})
    with pytest.raises(NumericDomainError) as exc:
        sys.eval_algebraic(3.0, [], [], zero)
    assert exc.value.t == 3.0


# --- structural comparison -----------------------------------------------------------

def _mini_td(channel: str, gain: str = "params[0]") -> str:
    import json
    return json.dumps({
        "id": "urn:dev:test:mini", "title": "m",
        "properties": {
            "level": {"dtwt:model":
                      f"dot(self) = {gain} * input(feed) | | params[0] = 1.0",
                      "dtwt:modelInput": [{"title": "feed",
                                           "propertyName": channel}]},
            channel: {"type": "number"},
        }})


def test_structure_signature_ignores_channel_names():
    a = assemble_system(resolve_models(parse_td(_mini_td("pump"))))
    b = assemble_system(resolve_models(parse_td(_mini_td("valve"))))
    assert structure_signature(a) == structure_signature(b)


def test_structure_signature_detects_shape_changes(room_system):
    a = assemble_system(resolve_models(parse_td(_mini_td("pump"))))
    c = assemble_system(resolve_models(parse_td(
        _mini_td("pump", gain="(params[0] * params[0])"))))
    assert structure_signature(a) != structure_signature(c)
    assert structure_signature(a) != structure_signature(room_system)


# --- integration ----------------------------------------------------------------------

def test_integrated_cooler_state_matches_closed_form(room_system):
    # with temperatures decoupled (p1 = p6 = 0) the cooler state is a pure
    # first-order lag: C(t) = target (1 - exp(-p8 t))
    p = [1.0, 0.0, 0.1, 15.0, 0.1, 0.5, 0.0, 0.1, 0.05, 1.0]
    schedule = room_schedule(cooler=6.0, horizon=(0.0, 120.0))
    traj = integrate(room_system, [20.0, 20.0, 0.0], p, schedule,
                     sample_times=np.linspace(0.0, 120.0, 41),
                     rtol=1e-10, atol=1e-12)
    target = 1.0 * 6.0
    for t, c in zip(traj.times, traj.series("cooler")):
        assert abs(c - target * (1.0 - math.exp(-0.05 * t))) <= 1e-8


def test_trajectory_surface(room_system):
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 0.1]
    schedule = room_schedule(horizon=(0.0, 300.0))
    grid = np.linspace(0.0, 300.0, 7)
    traj = integrate(room_system, [20.0, 19.0, 0.0], p, schedule,
                     sample_times=grid)
    assert traj.span == (0.0, 300.0)
    assert traj.names == room_system.state_names
    assert traj.values.shape == (7, 4)
    # heater algebraic column equals the commanded heater value
    assert np.allclose(traj.series("heater"), 800.0)
    # state_at and value_at agree with the sampled grid
    mid = traj.state_at(150.0)
    vec = traj.value_at(150.0)
    assert [mid[n] for n in traj.names] == vec.tolist()
    recs = traj.to_records()
    assert recs[0]["t"] == 0.0 and recs[0]["temperature"] == 20.0
    csv = traj.to_csv()
    header, first = csv.splitlines()[:2]
    assert header == "t,temperature,temperature1,cooler,heater"
    assert first.startswith("0.0,20.0,19.0,0.0,")


def test_integrate_validates_shapes(room_system):
    schedule = room_schedule()
    with pytest.raises(ValueError):
        integrate(room_system, [20.0], [1.0] * 10, schedule)
    with pytest.raises(ValueError):
        integrate(room_system, [20.0, 20.0, 0.0], [1.0] * 3, schedule)
    with pytest.raises(ValueError):
        integrate(room_system, [20.0, 20.0, 0.0], [1.0] * 10, schedule,
                  sample_times=[5.0, 1.0])
    with pytest.raises(ValueError):
        integrate(room_system, [20.0, 20.0, 0.0], [1.0] * 10, schedule,
                  span=(0.0, 10.0), sample_times=[0.0, 50.0])


def test_fixed_step_integration_agrees_with_adaptive(room_system):
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 0.1]
    schedule = room_schedule(horizon=(0.0, 200.0))
    x0 = [25.0, 18.0, 1.0]
    adaptive = integrate(room_system, x0, p, schedule, rtol=1e-10, atol=1e-12)
    fixed = integrate_fixed(room_system, x0, p, schedule, h=1.0)
    assert np.allclose(fixed.value_at(200.0), adaptive.value_at(200.0),
                       atol=1e-6)


def test_default_sample_grid_is_span_endpoints(room_system):
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 0.1]
    traj = integrate(room_system, [20.0, 20.0, 0.0], p, room_schedule(),
                     span=(0.0, 50.0))
    assert traj.times.tolist() == [0.0, 50.0]


def test_system_without_channels():
    td = parse_td("""{
        "id": "urn:dev:test:free", "title": "f",
        "properties": {
            "decay": {"dtwt:model":
                "dot(self) = -(params[0] * self) | params[0] >= 0.0 | params[0] = 0.5"}
        }
    }""")
    sys = assemble_system(resolve_models(td))
    assert sys.channel_names == ()
    empty = ActionSchedule(horizon=(0.0, 4.0))
    traj = integrate(sys, [2.0], [0.5], empty, rtol=1e-10, atol=1e-12)
    assert abs(traj.value_at(4.0)[0] - 2.0 * math.exp(-2.0)) <= 1e-9


def test_tight_tolerance_span_ending_at_a_breakpoint(room_system):
    # Stage evaluations of the last step land exactly on the span end. With
    # zero-order-hold inputs switching there, the right-hand side must keep
    # using the pre-switch value throughout that step, otherwise the error
    # estimate chases the jump and the step size collapses at tight
    # tolerances.
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 0.1]
    schedule = ActionSchedule.from_breakpoints(
        (0.0, 1000.0),
        {"heater": [(0.0, 0.0), (600.0, 900.0)],
         "cooler": [(0.0, 0.0), (600.0, 5.0)]})
    x0 = [20.0, 19.0, 0.0]
    up_to = integrate(room_system, x0, p, schedule, span=(0.0, 600.0),
                      rtol=1e-12, atol=1e-14)
    across = integrate(room_system, x0, p, schedule, span=(0.0, 1000.0),
                       rtol=1e-12, atol=1e-14)
    assert np.allclose(up_to.value_at(600.0)[:3], across.value_at(600.0)[:3],
                       atol=1e-9)
    # before the switch the commands are zero, so the cooler state stays put
    assert abs(up_to.value_at(600.0)[2]) <= 1e-12
    # after it the cooler state moves toward its commanded level
    assert across.value_at(1000.0)[2] > 0.0


def test_trajectory_step_count_reports_accepted_steps(room_system):
    p = [1.0, 0.001, 0.1, 15.0, 0.1, 0.5, 0.002, 0.1, 0.1, 0.1]
    schedule = ActionSchedule.from_breakpoints(
        (0.0, 2000.0), {"heater": [(0.0, 1.0)], "cooler": [(0.0, 3.0)]})
    traj = integrate(room_system, [20.0, 19.0, 0.0], p, schedule)
    assert traj.step_count == len(traj.dense.segments)
    assert traj.step_count > 0
    # a tighter tolerance demands more steps
    tight = integrate(room_system, [20.0, 19.0, 0.0], p, schedule,
                      rtol=1e-10, atol=1e-12)
    assert tight.step_count > traj.step_count
