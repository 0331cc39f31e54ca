"""Project store behavior: slugging, immutable traces, append-only fits,
rewritable twin snapshots, and staleness hashes."""

from __future__ import annotations

import hashlib
import json

import pytest

from thingtwin import packaged_td
from thingtwin.errors import ProjectError, TraceError
from thingtwin.project import Project, td_hash

TRACE = """t,temperature,heater,cooler
0.0,20.0,0.0,0
600.0,20.5,1.0,0
1200.0,21.0,1.0,3
"""


@pytest.fixture
def project(tmp_path):
    return Project(tmp_path / "proj")


@pytest.fixture
def room_key(project):
    return project.add_thing(packaged_td("room"))


# --- things --------------------------------------------------------------


def test_adding_a_thing_stores_the_exact_text(project):
    text = packaged_td("room")
    key = project.add_thing(text)
    assert key == "urn-dev-ops-smart-home-rooms"
    assert project.thing_keys() == [key]
    assert project.td_text(key) == text
    assert project.td(key).id == "urn:dev:ops:smart-home-rooms"
    assert project.td_hash(key) \
        == hashlib.sha256(text.encode("utf-8")).hexdigest()
    assert td_hash(text) == project.td_hash(key)


def test_key_resolution(project, room_key):
    assert project.key_of(room_key) == room_key
    assert project.key_of("urn:dev:ops:smart-home-rooms") == room_key
    with pytest.raises(ProjectError) as err:
        project.key_of("urn:dev:ops:nonexistent")
    assert err.value.code == "UnknownThing"


def test_readding_a_thing_replaces_it_and_changes_the_hash(project, room_key):
    before = project.td_hash(room_key)
    doc = json.loads(project.td_text(room_key))
    doc["title"] = "renamed"
    assert project.add_thing(json.dumps(doc)) == room_key
    assert project.thing_keys() == [room_key]
    assert project.td_hash(room_key) != before


def test_unknown_things_are_reported(project):
    with pytest.raises(ProjectError) as err:
        project.td_text("missing")
    assert err.value.code == "UnknownThing"


def test_unusable_ids_are_rejected(project):
    with pytest.raises(ProjectError) as err:
        project.add_thing(json.dumps({
            "id": "::", "title": "x",
            "properties": {"a": {"type": "number"}}}))
    assert err.value.code == "BadName"


# --- traces -----------------------------------------------------------------


def test_traces_store_load_and_never_overwrite(project, room_key):
    assert project.trace_names(room_key) == []
    project.save_trace(room_key, "day1", TRACE, "csv")
    assert project.trace_names(room_key) == ["day1"]
    obs, actions = project.load_trace(room_key, "day1")
    # Writable-property columns come back as commands, the rest as data.
    assert obs.records == ({"temperature": 20.0}, {"temperature": 20.5},
                           {"temperature": 21.0})
    assert actions.breakpoints("heater") == [(0.0, 0.0), (600.0, 1.0)]
    assert actions.breakpoints("cooler") == [(0.0, 0.0), (1200.0, 3.0)]
    with pytest.raises(ProjectError) as err:
        project.save_trace(room_key, "day1", TRACE, "csv")
    assert err.value.code == "DuplicateTrace"
    # The name is taken across formats, not per format.
    with pytest.raises(ProjectError) as err:
        project.save_trace(room_key, "day1", "[]", "json")
    assert err.value.code == "DuplicateTrace"


def test_broken_traces_are_rejected_before_persisting(project, room_key):
    with pytest.raises(TraceError):
        project.save_trace(room_key, "bad", "t,a\n0.0,oops\n", "csv")
    assert project.trace_names(room_key) == []
    with pytest.raises(TraceError) as err:
        project.save_trace(room_key, "bad", TRACE, "yaml")
    assert err.value.code == "UnknownFormat"


def test_trace_lookup_errors(project, room_key):
    with pytest.raises(ProjectError) as err:
        project.load_trace(room_key, "missing")
    assert err.value.code == "UnknownTrace"
    with pytest.raises(ProjectError) as err:
        project.save_trace("ghost", "day1", TRACE, "csv")
    assert err.value.code == "UnknownThing"
    assert project.trace_names("ghost") == []


@pytest.mark.parametrize("name", ["../evil", ".hidden", "a/b", "", "sp ace"])
def test_unsafe_names_are_rejected(project, room_key, name):
    with pytest.raises(ProjectError) as err:
        project.save_trace(room_key, name, TRACE, "csv")
    assert err.value.code == "BadName"


# --- fits ------------------------------------------------------------------------


def test_fits_are_append_only(project, room_key):
    assert project.fit_ids(room_key) == []
    assert project.next_fit_id(room_key) == "fit-0001"
    doc = {"params": [1.0, 2.0], "cost": 0.5, "tdHash": "abc"}
    project.save_fit(room_key, "fit-0001", doc)
    assert project.load_fit(room_key, "fit-0001") == doc
    assert project.next_fit_id(room_key) == "fit-0002"
    with pytest.raises(ProjectError) as err:
        project.save_fit(room_key, "fit-0001", {"other": 1})
    assert err.value.code == "DuplicateFit"
    assert project.load_fit(room_key, "fit-0001") == doc
    with pytest.raises(ProjectError) as err:
        project.load_fit(room_key, "fit-9999")
    assert err.value.code == "UnknownFit"
    with pytest.raises(ProjectError) as err:
        project.save_fit("ghost", "fit-0001", doc)
    assert err.value.code == "UnknownThing"


# --- twins --------------------------------------------------------------------------


def test_twin_snapshots_are_rewritable(project):
    assert project.twin_ids() == []
    assert project.next_twin_id() == "twin-0001"
    project.save_twin("twin-0001", {"virtualTime": 0.0})
    assert project.next_twin_id() == "twin-0002"
    project.save_twin("twin-0001", {"virtualTime": 9.0})  # rewrite is fine
    assert project.load_twin("twin-0001") == {"virtualTime": 9.0}
    assert project.twin_ids() == ["twin-0001"]
    with pytest.raises(ProjectError) as err:
        project.load_twin("twin-9999")
    assert err.value.code == "UnknownTwin"


# --- persistence ------------------------------------------------------------------


def test_a_reopened_project_sees_prior_state(tmp_path):
    first = Project(tmp_path / "store")
    key = first.add_thing(packaged_td("room"))
    first.save_trace(key, "day1", TRACE, "csv")
    first.save_fit(key, "fit-0001", {"cost": 1.0})
    first.save_twin("twin-0001", {"virtualTime": 0.0})
    again = Project(tmp_path / "store")
    assert again.thing_keys() == [key]
    assert again.trace_names(key) == ["day1"]
    assert again.fit_ids(key) == ["fit-0001"]
    assert again.twin_ids() == ["twin-0001"]
    assert again.load_trace(key, "day1")[0].records[0] \
        == {"temperature": 20.0}
