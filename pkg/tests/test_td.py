"""Thing Description parsing: vocabulary handling, validation, diagnostics."""

from __future__ import annotations

import json

import pytest

from thingtwin import TdError, ValueFrom, parse_td
from thingtwin.expr import Behavior


def _td(properties: dict, **extra) -> str:
    doc = {"id": "urn:dev:test:unit", "title": "Unit thing",
           "properties": properties}
    doc.update(extra)
    return json.dumps(doc)


# --- bundled documents ---------------------------------------------------------

def test_room_document_surface(room_td):
    assert room_td.id == "urn:dev:ops:smart-home-rooms"
    assert room_td.property_names == ("temperature", "temperature1",
                                      "heater", "cooler")
    temp = room_td.property("temperature")
    assert temp.read_only and temp.observable
    assert temp.value_from is ValueFrom.READ_PROPERTY
    assert temp.model.behavior is Behavior.DIFFERENTIAL
    assert [mi.title for mi in temp.inputs] == ["heaterPower", "coolerPower",
                                                "temp1"]
    assert temp.input_by_title("heaterPower").property_name == "heater"
    assert temp.input_by_title("heaterPower").model_type == "@heatPower"
    assert temp.input_by_title("missing") is None

    cooler = room_td.property("cooler")
    assert cooler.writable and not cooler.write_only
    assert cooler.value_from is ValueFrom.MODEL
    assert cooler.model.behavior is Behavior.DIFFERENTIAL
    # the setpoint input has no propertyName: it is fed by cooler's own
    # recorded write stream
    assert cooler.input_by_title("coolerSetpoint").property_name is None

    heater = room_td.property("heater")
    assert heater.writable
    assert heater.value_from is ValueFrom.READ_PROPERTY
    assert heater.model.behavior is Behavior.ALGEBRAIC


def test_room_global_parameter_pool(room_td):
    assert room_td.global_param_count == 4
    assert room_td.global_guesses == {2: 15.0, 3: 0.1}
    assert room_td.global_constraints == {3: (0.0, float("inf"))}


def test_drone_document_surface(drone_td):
    assert drone_td.id == "urn:dev:ops:quadcopter-1"
    assert len(drone_td.properties) == 16
    served_by_model = [p.name for p in drone_td.properties
                       if p.value_from is ValueFrom.MODEL]
    assert served_by_model == ["velocityX", "velocityY", "velocityZ",
                               "yawrate", "velocitybodyX", "velocitybodyY",
                               "accelerationbodyX", "accelerationbodyY"]
    knobs = [p.name for p in drone_td.properties if p.writable]
    assert knobs == ["Th", "Ru", "El", "Ai"]
    for name in knobs:
        assert drone_td.property(name).model is None
    assert drone_td.global_param_count == 0


# --- vocabulary term resolution -------------------------------------------------

def test_bare_terms_accepted():
    td = parse_td(_td({"t": {"model": "self = params[0]",
                             "valueFrom": "model"}}))
    prop = td.property("t")
    assert prop.model is not None
    assert prop.value_from is ValueFrom.MODEL


def test_prefixed_term_wins_over_bare():
    td = parse_td(_td({"t": {
        "model": "self = 1.0",
        "dtwt:model": "self = 2.0",
        "valueFrom": "readProperty",
        "dtwt:valueFrom": "model",
    }}))
    prop = td.property("t")
    assert prop.model_source == "self = 2.0"
    assert prop.value_from is ValueFrom.MODEL


def test_value_from_defaults_to_read_property():
    td = parse_td(_td({"t": {"type": "number"}}))
    assert td.property("t").value_from is ValueFrom.READ_PROPERTY


def test_model_input_tag_is_canonicalized():
    td = parse_td(_td({"t": {
        "dtwt:model": "dot(self) = sum(inputType(@power))",
        "dtwt:modelInput": [
            {"title": "a", "propertyName": "x", "modelType": "power"},
            {"title": "b", "propertyName": "y", "modelType": "@power"},
        ],
    }}))
    tags = {mi.title: mi.model_type for mi in td.property("t").inputs}
    assert tags == {"a": "@power", "b": "@power"}


# --- global pool aggregation ----------------------------------------------------

def test_global_count_from_references_without_guesses():
    td = parse_td(_td({"t": {"dtwt:model": "self = global[6]"}}))
    assert td.global_param_count == 7
    assert td.global_guesses == {}


def test_matching_global_guesses_across_properties_allowed():
    td = parse_td(_td({
        "a": {"dtwt:model": "self = global[0] | | global[0] = 2.0"},
        "b": {"dtwt:model": "self = global[0] | | global[0] = 2.0"},
    }))
    assert td.global_guesses == {0: 2.0}


def test_clashing_global_guesses_rejected():
    with pytest.raises(TdError) as exc:
        parse_td(_td({
            "a": {"dtwt:model": "self = global[0] | | global[0] = 2.0"},
            "b": {"dtwt:model": "self = global[0] | | global[0] = 3.0"},
        }))
    assert exc.value.code == "ClashingGlobalGuess"


def test_clashing_global_constraints_rejected():
    with pytest.raises(TdError) as exc:
        parse_td(_td({
            "a": {"dtwt:model": "self = global[0] | global[0] >= 1.0"},
            "b": {"dtwt:model": "self = global[0] | global[0] >= 2.0"},
        }))
    assert exc.value.code == "ClashingGlobalConstraint"


def test_global_guess_must_satisfy_constraints_from_other_property():
    with pytest.raises(TdError) as exc:
        parse_td(_td({
            "a": {"dtwt:model": "self = global[0] | global[0] >= 1.0"},
            "b": {"dtwt:model": "self = global[0] | | global[0] = 0.5"},
        }))
    assert exc.value.code == "GuessOutsideBounds"


# --- validation diagnostics -----------------------------------------------------

def test_invalid_json_reports_offset():
    with pytest.raises(TdError) as exc:
        parse_td("{not json")
    assert exc.value.code == "JsonSyntax"
    assert "offset" in str(exc.value)


def test_missing_id_and_title():
    with pytest.raises(TdError) as exc:
        parse_td(json.dumps({"title": "x", "properties": {}}))
    assert exc.value.code == "MissingField"
    assert exc.value.path == "id"
    with pytest.raises(TdError) as exc:
        parse_td(json.dumps({"id": "x", "properties": {}}))
    assert exc.value.path == "title"


def test_unknown_value_from():
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {"dtwt:valueFrom": "oracle"}}))
    assert exc.value.code == "UnknownValueFrom"
    assert exc.value.path == "properties/t/valueFrom"


def test_value_from_model_requires_a_model():
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {"dtwt:valueFrom": "model"}}))
    assert exc.value.code == "MissingField"


def test_bad_model_string_reports_property_path():
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {"dtwt:model": "self = params[?]"}}))
    assert exc.value.code == "BadModel"
    assert exc.value.path == "properties/t/model"


def test_bad_model_in_input_reports_indexed_path():
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {
            "dtwt:model": "self = input(a)",
            "dtwt:modelInput": [{"title": "a", "propertyName": "x",
                                 "dtwt:model": "value() +"}],
        }}))
    assert exc.value.path == "properties/t/modelInput[0]/model"


def test_duplicate_input_titles_rejected():
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {
            "dtwt:model": "self = input(a)",
            "dtwt:modelInput": [{"title": "a", "propertyName": "x"},
                                {"title": "a", "propertyName": "y"}],
        }}))
    assert exc.value.code == "DuplicateInputTitle"


def test_model_input_must_be_list_of_objects():
    with pytest.raises(TdError):
        parse_td(_td({"t": {"dtwt:modelInput": {"title": "a"}}}))
    with pytest.raises(TdError):
        parse_td(_td({"t": {"dtwt:modelInput": ["a"]}}))
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {"dtwt:modelInput": [{"propertyName": "x"}]}}))
    assert exc.value.code == "MissingField"


def test_modeled_property_type_must_be_numeric():
    with pytest.raises(TdError) as exc:
        parse_td(_td({"t": {"type": "string", "dtwt:model": "self = 1.0"}}))
    assert exc.value.code == "BadType"
    for ok in ("number", "integer", "boolean"):
        parse_td(_td({"t": {"type": ok, "dtwt:model": "self = 1.0"}}))


def test_non_object_documents_rejected():
    with pytest.raises(TdError):
        parse_td("[1, 2]")
    with pytest.raises(TdError):
        parse_td(json.dumps({"id": "x", "title": "y", "properties": []}))
