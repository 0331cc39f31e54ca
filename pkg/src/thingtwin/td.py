"""Thing Description documents extended with behavioral models.

A Thing Description (TD) is a JSON document listing properties. Three
vocabulary terms attach behavioral models to properties:

- ``dtwt:model``        model string (see :mod:`thingtwin.expr`)
- ``dtwt:modelInput``   list of named inputs the model may reference
- ``dtwt:valueFrom``    ``"readProperty"`` (serve the recorded/stored value)
                        or ``"model"`` (serve the model's computed value)

The bare term names (``model``, ``modelInput``, ``valueFrom``) are accepted
as well; the prefixed form wins when both are present.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .errors import TdError
from .expr import GlobalParam, ModelSpec, parse_model, walk

__all__ = ["ValueFrom", "ModelInput", "PropertySpec", "ThingDescription",
           "parse_td", "parse_td_file"]

PREFIX = "dtwt:"


class ValueFrom(Enum):
    READ_PROPERTY = "readProperty"
    MODEL = "model"


@dataclass(frozen=True)
class ModelInput:
    """A named input a model expression can reference via ``input(title)``."""

    title: str
    property_name: str | None  # None: fed by its own recorded stream
    value_type: str | None
    model: ModelSpec | None
    model_source: str | None
    model_type: str | None  # canonical '@tag' for inputType aggregation


@dataclass(frozen=True)
class PropertySpec:
    name: str
    value_type: str | None
    read_only: bool
    write_only: bool
    observable: bool
    value_from: ValueFrom
    model: ModelSpec | None
    model_source: str | None
    inputs: tuple[ModelInput, ...]
    forms: tuple[Any, ...]
    raw: dict[str, Any] = field(repr=False, default_factory=dict)

    @property
    def writable(self) -> bool:
        return not self.read_only

    def input_by_title(self, title: str) -> ModelInput | None:
        for mi in self.inputs:
            if mi.title == title:
                return mi
        return None


@dataclass(frozen=True)
class ThingDescription:
    id: str
    title: str
    properties: tuple[PropertySpec, ...]  # declaration order
    global_guesses: dict[int, float]
    global_constraints: dict[int, tuple[float, float]]
    global_param_count: int
    raw: dict[str, Any] = field(repr=False, default_factory=dict)

    @property
    def property_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.properties)

    def property(self, name: str) -> PropertySpec | None:
        for p in self.properties:
            if p.name == name:
                return p
        return None


def _vocab(obj: dict[str, Any], term: str) -> Any:
    """Fetch a vocabulary term, preferring the prefixed spelling."""
    if PREFIX + term in obj:
        return obj[PREFIX + term]
    return obj.get(term)


def _canonical_tag(tag: str) -> str:
    return tag if tag.startswith("@") else "@" + tag


def _parse_model_field(source: Any, path: str) -> tuple[ModelSpec, str]:
    if not isinstance(source, str):
        raise TdError("BadType", "model must be a string", path=path)
    try:
        return parse_model(source), source
    except Exception as exc:
        raise TdError("BadModel", f"invalid model string: {exc}", path=path) from exc


def _parse_model_input(obj: Any, path: str) -> ModelInput:
    if not isinstance(obj, dict):
        raise TdError("BadType", "modelInput entries must be objects", path=path)
    title = obj.get("title")
    if not isinstance(title, str) or not title:
        raise TdError("MissingField", "modelInput requires a 'title'",
                      path=path + "/title")
    model = None
    model_source = None
    raw_model = _vocab(obj, "model")
    if raw_model is not None:
        model, model_source = _parse_model_field(raw_model, path + "/model")
    model_type = obj.get("modelType")
    if model_type is not None:
        if not isinstance(model_type, str):
            raise TdError("BadType", "modelType must be a string",
                          path=path + "/modelType")
        model_type = _canonical_tag(model_type)
    property_name = obj.get("propertyName")
    if property_name is not None and not isinstance(property_name, str):
        raise TdError("BadType", "propertyName must be a string",
                      path=path + "/propertyName")
    return ModelInput(
        title=title,
        property_name=property_name,
        value_type=obj.get("type"),
        model=model,
        model_source=model_source,
        model_type=model_type,
    )


def _parse_property(name: str, obj: Any, path: str) -> PropertySpec:
    if not isinstance(obj, dict):
        raise TdError("BadType", "property entries must be objects", path=path)
    model = None
    model_source = None
    raw_model = _vocab(obj, "model")
    if raw_model is not None:
        model, model_source = _parse_model_field(raw_model, path + "/model")
    raw_inputs = _vocab(obj, "modelInput")
    inputs: tuple[ModelInput, ...] = ()
    if raw_inputs is not None:
        if not isinstance(raw_inputs, list):
            raise TdError("BadType", "modelInput must be a list",
                          path=path + "/modelInput")
        inputs = tuple(_parse_model_input(mi, f"{path}/modelInput[{i}]")
                       for i, mi in enumerate(raw_inputs))
        titles = [mi.title for mi in inputs]
        if len(set(titles)) != len(titles):
            raise TdError("DuplicateInputTitle",
                          "modelInput titles must be unique within a property",
                          path=path + "/modelInput")
    raw_vf = _vocab(obj, "valueFrom")
    if raw_vf is None:
        value_from = ValueFrom.READ_PROPERTY
    else:
        try:
            value_from = ValueFrom(raw_vf)
        except ValueError:
            raise TdError("UnknownValueFrom",
                          f"valueFrom must be 'readProperty' or 'model', "
                          f"got {raw_vf!r}", path=path + "/valueFrom") from None
    if value_from is ValueFrom.MODEL and model is None:
        raise TdError("MissingField",
                      "valueFrom 'model' requires a model", path=path)
    value_type = obj.get("type")
    if model is not None and value_type not in (None, "number", "integer",
                                                "boolean"):
        raise TdError("BadType",
                      f"modeled properties must be number/integer/boolean, "
                      f"got {value_type!r}", path=path + "/type")
    forms = obj.get("forms", [])
    return PropertySpec(
        name=name,
        value_type=value_type,
        read_only=bool(obj.get("readOnly", False)),
        write_only=bool(obj.get("writeOnly", False)),
        observable=bool(obj.get("observable", False)),
        value_from=value_from,
        model=model,
        model_source=model_source,
        inputs=inputs,
        forms=tuple(forms) if isinstance(forms, list) else (forms,),
        raw=obj,
    )


def _iter_models(prop: PropertySpec):
    """Yield (path, ModelSpec) for the property model and its input models."""
    base = f"properties/{prop.name}"
    if prop.model is not None:
        yield base + "/model", prop.model
    for i, mi in enumerate(prop.inputs):
        if mi.model is not None:
            yield f"{base}/modelInput[{i}]/model", mi.model


def _aggregate_globals(props: tuple[PropertySpec, ...]):
    guesses: dict[int, float] = {}
    bounds: dict[int, tuple[float, float]] = {}
    max_ref = -1
    for prop in props:
        for path, spec in _iter_models(prop):
            for node in walk(spec.expr):
                if isinstance(node, GlobalParam):
                    max_ref = max(max_ref, node.index)
            for g in spec.guesses:
                if g.scope != "global":
                    continue
                max_ref = max(max_ref, g.index)
                if g.index in guesses and guesses[g.index] != g.value:
                    raise TdError(
                        "ClashingGlobalGuess",
                        f"global[{g.index}] guessed as {guesses[g.index]} "
                        f"and {g.value}", path=path)
                guesses[g.index] = g.value
            for c in spec.constraints:
                if c.scope != "global":
                    continue
                max_ref = max(max_ref, c.index)
                lo, hi = bounds.get(c.index, (float("-inf"), float("inf")))
                if c.kind == "lower":
                    if lo not in (float("-inf"), c.value):
                        raise TdError(
                            "ClashingGlobalConstraint",
                            f"global[{c.index}] lower bound set as {lo} "
                            f"and {c.value}", path=path)
                    lo = c.value
                else:
                    if hi not in (float("inf"), c.value):
                        raise TdError(
                            "ClashingGlobalConstraint",
                            f"global[{c.index}] upper bound set as {hi} "
                            f"and {c.value}", path=path)
                    hi = c.value
                bounds[c.index] = (lo, hi)
    for index, value in guesses.items():
        lo, hi = bounds.get(index, (float("-inf"), float("inf")))
        if not (lo <= value <= hi):
            raise TdError(
                "GuessOutsideBounds",
                f"global[{index}] guess {value} violates its constraints "
                f"[{lo}, {hi}]", path="properties")
    return guesses, bounds, max_ref + 1


def parse_td(text: str) -> ThingDescription:
    """Parse a Thing Description JSON document.

    Raises :class:`TdError` with codes such as ``JsonSyntax``,
    ``MissingField``, ``UnknownValueFrom``, ``ClashingGlobalGuess``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TdError("JsonSyntax",
                      f"invalid JSON at offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise TdError("BadType", "a Thing Description must be a JSON object")
    td_id = doc.get("id")
    if not isinstance(td_id, str) or not td_id:
        raise TdError("MissingField", "TD requires an 'id'", path="id")
    title = doc.get("title")
    if not isinstance(title, str) or not title:
        raise TdError("MissingField", "TD requires a 'title'", path="title")
    raw_props = doc.get("properties", {})
    if not isinstance(raw_props, dict):
        raise TdError("BadType", "'properties' must be an object",
                      path="properties")
    props = tuple(_parse_property(name, obj, f"properties/{name}")
                  for name, obj in raw_props.items())
    guesses, bounds, count = _aggregate_globals(props)
    return ThingDescription(
        id=td_id,
        title=title,
        properties=props,
        global_guesses=guesses,
        global_constraints=bounds,
        global_param_count=count,
        raw=doc,
    )


def parse_td_file(path) -> ThingDescription:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_td(fh.read())
