"""Validation and resolution of behavioral models against a Thing Description.

Resolution rewrites every per-property model into a closed expression over:

- ``ParamSlot(i)``  one entry of the flat parameter vector,
- ``DiffState(n)``  a differential state (property integrated via ``dot(self)``),
- ``AlgState(n)``   an algebraic state (property with a ``self = ...`` model),
- ``SignalRef(n)``  a piecewise-constant named channel (a writable property's
  commanded value, or a recorded data stream).

Flat parameter layout (deterministic): for each modeled property in TD
declaration order, first each modelInput's local params in modelInput
declaration order, then the property's own local params by index, then any
globals not yet allocated in the order they are first referenced (input
expressions before the owner expression, each left-to-right). Global indices
never referenced by an expression get no slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import ResolutionError
from .expr import (Behavior, BinOp, Call, Const, Expr, GlobalParam, InputRef,
                   InputTypeAgg, LocalParam, ModelSpec, Neg, SelfRef, ValueRef,
                   walk)
from .td import ModelInput, PropertySpec, ThingDescription, ValueFrom

__all__ = ["Diagnostic", "ParamSlot", "DiffState", "AlgState", "SignalRef",
           "ParamInfo", "ResolvedModels", "validate_td", "resolve_models",
           "render_resolved", "render_parsed"]


# --- resolved leaf nodes (interior nodes are reused from expr) ---------------

@dataclass(frozen=True)
class ParamSlot:
    slot: int


@dataclass(frozen=True)
class DiffState:
    name: str


@dataclass(frozen=True)
class AlgState:
    name: str


@dataclass(frozen=True)
class SignalRef:
    name: str


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # 'error' | 'warning'
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"[{self.severity}] {self.code} at {self.path}: {self.message}"


@dataclass(frozen=True)
class ParamInfo:
    """One slot of the flat parameter vector."""

    slot: int
    scope: str  # 'local' | 'global'
    property_name: str | None  # owning property for locals
    input_title: str | None  # owning modelInput for input-model locals
    index: int  # local or global index within its scope
    lower: float
    upper: float
    guess: float

    def label(self) -> str:
        if self.scope == "global":
            return f"global[{self.index}]"
        if self.input_title is not None:
            return f"{self.property_name}/{self.input_title}/params[{self.index}]"
        return f"{self.property_name}/params[{self.index}]"


@dataclass
class ResolvedModels:
    """A Thing Description's models resolved over flat parameters and states."""

    td: ThingDescription
    diff_states: tuple[str, ...]  # declaration order
    alg_states: tuple[str, ...]  # declaration order
    alg_order: tuple[str, ...]  # dependency (evaluation) order
    writables: tuple[str, ...]
    rhs: dict[str, Expr]  # diff state -> resolved derivative expression
    alg: dict[str, Expr]  # alg state -> resolved expression
    params: tuple[ParamInfo, ...]
    channels: dict[str, str]  # channel name -> 'action' | 'data'
    global_param_count: int
    slot_of_global: dict[int, int] = field(default_factory=dict)

    @property
    def param_count(self) -> int:
        return len(self.params)

    def param_guesses(self) -> list[float]:
        return [p.guess for p in self.params]

    def param_bounds(self) -> list[tuple[float, float]]:
        return [(p.lower, p.upper) for p in self.params]

    def states(self) -> tuple[str, ...]:
        return self.diff_states + self.alg_states

    def sensor_backed(self) -> tuple[str, ...]:
        """States served from recorded device readings (valueFrom readProperty)."""
        out = []
        for name in self.states():
            prop = self.td.property(name)
            if prop is not None and prop.value_from is ValueFrom.READ_PROPERTY:
                out.append(name)
        return tuple(out)


# --- validation ---------------------------------------------------------------

def _modeled(td: ThingDescription) -> list[PropertySpec]:
    return [p for p in td.properties if p.model is not None]


def _effective_input_expr(mi: ModelInput) -> Expr:
    return mi.model.expr if mi.model is not None else SelfRef()


def _inputs_referenced(prop: PropertySpec) -> list[ModelInput]:
    """modelInputs actually reachable from the property's expression."""
    assert prop.model is not None
    out: list[ModelInput] = []
    seen: set[str] = set()
    for node in walk(prop.model.expr):
        if isinstance(node, InputRef):
            mi = prop.input_by_title(node.title)
            if mi is not None and mi.title not in seen:
                seen.add(mi.title)
                out.append(mi)
        elif isinstance(node, InputTypeAgg):
            for mi in prop.inputs:
                if mi.model_type == node.type_tag and mi.title not in seen:
                    seen.add(mi.title)
                    out.append(mi)
    return out


def validate_td(td: ThingDescription) -> list[Diagnostic]:
    """Check cross-references and model structure; returns diagnostics.

    Errors: dangling propertyName, unresolved input references, empty
    aggregations, differential or nested modelInput models, algebraic
    reference cycles.
    Warnings: declared-but-unreferenced local params and globals.

    A writable property may carry a differential model: the written value is
    the commanded raw stream (reachable via ``value()``), while the property's
    served value is the integrated state.
    """
    diags: list[Diagnostic] = []
    names = set(td.property_names)

    for prop in td.properties:
        base = f"properties/{prop.name}"
        for i, mi in enumerate(prop.inputs):
            path = f"{base}/modelInput[{i}]"
            if mi.property_name is not None and mi.property_name not in names:
                diags.append(Diagnostic(
                    "error", "DanglingPropertyName", path,
                    f"modelInput {mi.title!r} references unknown property "
                    f"{mi.property_name!r}"))
            if mi.model is not None:
                if mi.model.behavior is Behavior.DIFFERENTIAL:
                    diags.append(Diagnostic(
                        "error", "DifferentialInput", path,
                        f"modelInput {mi.title!r} uses dot(self); input models "
                        f"must be algebraic"))
                for node in walk(mi.model.expr):
                    if isinstance(node, (InputRef, InputTypeAgg)):
                        diags.append(Diagnostic(
                            "error", "NestedInput", path,
                            f"modelInput {mi.title!r} references another "
                            f"input; inputs cannot nest"))
                        break
        if prop.model is None:
            continue
        for node in walk(prop.model.expr):
            if isinstance(node, InputRef) and prop.input_by_title(node.title) is None:
                diags.append(Diagnostic(
                    "error", "UnresolvedInput", base,
                    f"input({node.title}) has no matching modelInput"))
            elif isinstance(node, InputTypeAgg):
                if not any(mi.model_type == node.type_tag for mi in prop.inputs):
                    diags.append(Diagnostic(
                        "error", "EmptyAggregation", base,
                        f"{node.aggregator}(inputType({node.type_tag})) "
                        f"matches no modelInput"))
        used = {n.index for n in walk(prop.model.expr)
                if isinstance(n, LocalParam)}
        unused = set(range(prop.model.local_param_count)) - used
        if unused:
            diags.append(Diagnostic(
                "warning", "UnusedParam", base,
                f"params {sorted(unused)} declared but not used in the "
                f"expression"))

    diags.extend(_check_unused_globals(td))
    diags.extend(_check_algebraic_cycles(td))
    return diags


def _referenced_globals(td: ThingDescription) -> set[int]:
    refs: set[int] = set()
    for prop in _modeled(td):
        exprs = [prop.model.expr] + [
            _effective_input_expr(mi) for mi in prop.inputs if mi.model]
        for e in exprs:
            refs.update(n.index for n in walk(e) if isinstance(n, GlobalParam))
    return refs


def _check_unused_globals(td: ThingDescription) -> list[Diagnostic]:
    refs = _referenced_globals(td)
    declared = set(td.global_guesses) | set(td.global_constraints)
    return [Diagnostic(
        "warning", "UnusedGlobal", "properties",
        f"global[{i}] has a guess or constraint but is never referenced")
        for i in sorted(declared - refs)]


def _check_algebraic_cycles(td: ThingDescription) -> list[Diagnostic]:
    alg_props = {p.name for p in _modeled(td)
                 if p.model.behavior is Behavior.ALGEBRAIC}
    edges: dict[str, set[str]] = {n: set() for n in alg_props}
    for prop in _modeled(td):
        if prop.name not in alg_props:
            continue
        if any(isinstance(n, SelfRef) for n in walk(prop.model.expr)):
            edges[prop.name].add(prop.name)
        for mi in _inputs_referenced(prop):
            if mi.property_name in alg_props and any(
                    isinstance(n, SelfRef)
                    for n in walk(_effective_input_expr(mi))):
                edges[prop.name].add(mi.property_name)

    diags: list[Diagnostic] = []
    state: dict[str, int] = {}  # 0 visiting, 1 done
    stack: list[str] = []

    def visit(node: str) -> None:
        if state.get(node) == 1:
            return
        if state.get(node) == 0:
            cycle = stack[stack.index(node):] + [node]
            diags.append(Diagnostic(
                "error", "AlgebraicCycle", f"properties/{node}",
                "algebraic models form a cycle: " + " -> ".join(cycle)))
            return
        state[node] = 0
        stack.append(node)
        for nxt in sorted(edges[node]):
            visit(nxt)
        stack.pop()
        state[node] = 1

    for name in sorted(alg_props):
        visit(name)
    return diags


# --- resolution ---------------------------------------------------------------

class _Layout:
    def __init__(self) -> None:
        self.params: list[ParamInfo] = []
        self.local_slots: dict[tuple[str, str | None, int], int] = {}
        self.global_slots: dict[int, int] = {}

    def add_local(self, prop: str, input_title: str | None, index: int,
                  lower: float, upper: float, guess: float | None) -> None:
        slot = len(self.params)
        self.local_slots[(prop, input_title, index)] = slot
        self.params.append(ParamInfo(
            slot, "local", prop, input_title, index,
            lower, upper, _default_guess(guess, lower, upper)))

    def add_global(self, index: int, lower: float, upper: float,
                   guess: float | None) -> None:
        if index in self.global_slots:
            return
        slot = len(self.params)
        self.global_slots[index] = slot
        self.params.append(ParamInfo(
            slot, "global", None, None, index,
            lower, upper, _default_guess(guess, lower, upper)))


def _default_guess(guess: float | None, lower: float, upper: float) -> float:
    if guess is not None:
        return guess
    return min(max(0.0, lower), upper)


def _local_bounds(spec: ModelSpec, index: int) -> tuple[float, float]:
    lo, hi = float("-inf"), float("inf")
    for c in spec.constraints:
        if c.scope == "local" and c.index == index:
            if c.kind == "lower":
                lo = max(lo, c.value)
            else:
                hi = min(hi, c.value)
    return lo, hi


def _build_layout(td: ThingDescription) -> _Layout:
    layout = _Layout()
    for prop in _modeled(td):
        for mi in prop.inputs:
            if mi.model is None:
                continue
            guesses = mi.model.local_guesses()
            for j in range(mi.model.local_param_count):
                lo, hi = _local_bounds(mi.model, j)
                layout.add_local(prop.name, mi.title, j, lo, hi, guesses.get(j))
        own = prop.model
        guesses = own.local_guesses()
        for j in range(own.local_param_count):
            lo, hi = _local_bounds(own, j)
            layout.add_local(prop.name, None, j, lo, hi, guesses.get(j))
        scan: list[Expr] = [
            _effective_input_expr(mi) for mi in prop.inputs if mi.model]
        scan.append(own.expr)
        for e in scan:
            for node in walk(e):
                if isinstance(node, GlobalParam):
                    lo, hi = td.global_constraints.get(
                        node.index, (float("-inf"), float("inf")))
                    layout.add_global(node.index, lo, hi,
                                      td.global_guesses.get(node.index))
    return layout


class _Resolver:
    def __init__(self, td: ThingDescription, layout: _Layout):
        self.td = td
        self.layout = layout
        behaviors = {p.name: p.model.behavior for p in _modeled(td)}
        self.diff = {n for n, b in behaviors.items()
                     if b is Behavior.DIFFERENTIAL}
        self.alg = {n for n, b in behaviors.items() if b is Behavior.ALGEBRAIC}
        self.channels: dict[str, str] = {}

    def channel(self, name: str, kind: str) -> SignalRef:
        self.channels.setdefault(name, kind)
        return SignalRef(name)

    def stream_of_property(self, name: str) -> SignalRef:
        prop = self.td.property(name)
        kind = "action" if (prop is not None and prop.writable) else "data"
        return self.channel(name, kind)

    def target_value(self, name: str, path: str) -> Expr:
        """What ``self`` means for an input bound to property ``name``."""
        if name in self.diff:
            return DiffState(name)
        if name in self.alg:
            return AlgState(name)
        return self.stream_of_property(name)

    def resolve(self, e: Expr, prop: PropertySpec,
                mi: ModelInput | None) -> Expr:
        path = f"properties/{prop.name}"
        if isinstance(e, Const):
            return e
        if isinstance(e, LocalParam):
            key = (prop.name, mi.title if mi else None, e.index)
            return ParamSlot(self.layout.local_slots[key])
        if isinstance(e, GlobalParam):
            return ParamSlot(self.layout.global_slots[e.index])
        if isinstance(e, SelfRef):
            if mi is None:
                if prop.name in self.diff:
                    return DiffState(prop.name)
                raise ResolutionError(
                    "AlgebraicCycle",
                    f"algebraic model of {prop.name!r} references itself",
                    path=path)
            if mi.property_name is None:
                # An input detached from any property: both `self` and
                # `value()` read the owning property's raw stream.
                return self.stream_of_property(prop.name)
            return self.target_value(mi.property_name, path)
        if isinstance(e, ValueRef):
            if mi is None or mi.property_name is None:
                return self.stream_of_property(prop.name)
            return self.stream_of_property(mi.property_name)
        if isinstance(e, InputRef):
            target = prop.input_by_title(e.title)
            if target is None:
                raise ResolutionError(
                    "UnresolvedInput",
                    f"input({e.title}) has no matching modelInput", path=path)
            return self.resolve(_effective_input_expr(target), prop, target)
        if isinstance(e, InputTypeAgg):
            matches = [m for m in prop.inputs if m.model_type == e.type_tag]
            if not matches:
                raise ResolutionError(
                    "UnresolvedInput",
                    f"{e.aggregator}(inputType({e.type_tag})) matches no "
                    f"modelInput", path=path)
            resolved = [self.resolve(_effective_input_expr(m), prop, m)
                        for m in matches]
            out = resolved[0]
            for nxt in resolved[1:]:
                out = BinOp("+", out, nxt)
            return out
        if isinstance(e, Call):
            return Call(e.fn, tuple(self.resolve(a, prop, mi) for a in e.args))
        if isinstance(e, BinOp):
            return BinOp(e.op, self.resolve(e.lhs, prop, mi),
                         self.resolve(e.rhs, prop, mi))
        if isinstance(e, Neg):
            return Neg(self.resolve(e.arg, prop, mi))
        raise TypeError(f"unexpected node {e!r}")


def _alg_evaluation_order(alg_states: Iterable[str],
                          alg_exprs: dict[str, Expr]) -> tuple[str, ...]:
    alg_set = set(alg_states)
    deps = {
        name: {n.name for n in walk(expr)
               if isinstance(n, AlgState) and n.name in alg_set}
        for name, expr in alg_exprs.items()
    }
    order: list[str] = []
    done: set[str] = set()
    pending = list(alg_states)
    while pending:
        progressed = False
        remaining = []
        for name in pending:
            if deps[name] <= done:
                order.append(name)
                done.add(name)
                progressed = True
            else:
                remaining.append(name)
        if not progressed:
            raise ResolutionError(
                "AlgebraicCycle",
                "algebraic models form a cycle: " + ", ".join(remaining),
                path="properties")
        pending = remaining
    return tuple(order)


def resolve_models(td: ThingDescription) -> ResolvedModels:
    """Resolve all models of a validated TD into a :class:`ResolvedModels`.

    Raises :class:`ResolutionError` if :func:`validate_td` reports errors.
    """
    errors = [d for d in validate_td(td) if d.severity == "error"]
    if errors:
        raise ResolutionError(
            "ValidationFailed",
            "; ".join(str(d) for d in errors), path=errors[0].path)

    layout = _build_layout(td)
    resolver = _Resolver(td, layout)

    diff_states = tuple(p.name for p in _modeled(td)
                        if p.model.behavior is Behavior.DIFFERENTIAL)
    alg_states = tuple(p.name for p in _modeled(td)
                       if p.model.behavior is Behavior.ALGEBRAIC)
    rhs: dict[str, Expr] = {}
    alg: dict[str, Expr] = {}
    for prop in _modeled(td):
        resolved = resolver.resolve(prop.model.expr, prop, None)
        if prop.model.behavior is Behavior.DIFFERENTIAL:
            rhs[prop.name] = resolved
        else:
            alg[prop.name] = resolved

    writables = tuple(p.name for p in td.properties if p.writable)
    return ResolvedModels(
        td=td,
        diff_states=diff_states,
        alg_states=alg_states,
        alg_order=_alg_evaluation_order(alg_states, alg),
        writables=writables,
        rhs=rhs,
        alg=alg,
        params=tuple(layout.params),
        channels=dict(resolver.channels),
        global_param_count=td.global_param_count,
        slot_of_global=dict(layout.global_slots),
    )


# --- rendering ----------------------------------------------------------------

def render_resolved(e: Expr, diff_index: dict[str, int],
                    alg_index: dict[str, int]) -> str:
    """Render a resolved expression in flat x[i]/y[j]/params[s] form."""
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, ParamSlot):
        return f"params[{e.slot}]"
    if isinstance(e, DiffState):
        return f"x[{diff_index[e.name]}]"
    if isinstance(e, AlgState):
        return f"y[{alg_index[e.name]}]"
    if isinstance(e, SignalRef):
        return f'readProperty("{e.name}")'
    if isinstance(e, Call):
        args = ", ".join(render_resolved(a, diff_index, alg_index)
                         for a in e.args)
        return f"{e.fn}({args})"
    if isinstance(e, BinOp):
        lhs = render_resolved(e.lhs, diff_index, alg_index)
        rhs = render_resolved(e.rhs, diff_index, alg_index)
        return f"({lhs} {e.op} {rhs})"
    if isinstance(e, Neg):
        return f"(-{render_resolved(e.arg, diff_index, alg_index)})"
    raise TypeError(f"unexpected node {e!r}")


def render_parsed(resolved: ResolvedModels) -> str:
    """Human-readable flat form of the whole system, one line per state."""
    diff_index = {n: i for i, n in enumerate(resolved.diff_states)}
    alg_index = {n: i for i, n in enumerate(resolved.alg_states)}
    lines = []
    for name in resolved.alg_states:
        body = render_resolved(resolved.alg[name], diff_index, alg_index)
        lines.append(f"y[{alg_index[name]}] = {body}")
    for name in resolved.diff_states:
        body = render_resolved(resolved.rhs[name], diff_index, alg_index)
        lines.append(f"dxdt[{diff_index[name]}] = {body}")
    return "\n".join(lines)
