"""Expression/model language: lexer, parser, AST shape, renderer round-trip."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thingtwin import (
    Behavior,
    BinOp,
    Call,
    Const,
    Constraint,
    GlobalParam,
    Guess,
    InputRef,
    InputTypeAgg,
    LocalParam,
    ModelSyntaxError,
    Neg,
    SelfRef,
    ValueRef,
    parse_expression,
    parse_model,
    render_expr,
    render_model,
    walk,
)


# --- parsing: exact AST shapes ------------------------------------------------

def test_constant_and_precedence():
    e = parse_expression("1 + 2 * 3")
    assert e == BinOp("+", Const(1.0), BinOp("*", Const(2.0), Const(3.0)))


def test_left_associativity():
    assert parse_expression("1 - 2 - 3") == BinOp(
        "-", BinOp("-", Const(1.0), Const(2.0)), Const(3.0))
    assert parse_expression("8 / 4 / 2") == BinOp(
        "/", BinOp("/", Const(8.0), Const(4.0)), Const(2.0))


def test_parentheses_override_precedence():
    e = parse_expression("(1 + 2) * 3")
    assert e == BinOp("*", BinOp("+", Const(1.0), Const(2.0)), Const(3.0))


def test_unary_minus_binds_tighter_than_mul():
    assert parse_expression("-2 * 3") == BinOp("*", Neg(Const(2.0)), Const(3.0))
    assert parse_expression("-(2 * 3)") == Neg(BinOp("*", Const(2.0), Const(3.0)))
    assert parse_expression("--1") == Neg(Neg(Const(1.0)))


def test_number_formats():
    assert parse_expression("0.5") == Const(0.5)
    assert parse_expression(".5") == Const(0.5)
    assert parse_expression("2.") == Const(2.0)
    assert parse_expression("1e3") == Const(1000.0)
    assert parse_expression("1.5E-2") == Const(0.015)


def test_named_references():
    assert parse_expression("self") == SelfRef()
    assert parse_expression("value()") == ValueRef()
    assert parse_expression("input(temp1)") == InputRef("temp1")
    assert parse_expression("params[0]") == LocalParam(0)
    assert parse_expression("global[12]") == GlobalParam(12)


def test_sum_aggregator_and_tag_canonicalization():
    assert parse_expression("sum(inputType(@heatPower))") == InputTypeAgg(
        "sum", "@heatPower")
    # a bare tag name is canonicalized to the @-form
    assert parse_expression("sum(inputType(heatPower))") == InputTypeAgg(
        "sum", "@heatPower")


def test_calls_and_math_prefix():
    assert parse_expression("cos(self)") == Call("cos", (SelfRef(),))
    assert parse_expression("math.cos(self)") == Call("cos", (SelfRef(),))
    e = parse_expression("max(0, min(round(value()), 9))")
    assert e == Call("max", (Const(0.0),
                             Call("min", (Call("round", (ValueRef(),)),
                                          Const(9.0)))))


def test_call_arity_enforced():
    with pytest.raises(ModelSyntaxError):
        parse_expression("max(1)")
    with pytest.raises(ModelSyntaxError):
        parse_expression("cos(1, 2)")
    assert parse_expression("max(1, 2, 3)") == Call(
        "max", (Const(1.0), Const(2.0), Const(3.0)))


def test_unknown_identifier():
    with pytest.raises(ModelSyntaxError) as exc:
        parse_expression("foo(1)")
    assert exc.value.code == "UnknownIdentifier"
    with pytest.raises(ModelSyntaxError):
        parse_expression("math.tanh(1)")


def test_input_type_outside_aggregator_rejected():
    with pytest.raises(ModelSyntaxError):
        parse_expression("inputType(@x)")


def test_indices_must_be_non_negative_integers():
    with pytest.raises(ModelSyntaxError):
        parse_expression("params[1.5]")
    with pytest.raises(ModelSyntaxError) as exc:
        parse_expression("params[-1]")
    assert exc.value.code == "NegativeIndex"


def test_error_position_is_reported():
    with pytest.raises(ModelSyntaxError) as exc:
        parse_expression("1 + $")
    assert exc.value.position == 5


def test_trailing_garbage_rejected():
    with pytest.raises(ModelSyntaxError):
        parse_expression("1 + 2 3")


# --- full model strings -------------------------------------------------------

def test_model_segments():
    m = parse_model("dot(self) = params[0] * (global[2] - self)"
                    " | params[0] >= 0.0, global[2] <= 30.0"
                    " | params[0] = 0.001, global[2] = 15.0")
    assert m.behavior is Behavior.DIFFERENTIAL
    assert m.constraints == (Constraint("local", 0, "lower", 0.0),
                             Constraint("global", 2, "upper", 30.0))
    assert m.guesses == (Guess("local", 0, 0.001), Guess("global", 2, 15.0))
    assert m.local_param_count == 1
    assert m.local_guesses() == {0: 0.001}
    assert m.global_guesses() == {2: 15.0}


def test_model_lhs_variants():
    assert parse_model("self = value()").behavior is Behavior.ALGEBRAIC
    assert parse_model("dot(self) = value()").behavior is Behavior.DIFFERENTIAL
    # a bare expression (the usual input-transform shape) is algebraic
    assert parse_model("params[0] * self").behavior is Behavior.ALGEBRAIC


def test_local_param_count_includes_constraint_and_guess_indices():
    m = parse_model("params[0] * self | params[2] >= 0.0 | params[4] = 1.0")
    assert m.local_param_count == 5


def test_empty_constraint_segment_allowed():
    m = parse_model("self = value() | | params[0] = 1.0")
    assert m.constraints == ()
    assert m.guesses == (Guess("local", 0, 1.0),)


def test_signed_guesses_and_bounds():
    m = parse_model("self = params[0] | params[0] >= -2.5 | params[0] = -1.0")
    assert m.constraints[0].value == -2.5
    assert m.guesses[0].value == -1.0


def test_guess_outside_declared_bounds_rejected():
    with pytest.raises(ModelSyntaxError) as exc:
        parse_model("self = params[0] | params[0] >= 0.0 | params[0] = -1.0")
    assert exc.value.code == "GuessOutsideBounds"


def test_too_many_segments_rejected():
    with pytest.raises(ModelSyntaxError):
        parse_model("self = 1 | | params[0] = 1 | params[0] = 2")


def test_constraints_require_inequalities():
    with pytest.raises(ModelSyntaxError):
        parse_model("self = 1 | params[0] = 3")


def test_walk_visits_depth_first_left_to_right():
    e = parse_expression("params[0] * self + cos(value())")
    kinds = [type(n).__name__ for n in walk(e)]
    assert kinds == ["BinOp", "BinOp", "LocalParam", "SelfRef", "Call",
                     "ValueRef"]


# --- renderer round-trip (structural identity) ---------------------------------

def _exprs(max_depth: int = 4):
    leaves = st.one_of(
        st.floats(min_value=0.0, max_value=1e6, allow_nan=False,
                  allow_infinity=False).map(Const),
        st.integers(min_value=0, max_value=31).map(LocalParam),
        st.integers(min_value=0, max_value=31).map(GlobalParam),
        st.just(SelfRef()),
        st.just(ValueRef()),
        st.sampled_from(["temp1", "heaterPower", "vbX", "a_b_c"]).map(InputRef),
        st.sampled_from(["@heatPower", "@flow"]).map(
            lambda tag: InputTypeAgg("sum", tag)),
    )

    def extend(children):
        unary = st.builds(Neg, children)
        binop = st.builds(BinOp, st.sampled_from(["+", "-", "*", "/"]),
                          children, children)
        one_arg = st.builds(
            lambda fn, a: Call(fn, (a,)),
            st.sampled_from(["round", "cos", "sin", "abs"]), children)
        many_arg = st.builds(
            lambda fn, args: Call(fn, tuple(args)),
            st.sampled_from(["max", "min"]),
            st.lists(children, min_size=2, max_size=4))
        return st.one_of(unary, binop, one_arg, many_arg)

    return st.recursive(leaves, extend, max_leaves=25)


@settings(max_examples=200, deadline=None)
@given(_exprs())
def test_expression_render_parse_round_trip(expr):
    assert parse_expression(render_expr(expr)) == expr


_targets = st.tuples(st.sampled_from(["local", "global"]),
                     st.integers(min_value=0, max_value=9))
_numbers = st.floats(min_value=-1e6, max_value=1e6,
                     allow_nan=False, allow_infinity=False)


@st.composite
def _models(draw):
    behavior = draw(st.sampled_from(list(Behavior)))
    expr = draw(_exprs())
    constrained = draw(st.dictionaries(_targets, st.booleans(), max_size=4))
    constraints = []
    bounds = {}
    for (scope, index), is_lower in constrained.items():
        value = draw(_numbers)
        kind = "lower" if is_lower else "upper"
        constraints.append(Constraint(scope, index, kind, value))
        bounds[(scope, index)] = (value, float("inf")) if is_lower \
            else (float("-inf"), value)
    guesses = []
    for scope, index in draw(st.sets(_targets, max_size=4)):
        lo, hi = bounds.get((scope, index), (float("-inf"), float("inf")))
        value = draw(_numbers.filter(lambda v: lo <= v <= hi))
        guesses.append(Guess(scope, index, value))
    return behavior, expr, tuple(constraints), tuple(guesses)


@settings(max_examples=150, deadline=None)
@given(_models())
def test_model_render_parse_round_trip(model):
    behavior, expr, constraints, guesses = model
    from thingtwin.expr import ModelSpec, _local_param_count
    spec = ModelSpec(
        behavior=behavior,
        expr=expr,
        local_param_count=_local_param_count(expr, constraints, guesses),
        constraints=constraints,
        guesses=guesses,
    )
    assert parse_model(render_model(spec)) == spec


def test_render_preserves_grouping_of_right_children():
    # (1 - (2 - 3)) must not collapse to 1 - 2 - 3
    e = BinOp("-", Const(1.0), BinOp("-", Const(2.0), Const(3.0)))
    assert parse_expression(render_expr(e)) == e
    e2 = BinOp("/", Const(8.0), BinOp("*", Const(2.0), Const(2.0)))
    assert parse_expression(render_expr(e2)) == e2


def test_render_negation_of_binary_operand():
    e = Neg(BinOp("+", Const(1.0), Const(2.0)))
    assert parse_expression(render_expr(e)) == e
