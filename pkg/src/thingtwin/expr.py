"""Behavioral-model expression language: lexer, parser, AST, renderer.

A model string has up to three segments separated by top-level ``|``::

    function | constraints | guesses

    function    := [ lhs '=' ] expr
    lhs         := 'self' | 'dot' '(' 'self' ')'
    constraints := [ constraint { ',' constraint } ]
    constraint  := target ('>=' | '<=') signed-number
    guesses     := [ guess { ',' guess } ]
    guess       := target '=' signed-number
    target      := ('params' | 'global') '[' integer ']'
    expr        := term { ('+' | '-') term }
    term        := unary { ('*' | '/') unary }
    unary       := '-' unary | primary
    primary     := number | 'self' | 'value' '(' ')' | 'input' '(' name ')'
                 | 'sum' '(' 'inputType' '(' tag ')' ')'
                 | target | [ 'math' '.' ] call '(' expr { ',' expr } ')'
                 | '(' expr ')'
    call        := 'max' | 'min' | 'round' | 'cos' | 'sin' | 'abs'

``self =`` marks an Algebraic model, ``dot(self) =`` a Differential one, and a
bare expression is Algebraic (the usual shape for modelInput transforms).
``max``/``min`` take two or more arguments; the rest take exactly one. The
``math.`` prefix on a call is accepted and normalized away. Tags may be
written ``@name`` or ``name`` and are canonicalized to ``@name``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union

from .errors import ModelSyntaxError

__all__ = [
    "Behavior", "Expr", "Const", "LocalParam", "GlobalParam", "SelfRef",
    "ValueRef", "InputRef", "InputTypeAgg", "Call", "BinOp", "Neg",
    "Constraint", "Guess", "ModelSpec", "parse_model", "parse_expression",
    "render_model", "render_expr", "walk",
]


class Behavior(Enum):
    ALGEBRAIC = "algebraic"
    DIFFERENTIAL = "differential"


# --- AST --------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class LocalParam:
    index: int


@dataclass(frozen=True)
class GlobalParam:
    index: int


@dataclass(frozen=True)
class SelfRef:
    pass


@dataclass(frozen=True)
class ValueRef:
    pass


@dataclass(frozen=True)
class InputRef:
    title: str


@dataclass(frozen=True)
class InputTypeAgg:
    aggregator: str
    type_tag: str  # canonical '@name'


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class BinOp:
    op: str  # '+', '-', '*', '/'
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


Expr = Union[Const, LocalParam, GlobalParam, SelfRef, ValueRef, InputRef,
             InputTypeAgg, Call, BinOp, Neg]

# arity: (min, max); None means unbounded
CALL_ARITY: dict[str, tuple[int, int | None]] = {
    "max": (2, None),
    "min": (2, None),
    "round": (1, 1),
    "cos": (1, 1),
    "sin": (1, 1),
    "abs": (1, 1),
}

_KEYWORDS = {"self", "value", "input", "inputType", "sum", "params", "global",
             "dot", "math"} | set(CALL_ARITY)


@dataclass(frozen=True)
class Constraint:
    scope: str  # 'local' | 'global'
    index: int
    kind: str  # 'lower' | 'upper'
    value: float


@dataclass(frozen=True)
class Guess:
    scope: str
    index: int
    value: float


@dataclass(frozen=True)
class ModelSpec:
    """Parsed behavioral model: one expression plus bound/guess metadata."""

    behavior: Behavior
    expr: Expr
    local_param_count: int
    constraints: tuple[Constraint, ...]
    guesses: tuple[Guess, ...]

    def local_guesses(self) -> dict[int, float]:
        return {g.index: g.value for g in self.guesses if g.scope == "local"}

    def global_guesses(self) -> dict[int, float]:
        return {g.index: g.value for g in self.guesses if g.scope == "global"}


def walk(e: Expr) -> Iterator[Expr]:
    """Yield ``e`` and all of its descendants, depth-first left-to-right."""
    yield e
    if isinstance(e, Call):
        for a in e.args:
            yield from walk(a)
    elif isinstance(e, BinOp):
        yield from walk(e.lhs)
        yield from walk(e.rhs)
    elif isinstance(e, Neg):
        yield from walk(e.arg)


# --- lexer ------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<tag>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>>=|<=|[()\[\],|+\-*/=.])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number' | 'ident' | 'tag' | op literal | 'eof'
    text: str
    pos: int  # 1-based column


def _lex(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if m is None:
            raise ModelSyntaxError(f"unexpected character {src[i]!r}", position=i + 1)
        kind = m.lastgroup
        if kind != "ws":
            text = m.group()
            if kind == "op":
                kind = text
            tokens.append(_Token(kind, text, i + 1))
        i = m.end()
    tokens.append(_Token("eof", "", len(src) + 1))
    return tokens


# --- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def cur(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        if self.cur.kind != kind:
            raise ModelSyntaxError(
                f"expected {kind!r}, found {self.cur.text or 'end of input'!r}",
                position=self.cur.pos)
        return self.advance()

    def at_ident(self, name: str) -> bool:
        return self.cur.kind == "ident" and self.cur.text == name

    # expression grammar

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.cur.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_unary()
        while self.cur.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expr:
        if self.cur.kind == "-":
            self.advance()
            return Neg(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        tok = self.cur
        if tok.kind == "number":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        if tok.kind == "ident":
            return self.parse_named()
        raise ModelSyntaxError(
            f"expected an expression, found {tok.text or 'end of input'!r}",
            position=tok.pos)

    def parse_named(self) -> Expr:
        tok = self.advance()
        name = tok.text
        if name == "self":
            return SelfRef()
        if name == "value":
            self.expect("(")
            self.expect(")")
            return ValueRef()
        if name == "input":
            self.expect("(")
            title = self.expect("ident").text
            self.expect(")")
            return InputRef(title)
        if name == "sum":
            self.expect("(")
            if not self.at_ident("inputType"):
                raise ModelSyntaxError(
                    "sum() takes an inputType(...) argument",
                    position=self.cur.pos)
            self.advance()
            self.expect("(")
            tag = self.parse_tag()
            self.expect(")")
            self.expect(")")
            return InputTypeAgg("sum", tag)
        if name == "inputType":
            raise ModelSyntaxError(
                "inputType(...) is only valid inside an aggregator such as sum()",
                position=tok.pos)
        if name in ("params", "global"):
            index = self.parse_index()
            cls = LocalParam if name == "params" else GlobalParam
            return cls(index)
        if name == "math":
            self.expect(".")
            fn_tok = self.expect("ident")
            if fn_tok.text not in CALL_ARITY:
                raise ModelSyntaxError(
                    f"unknown function 'math.{fn_tok.text}'",
                    position=fn_tok.pos, code="UnknownIdentifier")
            return self.parse_call(fn_tok.text)
        if name in CALL_ARITY:
            return self.parse_call(name)
        raise ModelSyntaxError(
            f"unknown identifier {name!r}", position=tok.pos,
            code="UnknownIdentifier")

    def parse_call(self, fn: str) -> Expr:
        self.expect("(")
        args = [self.parse_expr()]
        while self.cur.kind == ",":
            self.advance()
            args.append(self.parse_expr())
        closing = self.expect(")")
        lo, hi = CALL_ARITY[fn]
        if len(args) < lo or (hi is not None and len(args) > hi):
            wanted = f"exactly {lo}" if hi == lo else f"at least {lo}"
            raise ModelSyntaxError(
                f"{fn}() takes {wanted} argument(s), got {len(args)}",
                position=closing.pos)
        return Call(fn, tuple(args))

    def parse_tag(self) -> str:
        tok = self.cur
        if tok.kind == "tag":
            self.advance()
            return tok.text
        if tok.kind == "ident":
            self.advance()
            return "@" + tok.text
        raise ModelSyntaxError(
            f"expected a type tag, found {tok.text or 'end of input'!r}",
            position=tok.pos)

    def parse_index(self) -> int:
        self.expect("[")
        negative = False
        if self.cur.kind == "-":
            self.advance()
            negative = True
        tok = self.expect("number")
        if any(c in tok.text for c in ".eE"):
            raise ModelSyntaxError(
                f"parameter index must be an integer, found {tok.text!r}",
                position=tok.pos)
        if negative:
            raise ModelSyntaxError(
                f"parameter index must be non-negative, found -{tok.text}",
                position=tok.pos, code="NegativeIndex")
        self.expect("]")
        return int(tok.text)

    # constraint / guess segments

    def parse_target(self) -> tuple[str, int]:
        tok = self.expect("ident")
        if tok.text == "params":
            return "local", self.parse_index()
        if tok.text == "global":
            return "global", self.parse_index()
        raise ModelSyntaxError(
            f"expected 'params[i]' or 'global[i]', found {tok.text!r}",
            position=tok.pos)

    def parse_signed_number(self) -> float:
        sign = 1.0
        if self.cur.kind in ("-", "+"):
            sign = -1.0 if self.cur.kind == "-" else 1.0
            self.advance()
        tok = self.expect("number")
        return sign * float(tok.text)

    def parse_constraints(self) -> tuple[Constraint, ...]:
        out: list[Constraint] = []
        if self.cur.kind in ("eof", "|"):
            return tuple(out)
        while True:
            scope, index = self.parse_target()
            if self.cur.kind not in (">=", "<="):
                raise ModelSyntaxError(
                    "constraints must use '>=' or '<='",
                    position=self.cur.pos)
            kind = "lower" if self.advance().kind == ">=" else "upper"
            out.append(Constraint(scope, index, kind, self.parse_signed_number()))
            if self.cur.kind != ",":
                break
            self.advance()
        return tuple(out)

    def parse_guesses(self) -> tuple[Guess, ...]:
        out: list[Guess] = []
        if self.cur.kind == "eof":
            return tuple(out)
        while True:
            scope, index = self.parse_target()
            self.expect("=")
            out.append(Guess(scope, index, self.parse_signed_number()))
            if self.cur.kind != ",":
                break
            self.advance()
        return tuple(out)


def _split_segments(tokens: list[_Token]) -> list[list[_Token]]:
    eof = tokens[-1]
    segments: list[list[_Token]] = [[]]
    for tok in tokens[:-1]:
        if tok.kind == "|":
            segments.append([])
        else:
            segments[-1].append(tok)
    if len(segments) > 3:
        extra = segments[3]
        pos = extra[0].pos if extra else eof.pos
        raise ModelSyntaxError(
            "a model has at most three '|'-separated segments "
            "(function | constraints | guesses)", position=pos)
    for seg in segments:
        seg.append(eof)
    return segments


def _parse_function_segment(tokens: list[_Token]) -> tuple[Behavior, Expr]:
    def peek(i: int) -> _Token:
        return tokens[i] if i < len(tokens) else tokens[-1]

    p = _Parser(tokens)
    behavior = Behavior.ALGEBRAIC
    first = peek(0)
    if first.kind == "ident" and first.text == "self" and peek(1).kind == "=":
        p.advance()
        p.advance()
    elif (first.kind == "ident" and first.text == "dot"
          and peek(1).kind == "(" and peek(2).kind == "ident"
          and peek(2).text == "self" and peek(3).kind == ")"
          and peek(4).kind == "="):
        for _ in range(5):
            p.advance()
        behavior = Behavior.DIFFERENTIAL
    expr = p.parse_expr()
    if p.cur.kind != "eof":
        raise ModelSyntaxError(
            f"unexpected {p.cur.text!r} after expression", position=p.cur.pos)
    return behavior, expr


def _local_param_count(expr: Expr, constraints: tuple[Constraint, ...],
                       guesses: tuple[Guess, ...]) -> int:
    indices = [n.index for n in walk(expr) if isinstance(n, LocalParam)]
    indices += [c.index for c in constraints if c.scope == "local"]
    indices += [g.index for g in guesses if g.scope == "local"]
    return 1 + max(indices) if indices else 0


def _check_guesses_in_bounds(constraints: tuple[Constraint, ...],
                             guesses: tuple[Guess, ...]) -> None:
    bounds: dict[tuple[str, int], list[float]] = {}
    for c in constraints:
        lo_hi = bounds.setdefault((c.scope, c.index), [float("-inf"), float("inf")])
        if c.kind == "lower":
            lo_hi[0] = max(lo_hi[0], c.value)
        else:
            lo_hi[1] = min(lo_hi[1], c.value)
    for g in guesses:
        lo, hi = bounds.get((g.scope, g.index), (float("-inf"), float("inf")))
        if not (lo <= g.value <= hi):
            name = "params" if g.scope == "local" else "global"
            raise ModelSyntaxError(
                f"guess {name}[{g.index}] = {g.value} violates its "
                f"constraints [{lo}, {hi}]", position=1,
                code="GuessOutsideBounds")


def parse_expression(src: str) -> Expr:
    """Parse a bare expression (no segments, no LHS)."""
    p = _Parser(_lex(src))
    expr = p.parse_expr()
    if p.cur.kind != "eof":
        raise ModelSyntaxError(
            f"unexpected {p.cur.text!r} after expression", position=p.cur.pos)
    return expr


def parse_model(src: str) -> ModelSpec:
    """Parse a full model string into a :class:`ModelSpec`.

    Raises :class:`ModelSyntaxError` with codes ``Syntax``,
    ``UnknownIdentifier``, ``NegativeIndex`` or ``GuessOutsideBounds``.
    """
    segments = _split_segments(_lex(src))
    behavior, expr = _parse_function_segment(segments[0])
    constraints: tuple[Constraint, ...] = ()
    guesses: tuple[Guess, ...] = ()
    if len(segments) >= 2:
        p = _Parser(segments[1])
        constraints = p.parse_constraints()
        if p.cur.kind != "eof":
            raise ModelSyntaxError(
                f"unexpected {p.cur.text!r} in constraint segment",
                position=p.cur.pos)
    if len(segments) == 3:
        p = _Parser(segments[2])
        guesses = p.parse_guesses()
        if p.cur.kind != "eof":
            raise ModelSyntaxError(
                f"unexpected {p.cur.text!r} in guess segment",
                position=p.cur.pos)
    _check_guesses_in_bounds(constraints, guesses)
    return ModelSpec(
        behavior=behavior,
        expr=expr,
        local_param_count=_local_param_count(expr, constraints, guesses),
        constraints=constraints,
        guesses=guesses,
    )


# --- renderer ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt(v: float) -> str:
    return repr(float(v))


def render_expr(e: Expr) -> str:
    """Render an expression; ``parse_expression(render_expr(e))`` equals ``e``."""
    return _render(e, 0)


def _render(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Const):
        return _fmt(e.value)
    if isinstance(e, LocalParam):
        return f"params[{e.index}]"
    if isinstance(e, GlobalParam):
        return f"global[{e.index}]"
    if isinstance(e, SelfRef):
        return "self"
    if isinstance(e, ValueRef):
        return "value()"
    if isinstance(e, InputRef):
        return f"input({e.title})"
    if isinstance(e, InputTypeAgg):
        return f"{e.aggregator}(inputType({e.type_tag}))"
    if isinstance(e, Call):
        args = ", ".join(_render(a, 0) for a in e.args)
        return f"{e.fn}({args})"
    if isinstance(e, Neg):
        # bind tighter than * and /; parenthesize any binary operand
        inner = _render(e.arg, 3)
        return f"-{inner}"
    if isinstance(e, BinOp):
        prec = _PREC[e.op]
        lhs = _render(e.lhs, prec)
        # the parser is left-associative, so a same-precedence right child
        # must keep its parentheses to round-trip structurally
        rhs = _render(e.rhs, prec + 1)
        text = f"{lhs} {e.op} {rhs}"
        if prec < parent_prec:
            return f"({text})"
        return text
    raise TypeError(f"not an expression node: {e!r}")


def render_model(m: ModelSpec) -> str:
    """Render a ModelSpec; ``parse_model(render_model(m))`` equals ``m``."""
    lhs = "self" if m.behavior is Behavior.ALGEBRAIC else "dot(self)"
    parts = [f"{lhs} = {render_expr(m.expr)}"]
    scope_name = {"local": "params", "global": "global"}
    ops = {"lower": ">=", "upper": "<="}
    if m.constraints or m.guesses:
        parts.append(", ".join(
            f"{scope_name[c.scope]}[{c.index}] {ops[c.kind]} {_fmt(c.value)}"
            for c in m.constraints))
    if m.guesses:
        parts.append(", ".join(
            f"{scope_name[g.scope]}[{g.index}] = {_fmt(g.value)}"
            for g in m.guesses))
    return " | ".join(parts)
