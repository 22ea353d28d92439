"""Single-variable expression language for real maps.

Grammar (recursive descent, one variable ``x``):

    expr    := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := '-' factor | primary ('^' factor)?
    primary := NUMBER | 'x' | '(' expr ')' | FUNC '(' expr ')'
    FUNC    := 'exp' | 'log' | 'sin' | 'cos' | 'abs' | 'sqrt'

NUMBER is a decimal with optional fraction and exponent. '^' is
right-associative and unary minus binds looser than '^', so ``-x^2``
means ``-(x^2)``. Syntax errors carry a 1-based character position.

Evaluation is total on the declared domain: poles, log/sqrt domain
faults, and overflow raise :class:`EvaluationError` instead of letting
NaN or infinity propagate.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import (
    EvaluationError,
    ExpressionSyntaxError,
    UnknownIdentifierError,
)

FUNCTIONS = ("exp", "log", "sin", "cos", "abs", "sqrt")

_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Neg, BinOp, Call]


# --- tokenizer -------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # "num" | "ident" | an operator/paren char | "eof"
    text: str
    pos: int  # 1-based


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        pos = i + 1
        if ch.isdigit():
            m = _NUMBER_RE.match(text, i)
            tokens.append(_Token("num", m.group(), pos))
            i = m.end()
        elif ch.isalpha() or ch == "_":
            m = _IDENT_RE.match(text, i)
            tokens.append(_Token("ident", m.group(), pos))
            i = m.end()
        elif ch in "+-*/^()":
            tokens.append(_Token(ch, ch, pos))
            i += 1
        else:
            raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(_Token("eof", "", n + 1))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            what = tok.text or "end of input"
            raise ExpressionSyntaxError(f"expected {kind!r}, found {what!r}", tok.pos)
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ExpressionSyntaxError(f"unexpected {tok.text!r}", tok.pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        if self.peek().kind == "-":
            self.advance()
            return Neg(self.factor())
        node = self.primary()
        if self.peek().kind == "^":
            self.advance()
            return BinOp("^", node, self.factor())
        return node

    def primary(self) -> Node:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text == "x":
                return Var()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.pos)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        what = tok.text or "end of input"
        raise ExpressionSyntaxError(f"expected a value, found {what!r}", tok.pos)


def parse_expression(text: str) -> Node:
    """Parse expression text to an AST; raises ExpressionSyntaxError with position."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 1)
    return _Parser(_tokenize(text)).parse()


# --- printing --------------------------------------------------------------

# Precedence levels used when re-printing with minimal parentheses.
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, (Num, Var, Call)):
        return _PREC_ATOM
    if isinstance(node, Neg):
        return _PREC_NEG
    return {"+": _PREC_ADD, "-": _PREC_ADD, "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[node.op]


def _wrap(text: str, need: bool) -> str:
    return f"({text})" if need else text


def unparse(node: Node) -> str:
    """Render an AST back to source; reparsing yields an equal AST.

    Exact for parser-produced trees (which never contain negative Num
    literals; unary minus is a Neg node).
    """
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.func}({unparse(node.arg)})"
    if isinstance(node, Neg):
        child = unparse(node.operand)
        return "-" + _wrap(child, _prec(node.operand) < _PREC_NEG)
    left, right = node.left, node.right
    if node.op in ("+", "-"):
        lt = _wrap(unparse(left), _prec(left) < _PREC_ADD)
        rt = _wrap(unparse(right), _prec(right) <= _PREC_ADD)
    elif node.op in ("*", "/"):
        lt = _wrap(unparse(left), _prec(left) < _PREC_MUL)
        rt = _wrap(unparse(right), _prec(right) <= _PREC_MUL)
    else:  # '^': left must be a primary, right is a factor (right-associative)
        lt = _wrap(unparse(left), _prec(left) < _PREC_ATOM)
        rt = _wrap(unparse(right), _prec(right) < _PREC_NEG)
    return f"{lt}{node.op}{rt}"


# --- evaluation ------------------------------------------------------------

def eval_node(node: Node, x: float) -> float:
    """Evaluate at a scalar point with precise domain-fault errors."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -eval_node(node.operand, x)
    if isinstance(node, Call):
        arg = eval_node(node.arg, x)
        try:
            if node.func == "log":
                if arg <= 0.0:
                    raise EvaluationError("log of a nonpositive value", x)
                return math.log(arg)
            if node.func == "sqrt":
                if arg < 0.0:
                    raise EvaluationError("sqrt of a negative value", x)
                return math.sqrt(arg)
            if node.func == "exp":
                return math.exp(arg)
            if node.func == "abs":
                return abs(arg)
            return math.sin(arg) if node.func == "sin" else math.cos(arg)
        except OverflowError:
            raise EvaluationError(f"{node.func} overflow", x) from None
    left = eval_node(node.left, x)
    if node.op == "^":
        right = eval_node(node.right, x)
        try:
            out = math.pow(left, right)
        except (ValueError, OverflowError):
            raise EvaluationError(f"invalid power {left!r} ^ {right!r}", x) from None
    else:
        right = eval_node(node.right, x)
        if node.op == "+":
            out = left + right
        elif node.op == "-":
            out = left - right
        elif node.op == "*":
            out = left * right
        else:
            if right == 0.0:
                raise EvaluationError("division by zero", x)
            out = left / right
    if not math.isfinite(out):
        raise EvaluationError("evaluation overflowed", x)
    return out


def _eval_array(node: Node, xs: np.ndarray) -> np.ndarray:
    if isinstance(node, Num):
        return np.full_like(xs, node.value)
    if isinstance(node, Var):
        return xs
    if isinstance(node, Neg):
        return -_eval_array(node.operand, xs)
    if isinstance(node, Call):
        arg = _eval_array(node.arg, xs)
        fn = {"exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos,
              "abs": np.abs, "sqrt": np.sqrt}[node.func]
        return fn(arg)
    left = _eval_array(node.left, xs)
    right = _eval_array(node.right, xs)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    return np.power(left, right)


def eval_array(node: Node, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over an array of points.

    Any non-finite output is traced back to its first offending point and
    re-evaluated scalar-wise to raise the precise EvaluationError. An
    intermediate overflow that cancels to a finite value (e.g. exp(-exp(big)))
    is tolerated here but rejected by scalar eval.
    """
    xs = np.asarray(xs, dtype=float)
    with np.errstate(all="ignore"):
        out = _eval_array(node, xs)
    bad = ~np.isfinite(out)
    if bad.any():
        x_bad = float(xs[np.argmax(bad)])
        eval_node(node, x_bad)  # raises with the offending point
        raise EvaluationError("non-finite result", x_bad)
    return out
