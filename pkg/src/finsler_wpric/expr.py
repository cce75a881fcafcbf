"""Arithmetic expressions over chart variables x1..xn and tangent variables y1..yn.

Grammar (``^`` binds tighter than unary minus, and is right-associative)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Union

import numpy as np

from .errors import ExprSyntaxError, FinslerError, SingularEvaluation
from .jets import JET_FUNCTIONS, MultiJet, jet_pow

FUNCTIONS = ("sqrt", "exp", "ln", "sin", "cos")
_VAR_RE = re.compile(r"[xy][1-9][0-9]*\Z")


class Expr:
    """Base class of AST nodes."""

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return frozenset()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return frozenset([self.name])


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    operand: Expr

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return self.operand.free_vars


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return self.left.free_vars | self.right.free_vars


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    arg: Expr

    @cached_property
    def free_vars(self) -> frozenset[str]:
        return self.arg.free_vars


def Add(a, b):
    return BinOp("+", a, b)


def Sub(a, b):
    return BinOp("-", a, b)


def Mul(a, b):
    return BinOp("*", a, b)


def Div(a, b):
    return BinOp("/", a, b)


def Pow(a, b):
    return BinOp("^", a, b)


# -- tokenizer / parser ---------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text.encode("utf-8"))))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def offset(self, tok) -> int:
        # byte offset of the token start
        return len(self.text[: tok[2]].encode("utf-8")) if tok[0] != "end" else tok[2]

    def expect(self, op: str):
        tok = self.advance()
        if tok[0] != "op" or tok[1] != op:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ExprSyntaxError(f"expected {op!r}, found {found}", self.offset(tok))
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", self.offset(tok))
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.advance()
        kind, text = tok[0], tok[1]
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                nxt = self.peek()
                if nxt[0] == "op" and nxt[1] == ",":
                    raise ExprSyntaxError(f"{text} takes exactly one argument", self.offset(nxt))
                self.expect(")")
                return Call(text, arg)
            if _VAR_RE.match(text):
                return Var(text)
            raise ExprSyntaxError(f"unknown identifier {text!r}", self.offset(tok))
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", self.offset(tok))


def parse(text: str) -> Expr:
    return _Parser(text).parse()


def to_text(e: Expr) -> str:
    """Print with enough parentheses that ``parse(to_text(e)) == e``."""
    if isinstance(e, Num):
        v = e.value
        if v < 0 or not math.isfinite(v):
            raise ValueError(f"literal {v} cannot be printed as a literal")
        return repr(float(v))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"-({to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)}) {e.op} ({to_text(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}({to_text(e.arg)})"
    raise TypeError(f"not an expression: {e!r}")


# -- evaluation ---------------------------------------------------------------

Value = Union[float, np.ndarray, MultiJet]


class UnboundVariable(FinslerError):
    pass


def _real_function(name: str, v):
    arr = np.asarray(v, dtype=float)
    if name in ("sqrt", "ln"):
        if np.any(~(arr > 0)) and not (name == "sqrt" and np.all(arr >= 0)):
            bad = arr[~(arr > 0)].ravel()[0] if arr.ndim else float(arr)
            raise SingularEvaluation(f"{name} of non-positive value {bad:.17g}", value=float(bad))
        return np.sqrt(v) if name == "sqrt" else np.log(v)
    return {"exp": np.exp, "sin": np.sin, "cos": np.cos}[name](v)


def _constant_exponent(e: Expr) -> float:
    if e.free_vars:
        raise FinslerError(f"exponent {to_text(e)} must not depend on variables")
    return float(eval_expr(e, {}))


def _real_pow(base, p: float):
    if float(p).is_integer():
        k = int(p)
        if k < 0 and np.any(np.asarray(base) == 0):
            raise SingularEvaluation("negative power of zero", value=0.0)
        return np.asarray(base, dtype=float) ** k if k >= 0 else 1.0 / np.asarray(base, dtype=float) ** (-k)
    arr = np.asarray(base, dtype=float)
    if np.any(~(arr > 0)):
        bad = arr[~(arr > 0)].ravel()[0] if arr.ndim else float(arr)
        raise SingularEvaluation(f"pow of non-positive value {bad:.17g}", value=float(bad))
    return arr**p


def eval_expr(e: Expr, binding: Mapping[str, Value]) -> Value:
    """Evaluate by structural recursion; works on reals, arrays and MultiJets."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return binding[e.name]
        except KeyError:
            raise UnboundVariable(f"variable {e.name} is not bound") from None
    if isinstance(e, Neg):
        return -eval_expr(e.operand, binding)
    if isinstance(e, BinOp):
        if e.op == "^":
            p = _constant_exponent(e.right)
            base = eval_expr(e.left, binding)
            return jet_pow(base, p) if isinstance(base, MultiJet) else _real_pow(base, p)
        a = eval_expr(e.left, binding)
        b = eval_expr(e.right, binding)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if not isinstance(b, MultiJet) and np.any(np.asarray(b) == 0):
            raise SingularEvaluation("division by zero", value=0.0)
        return a / b
    if isinstance(e, Call):
        v = eval_expr(e.arg, binding)
        if isinstance(v, MultiJet):
            return JET_FUNCTIONS[e.func](v)
        return _real_function(e.func, v)
    raise TypeError(f"not an expression: {e!r}")


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, mapping))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, mapping), substitute(e.right, mapping))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, mapping))
    return e


def max_index(e: Expr, prefix: str) -> int:
    """Largest k with variable ``prefix + str(k)`` present (0 if none)."""
    ks = [int(v[1:]) for v in e.free_vars if v[0] == prefix]
    return max(ks, default=0)


def xy_binding(x, y=None) -> dict[str, Value]:
    binding: dict[str, Value] = {f"x{i + 1}": v for i, v in enumerate(x)}
    if y is not None:
        binding.update({f"y{i + 1}": v for i, v in enumerate(y)})
    return binding
