"""A tiny arithmetic language for user-supplied variance functions.

Grammar (``^`` binds tightest and is right-associative, then unary minus,
then ``* /``, then ``+ -``)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'mu' | ('exp' | 'log') '(' expr ')' | '(' expr ')'

The only variable is ``mu``.  ``print_expression`` emits a fully
parenthesised form so that ``parse(print_expression(ast)) == ast``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifierError

__all__ = [
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expr",
    "parse_vf_expression",
    "print_expression",
    "compile_expression",
    "evaluate",
]

FUNCTIONS = ("exp", "log")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str = "mu"


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    # offsets are byte offsets into the UTF-8 encoding of ``text``
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {text[pos]!r}", len(text[:pos].encode())
            )
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), len(text[:pos].encode())))
        pos = m.end()
    tokens.append(("end", "", len(text.encode())))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, offset = self.tok
        if text != value or kind == "end":
            raise ExpressionSyntaxError(f"expected {value!r}", offset)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, text, offset = self.tok
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, offset = self.tok
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "name":
            self.advance()
            if text == "mu":
                return Var()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifierError(f"unknown identifier {text!r}", offset)
        if kind == "op" and text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"unexpected {what}", offset)


def parse_vf_expression(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises
    ------
    ExpressionSyntaxError
        With the byte offset of the offending token.
    UnknownIdentifierError
        For names other than ``mu``, ``exp`` and ``log``.
    """
    return _Parser(text).parse()


def print_expression(node: Expr) -> str:
    if isinstance(node, Num):
        if node.value < 0 or not math.isfinite(node.value):
            raise ValueError("only finite non-negative literals are printable")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{print_expression(node.operand)})"
    if isinstance(node, BinOp):
        return f"({print_expression(node.left)} {node.op} {print_expression(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({print_expression(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _pow(a, b):
    try:
        r = a**b
    except ZeroDivisionError:
        raise DomainError(f"0 raised to negative power {b}") from None
    except OverflowError:
        raise DomainError(f"overflow in {a}^{b}") from None
    if isinstance(r, complex):
        raise DomainError(f"negative base {a} with non-integer exponent {b}")
    return r


def _div(a, b):
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _log(a):
    if a <= 0:
        raise DomainError(f"log of non-positive value {a}")
    return math.log(a)


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError(f"overflow in exp({a})") from None


_BINARY = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "^": _pow,
}
_CALLS = {"exp": _exp, "log": _log}


def compile_expression(node: Expr) -> Callable[[float], float]:
    """Turn an expression tree into a plain ``float -> float`` closure."""
    if isinstance(node, Num):
        value = float(node.value)
        return lambda mu: value
    if isinstance(node, Var):
        return lambda mu: mu
    if isinstance(node, Neg):
        inner = compile_expression(node.operand)
        return lambda mu: -inner(mu)
    if isinstance(node, BinOp):
        fn = _BINARY[node.op]
        left = compile_expression(node.left)
        right = compile_expression(node.right)
        return lambda mu: fn(left(mu), right(mu))
    if isinstance(node, Call):
        fn = _CALLS[node.func]
        arg = compile_expression(node.arg)
        return lambda mu: fn(arg(mu))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Expr, mu: float) -> float:
    return compile_expression(node)(float(mu))
