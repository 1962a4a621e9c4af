"""Arithmetic expressions in the free variable ``x``.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | 'x' | 'pi' | FUNC '(' expr ')' | '(' expr ')'

so ``-x^2`` is ``-(x^2)`` and ``2^-1`` is ``2^(-1)``.  Besides evaluation on
numpy arrays the tree can be differentiated symbolically and compiled to a
flat postfix program that the numba kernels interpret.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParseError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


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

X = Var()
ZERO = Num(0.0)
ONE = Num(1.0)


# ---------------------------------------------------------------- tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos), src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, pos: int):
        raise ParseError(message, _byte_offset(self.src, pos), self.src)

    def expect(self, text: str):
        kind, val, pos = self.take()
        if val != text:
            self.fail(f"expected {text!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> Node:
        if self.peek()[0] == "end":
            self.fail("empty expression", 0)
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            self.fail(f"unexpected token {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        val = self.peek()[1]
        if val == "-":
            self.take()
            return Neg(self.unary())
        if val == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val == "x":
                return X
            if val == "pi":
                return Num(math.pi)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            self.fail(f"unknown identifier {val!r}", pos)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"unexpected {val or 'end of input'!r}", pos)


def parse(src: str) -> Node:
    """Parse ``src`` into an expression tree.

    Raises
    ------
    ParseError
        With ``position`` set to the byte offset of the offending token.
    """
    return _Parser(src).parse()


# ---------------------------------------------------------------- serialize

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num_text(v: float) -> str:
    if v == math.pi:
        return "pi"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def serialize(node: Node) -> str:
    """Render ``node`` as source text that parses back to the same tree."""
    return _ser(node, 0)


def _ser(node: Node, ctx: int) -> str:
    # ctx: precedence level demanded by the parent (0 expr, 1 additive rhs,
    # 2 term, 3 multiplicative rhs / unary operand, 4 power base)
    if isinstance(node, Num):
        s = _num_text(node.value)
        # a literal in base position must not absorb a following exponent sign
        return f"({s})" if ctx >= 4 and node.value < 0 else s
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Call):
        return f"{node.func}({_ser(node.arg, 0)})"
    if isinstance(node, Neg):
        s = "-" + _ser(node.operand, 3)
        return f"({s})" if ctx >= 3 else s
    op = node.op
    if op == "^":
        s = f"{_ser(node.left, 4)}^{_ser(node.right, 3)}"
        return f"({s})" if ctx >= 4 else s
    p = _PREC[op]
    s = f"{_ser(node.left, 2 * p - 2)}{op}{_ser(node.right, 2 * p - 1)}"
    return f"({s})" if ctx > 2 * p - 2 else s


# ---------------------------------------------------------------- evaluate

_NP_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log, "sqrt": np.sqrt}


def evaluate(node: Node, x):
    """Evaluate on a scalar or array; non-finite values are left to the caller."""
    x = np.asarray(x, dtype=float)
    with np.errstate(all="ignore"):
        return _eval(node, x)


def _eval(node: Node, x):
    if isinstance(node, Num):
        return np.full_like(x, node.value)
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.operand, x)
    if isinstance(node, Call):
        return _NP_FUNCS[node.func](_eval(node.arg, x))
    a = _eval(node.left, x)
    if node.op == "^" and isinstance(node.right, Num):
        return np.power(a, node.right.value)
    b = _eval(node.right, x)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return np.power(a, b)


# ---------------------------------------------------------------- algebra

def is_const(node: Node) -> bool:
    if isinstance(node, Num):
        return True
    if isinstance(node, Var):
        return False
    if isinstance(node, Neg):
        return is_const(node.operand)
    if isinstance(node, Call):
        return is_const(node.arg)
    return is_const(node.left) and is_const(node.right)


def add(a: Node, b: Node) -> Node:
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return BinOp("+", a, b)


def sub(a: Node, b: Node) -> Node:
    if b == ZERO:
        return a
    if a == ZERO:
        return neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    return BinOp("-", a, b)


def mul(a: Node, b: Node) -> Node:
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return BinOp("*", a, b)


def div(a: Node, b: Node) -> Node:
    if a == ZERO:
        return ZERO
    if b == ONE:
        return a
    return BinOp("/", a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def power(a: Node, b: Node) -> Node:
    if b == ONE:
        return a
    if b == ZERO:
        return ONE
    return BinOp("^", a, b)


def derivative(node: Node) -> Node:
    """Exact symbolic d/dx with light constant folding."""
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Neg):
        return neg(derivative(node.operand))
    if isinstance(node, Call):
        u = node.arg
        du = derivative(u)
        if du == ZERO:
            return ZERO
        f = node.func
        if f == "sin":
            outer = Call("cos", u)
        elif f == "cos":
            outer = neg(Call("sin", u))
        elif f == "exp":
            outer = node
        elif f == "log":
            return div(du, u)
        else:  # sqrt
            return div(du, mul(Num(2.0), node))
        return mul(outer, du)
    a, b = node.left, node.right
    da, db = derivative(a), derivative(b)
    op = node.op
    if op == "+":
        return add(da, db)
    if op == "-":
        return sub(da, db)
    if op == "*":
        return add(mul(da, b), mul(a, db))
    if op == "/":
        if db == ZERO:
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, Num(2.0)))
    # power
    if db == ZERO:
        if da == ZERO:
            return ZERO
        if isinstance(b, Num):
            return mul(mul(b, power(a, Num(b.value - 1.0))), da)
        return mul(mul(b, power(a, sub(b, ONE))), da)
    # general u^v = exp(v log u)
    return mul(node, add(mul(db, Call("log", a)), div(mul(b, da), a)))


def substitute_x(node: Node, repl: Node) -> Node:
    if isinstance(node, Var):
        return repl
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        return Neg(substitute_x(node.operand, repl))
    if isinstance(node, Call):
        return Call(node.func, substitute_x(node.arg, repl))
    return BinOp(node.op, substitute_x(node.left, repl), substitute_x(node.right, repl))


# ---------------------------------------------------------------- bytecode

OP_CONST = 0
OP_X = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_POW = 6
OP_NEG = 7
OP_SIN = 8
OP_COS = 9
OP_EXP = 10
OP_LOG = 11
OP_SQRT = 12
OP_IPOW = 13  # integer power by repeated squaring, exponent in arg

_BIN_CODES = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}
_FUNC_CODES = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "log": OP_LOG, "sqrt": OP_SQRT}


def compile_program(node: Node) -> tuple[np.ndarray, np.ndarray]:
    """Flatten ``node`` to postfix ``(code, arg)`` arrays for the kernel VM."""
    code: list[int] = []
    arg: list[float] = []

    def emit(c: int, a: float = 0.0):
        code.append(c)
        arg.append(a)

    def walk(n: Node):
        if isinstance(n, Num):
            emit(OP_CONST, n.value)
        elif isinstance(n, Var):
            emit(OP_X)
        elif isinstance(n, Neg):
            walk(n.operand)
            emit(OP_NEG)
        elif isinstance(n, Call):
            walk(n.arg)
            emit(_FUNC_CODES[n.func])
        else:
            if (n.op == "^" and isinstance(n.right, Num) and n.right.value.is_integer()
                    and abs(n.right.value) <= 64):
                walk(n.left)
                emit(OP_IPOW, n.right.value)
                return
            walk(n.left)
            walk(n.right)
            emit(_BIN_CODES[n.op])

    walk(node)
    return np.asarray(code, dtype=np.int64), np.asarray(arg, dtype=np.float64)
