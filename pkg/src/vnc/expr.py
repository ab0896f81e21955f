"""Minimal arithmetic expressions for system definition files.

Grammar: numeric literals, symbols, ``+ - * /``, unary minus, ``**`` or
``^`` for powers, ``pow(a, b)``, ``sin``, ``cos`` and the constant ``pi``.
Python's own parser does the tokenizing; the resulting tree is translated
into a closed set of node types that can be evaluated, differentiated
symbolically and compiled to plain Python functions.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Sequence, Union

from .errors import ConfigError

CONSTANTS = {"pi": math.pi}
FUNCTIONS = {"sin": 1, "cos": 1, "pow": 2}


class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Num(Node):
    value: float


@dataclass(frozen=True)
class Sym(Node):
    name: str


@dataclass(frozen=True)
class Neg(Node):
    arg: Node


@dataclass(frozen=True)
class BinOp(Node):
    op: str  # one of + - * / **
    left: Node
    right: Node


@dataclass(frozen=True)
class Call(Node):
    func: str  # sin or cos
    arg: Node


ZERO = Num(0.0)
ONE = Num(1.0)

_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/", ast.Pow: "**"}


class ExpressionError(ConfigError):
    pass


def parse(text: Union[str, int, float], symbols: Sequence[str] = (), line=None, column=None) -> Node:
    """Parse ``text`` into a node tree, checking every symbol against ``symbols``.

    ``line``/``column`` locate the expression inside an enclosing document;
    error positions are reported relative to them.
    """
    if isinstance(text, bool):
        raise ExpressionError("expected a number or expression, got a boolean", line, column)
    if isinstance(text, (int, float)):
        return Num(float(text))
    if not isinstance(text, str):
        raise ExpressionError(f"expected a number or expression, got {type(text).__name__}",
                              line, column)
    stripped = text.strip()
    lead = len(text) - len(text.lstrip())
    # ``^`` must bind like ``**``; Python would parse it as a looser xor
    source = stripped.replace("^", "**")
    # source offset -> offset in ``stripped``
    offsets = []
    for i, ch in enumerate(stripped):
        offsets.extend([i, i] if ch == "^" else [i])
    offsets.append(len(stripped))

    def original_column(offset):
        return (column or 1) + lead + offsets[min(offset, len(offsets) - 1)]

    try:
        tree = ast.parse(source, mode="eval")
    except SyntaxError as err:
        raise ExpressionError(f"invalid expression {text!r}: {err.msg}", line,
                              original_column(max((err.offset or 1) - 1, 0))) from None
    allowed = set(symbols)

    def fail(node, msg):
        raise ExpressionError(f"{msg} in {text!r}", line,
                              original_column(getattr(node, "col_offset", 0)))

    def convert(node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                fail(node, f"unsupported literal {node.value!r}")
            return Num(float(node.value))
        if isinstance(node, ast.Name):
            if node.id in allowed:
                return Sym(node.id)
            if node.id in CONSTANTS:
                return Num(CONSTANTS[node.id])
            fail(node, f"unknown symbol {node.id!r}")
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return simplify(Neg(convert(node.operand)))
            if isinstance(node.op, ast.UAdd):
                return convert(node.operand)
            fail(node, "unsupported unary operator")
        if isinstance(node, ast.BinOp):
            op = _BINOPS.get(type(node.op))
            if op is None:
                fail(node, "unsupported operator")
            return BinOp(op, convert(node.left), convert(node.right))
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
                fail(node, "unsupported function")
            name = node.func.id
            if node.keywords or len(node.args) != FUNCTIONS[name]:
                fail(node, f"{name} takes {FUNCTIONS[name]} argument(s)")
            args = [convert(a) for a in node.args]
            if name == "pow":
                return BinOp("**", *args)
            return Call(name, args[0])
        fail(node, f"unsupported syntax {type(node).__name__}")

    return convert(tree.body)


def simplify(node: Node) -> Node:
    """Fold constants and drop neutral elements (one level, bottom-up callers)."""
    if isinstance(node, Neg):
        if isinstance(node.arg, Num):
            return Num(-node.arg.value)
        if isinstance(node.arg, Neg):
            return node.arg.arg
        return node
    if isinstance(node, BinOp):
        a, b, op = node.left, node.right, node.op
        if isinstance(a, Num) and isinstance(b, Num):
            return Num(evaluate(node, {}))
        if op == "+":
            if a == ZERO:
                return b
            if b == ZERO:
                return a
        elif op == "-":
            if b == ZERO:
                return a
            if a == ZERO:
                return simplify(Neg(b))
        elif op == "*":
            if a == ZERO or b == ZERO:
                return ZERO
            if a == ONE:
                return b
            if b == ONE:
                return a
        elif op == "/":
            if a == ZERO:
                return ZERO
            if b == ONE:
                return a
        elif op == "**":
            if b == ONE:
                return a
            if b == ZERO:
                return ONE
    return node


def derivative(node: Node, var: str) -> Node:
    """Symbolic partial derivative of ``node`` with respect to ``var``."""
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Sym):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        return simplify(Neg(derivative(node.arg, var)))
    if isinstance(node, Call):
        inner = derivative(node.arg, var)
        if inner == ZERO:
            return ZERO
        if node.func == "sin":
            outer = Call("cos", node.arg)
        else:
            outer = simplify(Neg(Call("sin", node.arg)))
        return _mul(outer, inner)
    a, b = node.left, node.right
    da, db = derivative(a, var), derivative(b, var)
    if node.op == "+":
        return simplify(BinOp("+", da, db))
    if node.op == "-":
        return simplify(BinOp("-", da, db))
    if node.op == "*":
        return simplify(BinOp("+", _mul(da, b), _mul(a, db)))
    if node.op == "/":
        # (da b - a db) / b^2
        num = simplify(BinOp("-", _mul(da, b), _mul(a, db)))
        return simplify(BinOp("/", num, BinOp("**", b, Num(2.0))))
    # power
    if db == ZERO:
        # d(a^c) = c a^(c-1) da
        if isinstance(b, Num):
            lowered = simplify(BinOp("**", a, Num(b.value - 1.0)))
        else:
            lowered = BinOp("**", a, BinOp("-", b, ONE))
        return _mul(_mul(b, lowered), da)
    raise ExpressionError("powers with a variable exponent cannot be differentiated")


def _mul(a: Node, b: Node) -> Node:
    return simplify(BinOp("*", a, b))


def free_symbols(node: Node) -> set[str]:
    if isinstance(node, Sym):
        return {node.name}
    if isinstance(node, (Neg, Call)):
        return free_symbols(node.arg)
    if isinstance(node, BinOp):
        return free_symbols(node.left) | free_symbols(node.right)
    return set()


def evaluate(node: Node, env: dict) -> float:
    """Tree-walking evaluation; total on finite inputs (division by zero gives inf/nan)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Sym):
        return float(env[node.name])
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Call):
        return getattr(math, node.func)(evaluate(node.arg, env))
    a, b = evaluate(node.left, env), evaluate(node.right, env)
    return _apply(node.op, a, b)


def _apply(op, a, b):
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return _div(a, b)
    return _pow(a, b)


def _div(a, b):
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)


def _pow(a, b):
    try:
        r = a ** b
    except (OverflowError, ZeroDivisionError):
        return math.inf
    return r if isinstance(r, float) else (math.nan if isinstance(r, complex) else float(r))


def to_source(node: Node) -> str:
    """Python source for ``node``, fully parenthesized."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.arg)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    a, b = to_source(node.left), to_source(node.right)
    if node.op == "/":
        return f"_div({a}, {b})"
    if node.op == "**":
        return f"_pow({a}, {b})"
    return f"({a} {node.op} {b})"


def compile_vector(nodes: Sequence[Node], args: Sequence[str], shape=None):
    """Compile expressions into ``f(*args) -> list[float]`` (or nested lists for ``shape``).

    The node types are closed, so the generated source can only contain
    arithmetic, the helper functions and the listed argument names.
    """
    for name in args:
        if not name.isidentifier():
            raise ExpressionError(f"invalid symbol name {name!r}")
    items = [to_source(n) for n in nodes]
    if shape is not None and len(shape) == 2:
        rows, cols = shape
        body = "[" + ", ".join(
            "[" + ", ".join(items[r * cols:(r + 1) * cols]) + "]" for r in range(rows)) + "]"
    else:
        body = "[" + ", ".join(items) + "]"
    src = f"lambda {', '.join(args)}: {body}"
    namespace = {"sin": math.sin, "cos": math.cos, "_div": _div, "_pow": _pow,
                 "__builtins__": {}}
    return eval(compile(src, "<expression>", "eval"), namespace)
