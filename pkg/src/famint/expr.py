"""A small arithmetic expression language with certified range evaluation.

Expressions are parsed with :mod:`ast` and compiled to a tree that can be
evaluated at a point, over an exact rational box, or over whole arrays of
boxes at once.  Variables are ``x, y, z`` (or ``x0, x1, ...``); constants
``pi`` and ``e``; functions ``min, max, abs, exp, sin, cos, sqrt`` and
``rat``, the indicator of the rationals.  ``^`` and ``**`` both mean power.
"""
from __future__ import annotations

import ast
import io
import math
import tokenize
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InvalidFunction, InvalidInput
from .interval import Interval, Real, VecInterval

_NAMED_VARS = {"x": 0, "y": 1, "z": 2}
_FUNCS = {"min": 2, "max": 2, "abs": 1, "exp": 1, "sin": 1, "cos": 1, "sqrt": 1, "rat": 1}
_CONSTS = {"pi": Real("pi"), "e": Real("e")}


@dataclass(frozen=True)
class Node:
    op: str
    args: tuple = ()
    value: object = None


def _var_index(name: str) -> int | None:
    if name in _NAMED_VARS:
        return _NAMED_VARS[name]
    if name.startswith("x") and name[1:].isdigit():
        return int(name[1:])
    return None


def _caret_to_pow(text: str) -> tuple[str, list[int]]:
    """Rewrite ``^`` as ``**`` so it binds like a power; also return the rewritten columns of each caret."""
    carets = []
    try:
        for tok in tokenize.generate_tokens(io.StringIO(text).readline):
            if tok.type == tokenize.OP and tok.string == "^":
                carets.append(tok.start[1])
    except (tokenize.TokenError, IndentationError):
        return text, []
    out, shifted, prev = [], [], 0
    for k, c in enumerate(carets):
        out.append(text[prev:c])
        out.append("**")
        shifted.append(c + k)
        prev = c + 1
    out.append(text[prev:])
    return "".join(out), shifted


def _convert(n: ast.AST, src: str, carets: Sequence[int] = ()) -> Node:
    col = getattr(n, "col_offset", 0)
    col -= sum(1 for c in carets if c < col)
    where = f"line {getattr(n, 'lineno', 1)}, column {col + 1}"
    if isinstance(n, ast.Expression):
        return _convert(n.body, src, carets)
    if isinstance(n, ast.Constant):
        if isinstance(n.value, bool) or not isinstance(n.value, (int, float)):
            raise InvalidInput(f"unsupported literal {n.value!r} at {where}")
        # read decimals exactly from their source text
        text = ast.get_source_segment(src, n) or repr(n.value)
        return Node("const", value=Fraction(text) if isinstance(n.value, float) else Fraction(n.value))
    if isinstance(n, ast.Name):
        idx = _var_index(n.id)
        if idx is not None:
            return Node("var", value=idx)
        if n.id in _CONSTS:
            return Node("real", value=_CONSTS[n.id])
        raise InvalidInput(f"unknown name {n.id!r} at {where}")
    if isinstance(n, ast.UnaryOp):
        if isinstance(n.op, ast.USub):
            return Node("neg", (_convert(n.operand, src, carets),))
        if isinstance(n.op, ast.UAdd):
            return _convert(n.operand, src, carets)
    if isinstance(n, ast.BinOp):
        left, right = _convert(n.left, src, carets), _convert(n.right, src, carets)
        if isinstance(n.op, ast.Pow):
            if right.op != "const" or right.value.denominator != 1 or right.value < 0:
                raise InvalidInput(f"exponent must be a non-negative integer literal at {where}")
            return Node("pow", (left,), int(right.value))
        ops = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}
        for k, name in ops.items():
            if isinstance(n.op, k):
                return Node(name, (left, right))
    if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id in _FUNCS:
        want = _FUNCS[n.func.id]
        if len(n.args) != want or n.keywords:
            raise InvalidInput(f"{n.func.id} takes {want} argument(s) at {where}")
        return Node(n.func.id, tuple(_convert(a, src, carets) for a in n.args))
    if isinstance(n, ast.Call) and isinstance(n.func, ast.Name):
        raise InvalidInput(f"unknown function {n.func.id!r} at {where}")
    raise InvalidInput(f"unsupported syntax {type(n).__name__} at {where}")


class Expression:
    """A parsed real-valued expression in ``dim`` variables."""

    def __init__(self, text: str, dim: int | None = None):
        src, carets = _caret_to_pow(text.strip())
        try:
            tree = ast.parse(src, mode="eval")
        except SyntaxError as exc:
            # some errors at the end of input come back with offset 0
            col = exc.offset if exc.offset and exc.offset > 0 else len(src) + 1
            col -= sum(1 for c in carets if c < col - 1)
            raise InvalidInput(f"cannot parse {text!r}: {exc.msg} at line {exc.lineno or 1}, column {col}") from None
        self.text = text
        self.root = _convert(tree, src, carets)
        used = self._vars(self.root)
        need = max(used) + 1 if used else 1
        if dim is not None and dim < need:
            raise InvalidInput(f"{text!r} uses variable x{need - 1} but the domain has dimension {dim}")
        self.dim = dim if dim is not None else need

    @classmethod
    def _vars(cls, node: Node) -> set[int]:
        out = {node.value} if node.op == "var" else set()
        for a in node.args:
            out |= cls._vars(a)
        return out

    def __repr__(self):
        return f"Expression({self.text!r})"

    @property
    def is_polynomial(self) -> bool:
        def walk(n):
            return n.op in ("const", "var", "add", "sub", "mul", "neg", "pow") and all(walk(a) for a in n.args)

        return walk(self.root)

    # point evaluation

    def __call__(self, point: Sequence) -> Fraction | float:
        return _eval_point(self.root, tuple(point))

    # exact rational box

    def enclose(self, lower: Sequence[Fraction], upper: Sequence[Fraction]) -> Interval:
        box = [Interval(lo, hi) for lo, hi in zip(lower, upper)]
        return _eval_interval(self.root, box)

    # many boxes at once

    def enclose_vec(self, lows: Sequence[np.ndarray], highs: Sequence[np.ndarray]) -> VecInterval:
        box = [VecInterval(lo, hi) for lo, hi in zip(lows, highs)]
        r = _eval_vec(self.root, box)
        if not (np.all(np.isfinite(r.lo)) and np.all(np.isfinite(r.hi))):
            raise InvalidFunction(f"{self.text!r} has an unbounded enclosure on some cell")
        return r


def _is_rational_point(v) -> bool:
    return isinstance(v, (int, Fraction)) or (isinstance(v, float) and math.isfinite(v))


def _eval_point(n: Node, p):
    op = n.op
    if op == "const":
        return n.value
    if op == "real":
        return float(n.value)
    if op == "var":
        return p[n.value]
    a = [_eval_point(x, p) for x in n.args]
    if op == "neg":
        return -a[0]
    if op == "add":
        return a[0] + a[1]
    if op == "sub":
        return a[0] - a[1]
    if op == "mul":
        return a[0] * a[1]
    if op == "div":
        if a[1] == 0:
            raise InvalidFunction("division by zero")
        return a[0] / a[1]
    if op == "pow":
        return a[0] ** n.value
    if op == "min":
        return min(a)
    if op == "max":
        return max(a)
    if op == "abs":
        return abs(a[0])
    if op == "rat":
        # exact inputs are rational by construction; floats stand in for reals
        return Fraction(1) if isinstance(a[0], (int, Fraction)) else Fraction(0)
    return getattr(math, op)(float(a[0]))


def _eval_interval(n: Node, box) -> Interval:
    op = n.op
    if op == "const":
        return Interval(n.value)
    if op == "real":
        return n.value.interval()
    if op == "var":
        return box[n.value]
    a = [_eval_interval(x, box) for x in n.args]
    if op == "neg":
        return -a[0]
    if op == "add":
        return a[0] + a[1]
    if op == "sub":
        return a[0] - a[1]
    if op == "mul":
        if n.args[0] == n.args[1]:
            return a[0] ** 2
        return a[0] * a[1]
    if op == "div":
        return a[0] / a[1]
    if op == "pow":
        return a[0] ** n.value
    if op == "min":
        return a[0].min(a[1])
    if op == "max":
        return a[0].max(a[1])
    if op == "abs":
        return abs(a[0])
    if op == "rat":
        return Interval(1) if a[0].width == 0 else Interval(0, 1)
    return a[0].apply(op)


def _eval_vec(n: Node, box) -> VecInterval:
    op = n.op
    if op in ("const", "real"):
        return VecInterval.const(n.value)
    if op == "var":
        return box[n.value]
    a = [_eval_vec(x, box) for x in n.args]
    if op == "neg":
        return -a[0]
    if op == "add":
        return a[0] + a[1]
    if op == "sub":
        return a[0] - a[1]
    if op == "mul":
        if n.args[0] == n.args[1]:
            return a[0] ** 2
        return a[0] * a[1]
    if op == "div":
        return a[0] / a[1]
    if op == "pow":
        return a[0] ** n.value
    if op == "min":
        return a[0].minimum(a[1])
    if op == "max":
        return a[0].maximum(a[1])
    if op == "abs":
        return abs(a[0])
    if op == "rat":
        point = a[0].lo == a[0].hi
        return VecInterval(np.where(point, 1.0, 0.0), np.ones_like(a[0].hi))
    return a[0].apply(op)


def parse_expression(text: str, dim: int | None = None) -> Expression:
    return Expression(text, dim)
