"""Bounded functions paired with certified range oracles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping

from .algebra import Element
from .errors import InvalidFunction, InvalidInput
from .expr import Expression
from .rational import to_fraction
from .rect import Box, RectUnion


def _as_bound(x, what: str) -> Fraction:
    if x is None:
        raise InvalidFunction(f"{what} is unbounded")
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InvalidFunction(f"{what} is unbounded ({x})")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class BoundedFn:
    """A function together with a range oracle.

    ``oracle(cell)`` returns ``(lo, hi)`` with ``lo <= inf f[cell]`` and
    ``sup f[cell] <= hi``.  ``exact`` means the pair is the true infimum and
    supremum; ``certified`` is false only for sampled estimates, which
    carry no guarantee at all.
    """

    evaluate: Callable
    oracle: Callable
    exact: bool = False
    certified: bool = True
    label: str = "f"
    expression: Expression | None = None

    def range(self, cell) -> tuple[Fraction, Fraction]:
        lo, hi = self.oracle(cell)
        lo, hi = _as_bound(lo, f"lower range of {self.label}"), _as_bound(hi, f"upper range of {self.label}")
        if lo > hi:
            raise InvalidFunction(f"range oracle of {self.label} returned lo={lo} > hi={hi}")
        return lo, hi

    def __call__(self, x):
        return self.evaluate(x)

    # constructors

    @classmethod
    def on_points(cls, values: Mapping[Hashable, object], label: str = "f") -> "BoundedFn":
        """A function on a finite ground set; ranges are exact min/max over points."""
        table = {x: to_fraction(v, what=f"{label}({x!r})") for x, v in values.items()}

        def evaluate(x):
            try:
                return table[x]
            except KeyError:
                raise InvalidInput(f"{label} is not defined at {x!r}") from None

        def oracle(cell: Element):
            vals = [evaluate(x) for x in cell]
            if not vals:
                raise InvalidInput("range over an empty cell")
            return min(vals), max(vals)

        return cls(evaluate, oracle, exact=True, label=label)

    @classmethod
    def from_callable(cls, fn: Callable, points, label: str = "f") -> "BoundedFn":
        return cls.on_points({x: fn(x) for x in points}, label)

    @classmethod
    def from_expression(cls, expr: Expression | str, dim: int | None = None) -> "BoundedFn":
        """Ranges on boxes by interval evaluation over the closed cell."""
        if isinstance(expr, str):
            expr = Expression(expr, dim)

        def evaluate(x):
            if isinstance(x, (tuple, list)):
                return expr(x)
            return expr((x,))

        def oracle(cell):
            if isinstance(cell, Box):
                r = expr.enclose(cell.lower, cell.upper)
                return r.lo, r.hi
            if isinstance(cell, RectUnion):
                rs = [expr.enclose(b.lower, b.upper) for b in cell.boxes]
                return min(r.lo for r in rs), max(r.hi for r in rs)
            if isinstance(cell, Element):
                vals = [to_fraction(evaluate(x)) for x in cell]
                return min(vals), max(vals)
            raise InvalidInput(f"no range oracle for cells of type {type(cell).__name__}")

        return cls(evaluate, oracle, exact=False, label=expr.text, expression=expr)

    @classmethod
    def constant_range(cls, lo, hi, label: str = "f", evaluate: Callable | None = None) -> "BoundedFn":
        """A function whose oracle reports the same range on every cell."""
        lo, hi = to_fraction(lo), to_fraction(hi)
        return cls(evaluate or (lambda x: lo), lambda cell: (lo, hi), exact=False, label=label)

    @classmethod
    def sampled(cls, fn: Callable, samples: int = 5, label: str = "f") -> "BoundedFn":
        """Estimate ranges from sample points on box cells; not certified."""

        def oracle(cell: Box):
            pts = []
            for k in range(samples):
                t = Fraction(k, max(samples - 1, 1))
                pts.append(tuple(a + t * (b - a) for a, b in zip(cell.lower, cell.upper)))
            vals = [Fraction(fn(p)) for p in pts]
            return min(vals), max(vals)

        return cls(fn, oracle, exact=False, certified=False, label=label)


def compose(f: BoundedFn, h: Mapping, domain) -> BoundedFn:
    """``f o h`` on a finite domain."""
    return BoundedFn.on_points({x: f(h[x]) for x in domain}, label=f"{f.label}∘h")
