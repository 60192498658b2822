"""Exact rational parsing and rendering."""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

from .errors import InvalidInput

_RAT = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")
_DEC = re.compile(r"^\s*[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\s*$")


def to_fraction(x, *, what: str = "value") -> Fraction:
    """Coerce ``x`` to an exact :class:`Fraction`.

    Accepts ints, rationals and strings like ``"3/4"``, ``"-2"`` or decimal
    literals such as ``"1e-4"`` (read exactly).  Floats are rejected because
    their binary value is almost never the number the caller meant.
    """
    if isinstance(x, bool):
        raise InvalidInput(f"{what}: booleans are not numbers")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        m = _RAT.match(x)
        if m:
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise InvalidInput(f"{what}: zero denominator in {x!r}")
            return Fraction(int(m.group(1)), den)
        if _DEC.match(x):
            return Fraction(x.strip())
        raise InvalidInput(f"{what}: cannot read {x!r} as a rational")
    if isinstance(x, float):
        raise InvalidInput(f"{what}: floats are inexact; pass a Fraction or a 'p/q' string")
    raise InvalidInput(f"{what}: unsupported type {type(x).__name__}")


def fmt(q: Fraction) -> str:
    """Render as ``p/q`` (or ``p`` for integers)."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
