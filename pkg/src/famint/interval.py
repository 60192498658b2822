"""Certified interval arithmetic.

Two evaluators share one set of rules:

* :class:`Interval` keeps exact :class:`Fraction` endpoints.  Rational
  operations are exact; transcendental functions go through ``mpmath.iv``
  and come back as exact rationals bracketing the true range.
* :class:`VecInterval` holds float64 arrays and rounds every endpoint
  outward with ``nextafter`` so whole grids of cells can be enclosed at
  once.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from mpmath import iv
from mpmath.libmp import to_rational

from .errors import InvalidFunction, InvalidInput

#: Working precision (bits) of the ``mpmath.iv`` fallback.
IV_PREC = 80


def _iv_from_fraction(q: Fraction):
    return iv.mpf(q.numerator) / q.denominator


def _iv_from_interval(lo: Fraction, hi: Fraction):
    a, b = _iv_from_fraction(lo), _iv_from_fraction(hi)
    return iv.mpf([a.a, b.b])


def _iv_bounds(x) -> tuple[Fraction, Fraction]:
    lo, hi = x._mpi_
    # mpmath may hand back gmpy integers; Fraction arithmetic wants plain ints
    return tuple(Fraction(*map(int, to_rational(v))) for v in (lo, hi))


class Real:
    """A real constant known through certified rational enclosures.

    ``expr`` is an ``mpmath.iv`` expression string such as ``"3*sqrt(2)"``
    or ``"pi/7"``; the names ``pi``, ``e`` and ``sqrt`` are available.
    """

    __slots__ = ("expr", "_cache")

    def __init__(self, expr: str):
        self.expr = expr
        self._cache: dict[int, tuple[Fraction, Fraction]] = {}
        self.enclose(IV_PREC)  # fail early on bad input

    def enclose(self, prec: int = IV_PREC) -> tuple[Fraction, Fraction]:
        if prec not in self._cache:
            env = {"pi": None, "e": None, "sqrt": iv.sqrt, "exp": iv.exp, "log": iv.log}
            old = iv.prec
            try:
                iv.prec = prec
                env["pi"], env["e"] = iv.pi, iv.e
                try:
                    val = eval(self.expr, {"__builtins__": {}}, env)  # noqa: S307 - restricted namespace
                except Exception as exc:  # pragma: no cover - message path
                    raise InvalidInput(f"cannot evaluate real constant {self.expr!r}: {exc}") from None
                self._cache[prec] = _iv_bounds(iv.mpf(val) if not hasattr(val, "_mpi_") else val)
            finally:
                iv.prec = old
        return self._cache[prec]

    def interval(self, prec: int = IV_PREC) -> "Interval":
        return Interval(*self.enclose(prec))

    def __float__(self):
        lo, hi = self.enclose()
        return float((lo + hi) / 2)

    def __repr__(self):
        return f"Real({self.expr!r})"

    def __eq__(self, other):
        return isinstance(other, Real) and other.expr == self.expr

    def __hash__(self):
        return hash(("Real", self.expr))


class Interval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise InvalidFunction(f"inverted interval [{lo}, {hi}]")
        self.lo, self.hi = lo, hi

    @classmethod
    def coerce(cls, x) -> "Interval":
        if isinstance(x, Interval):
            return x
        if isinstance(x, Real):
            return x.interval()
        if isinstance(x, float):
            return cls(Fraction(x))
        return cls(x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __add__(self, o):
        o = Interval.coerce(o)
        return Interval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, o):
        return self + (-Interval.coerce(o))

    def __rsub__(self, o):
        return Interval.coerce(o) - self

    def __mul__(self, o):
        o = Interval.coerce(o)
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval(min(p), max(p))

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = Interval.coerce(o)
        if o.lo <= 0 <= o.hi:
            raise InvalidFunction(f"division by an interval containing zero [{o.lo}, {o.hi}]")
        return self * Interval(1 / o.hi, 1 / o.lo)

    def __rtruediv__(self, o):
        return Interval.coerce(o) / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise InvalidInput("only non-negative integer powers are supported")
        if n == 0:
            return Interval(1)
        a, b = self.lo ** n, self.hi ** n
        if n % 2 == 1 or self.lo >= 0:
            return Interval(min(a, b), max(a, b))
        if self.hi <= 0:
            return Interval(b, a)
        return Interval(0, max(a, b))

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Interval(0, max(-self.lo, self.hi))

    def min(self, o):
        o = Interval.coerce(o)
        return Interval(min(self.lo, o.lo), min(self.hi, o.hi))

    def max(self, o):
        o = Interval.coerce(o)
        return Interval(max(self.lo, o.lo), max(self.hi, o.hi))

    def apply(self, name: str) -> "Interval":
        """Enclose a transcendental function of this interval."""
        if name == "sqrt" and self.lo < 0:
            raise InvalidFunction(f"sqrt of an interval reaching below zero [{self.lo}, {self.hi}]")
        old = iv.prec
        try:
            iv.prec = IV_PREC
            x = _iv_from_interval(self.lo, self.hi)
            return Interval(*_iv_bounds(getattr(iv, name)(x)))
        finally:
            iv.prec = old

    def __eq__(self, o):
        return isinstance(o, Interval) and self.lo == o.lo and self.hi == o.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"


# --- vectorized float intervals ---------------------------------------------

_NINF, _PINF = -np.inf, np.inf


def down(x):
    return np.nextafter(x, _NINF)


def up(x):
    return np.nextafter(x, _PINF)


def _pad(lo, hi, ulps: int = 4):
    # libm transcendental functions are not correctly rounded; a few ulps of slack covers them
    return lo - ulps * np.spacing(np.abs(lo)) - 1e-300, hi + ulps * np.spacing(np.abs(hi)) + 1e-300


class VecInterval:
    """Arrays of intervals with outward-rounded float64 endpoints."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)

    @classmethod
    def const(cls, x):
        if isinstance(x, Real):
            lo, hi = x.enclose()
        else:
            lo = hi = Fraction(x)
        return cls(frac_down(lo), frac_up(hi))

    def __add__(self, o):
        return VecInterval(down(self.lo + o.lo), up(self.hi + o.hi))

    def __neg__(self):
        return VecInterval(-self.hi, -self.lo)

    def __sub__(self, o):
        return VecInterval(down(self.lo - o.hi), up(self.hi - o.lo))

    def __mul__(self, o):
        p = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        lo = np.minimum(np.minimum(p[0], p[1]), np.minimum(p[2], p[3]))
        hi = np.maximum(np.maximum(p[0], p[1]), np.maximum(p[2], p[3]))
        # 0 * inf never arises because inputs are finite (checked by callers)
        return VecInterval(down(lo), up(hi))

    def __truediv__(self, o):
        if np.any((o.lo <= 0) & (o.hi >= 0)):
            raise InvalidFunction("division by an interval containing zero")
        inv = VecInterval(down(1.0 / o.hi), up(1.0 / o.lo))
        return self * inv

    def __pow__(self, n: int):
        if n == 0:
            return VecInterval(np.ones_like(self.lo), np.ones_like(self.hi))
        if n == 1:
            return self
        base = abs(self) if n % 2 == 0 else self
        lo, hi = base.lo ** n, base.hi ** n
        # libm pow is faithful to within an ulp; two ulps of slack is safe
        lo = lo - 2 * np.spacing(np.abs(lo))
        hi = hi + 2 * np.spacing(np.abs(hi))
        if n % 2 == 0:
            lo = np.maximum(lo, 0.0)
        return VecInterval(lo, hi)

    def __abs__(self):
        lo = np.where(self.lo >= 0, self.lo, np.where(self.hi <= 0, -self.hi, 0.0))
        hi = np.maximum(np.abs(self.lo), np.abs(self.hi))
        return VecInterval(lo, hi)

    def minimum(self, o):
        return VecInterval(np.minimum(self.lo, o.lo), np.minimum(self.hi, o.hi))

    def maximum(self, o):
        return VecInterval(np.maximum(self.lo, o.lo), np.maximum(self.hi, o.hi))

    def apply(self, name: str) -> "VecInterval":
        lo, hi = self.lo, self.hi
        if name == "exp":
            return VecInterval(*_pad(np.maximum(np.exp(lo), 0.0), np.exp(hi)))
        if name == "sqrt":
            if np.any(lo < 0):
                raise InvalidFunction("sqrt of an interval reaching below zero")
            return VecInterval(*_pad(np.sqrt(lo), np.sqrt(hi)))
        if name in ("sin", "cos"):
            if name == "sin":
                # sin(x) = cos(x - pi/2); widen the shift by one ulp each side
                half = math.pi / 2
                lo, hi = down(lo - half) - 1e-15, up(hi - half) + 1e-15
            return _vcos(lo, hi)
        raise InvalidInput(f"unknown function {name!r}")


def _vcos(lo, hi):
    two_pi = 2 * math.pi
    clo, chi = np.cos(lo), np.cos(hi)
    rlo, rhi = _pad(np.minimum(clo, chi), np.maximum(clo, chi))
    # critical points 2k*pi (max) and (2k+1)*pi (min); test with slack so that
    # a borderline case widens the result rather than missing an extremum
    slack = 1e-9
    kmax_lo = np.ceil((lo - slack) / two_pi)
    kmax_hi = np.floor((hi + slack) / two_pi)
    has_max = kmax_lo <= kmax_hi
    kmin_lo = np.ceil((lo - math.pi - slack) / two_pi)
    kmin_hi = np.floor((hi - math.pi + slack) / two_pi)
    has_min = kmin_lo <= kmin_hi
    rhi = np.where(has_max, 1.0, np.minimum(rhi, 1.0))
    rlo = np.where(has_min, -1.0, np.maximum(rlo, -1.0))
    return VecInterval(rlo, rhi)


def frac_down(q: Fraction) -> float:
    """Largest float not above ``q``."""
    f = float(q)
    return f if Fraction(f) <= q else math.nextafter(f, -math.inf)


def frac_up(q: Fraction) -> float:
    """Smallest float not below ``q``."""
    f = float(q)
    return f if Fraction(f) >= q else math.nextafter(f, math.inf)


def certified_sum(values: np.ndarray, direction: int) -> Fraction:
    """Rigorous bound on ``sum(values)``: a lower bound for ``direction < 0``, upper otherwise.

    ``math.fsum`` is correctly rounded, so a single ``nextafter`` step
    outward gives a certified bound.
    """
    s = math.fsum(values.ravel().tolist())
    if not math.isfinite(s):
        raise InvalidFunction("range enclosure is unbounded")
    return Fraction(math.nextafter(s, -math.inf if direction < 0 else math.inf))
