from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famint.errors import InvalidFunction, InvalidInput
from famint.expr import Expression
from famint.interval import Interval, Real, VecInterval, certified_sum

fracs = st.fractions(-4, 4, max_denominator=12)


@st.composite
def exprs(draw, depth=3):
    """Random expression text in x and y built from the supported operations."""
    if depth == 0 or draw(st.booleans()):
        return draw(st.sampled_from(["x", "y", "1/3", "2", "0.25", "pi"]))
    kind = draw(st.sampled_from(["+", "-", "*", "^", "neg", "abs", "exp", "sin", "cos", "min", "max"]))
    a = draw(exprs(depth - 1))
    if kind in "+-*":
        return f"({a}) {kind} ({draw(exprs(depth - 1))})"
    if kind == "^":
        return f"({a})^{draw(st.integers(0, 3))}"
    if kind == "neg":
        return f"-({a})"
    if kind in ("min", "max"):
        return f"{kind}({a}, {draw(exprs(depth - 1))})"
    return f"{kind}({a})"


@st.composite
def boxes2(draw):
    lo = [draw(fracs), draw(fracs)]
    hi = [l + draw(st.fractions(0, 2, max_denominator=8)) for l in lo]
    return lo, hi


# --- parsing ------------------------------------------------------------------------


def test_caret_binds_like_a_power():
    assert Expression("2*x^2*y^1 + 0.5")((3, 2)) == F(73, 2)
    assert Expression("-x^2")((3,)) == -9
    with pytest.raises(InvalidInput):
        Expression("x^2^1")  # right-associative, and the exponent must be a literal


def test_decimals_are_read_exactly():
    assert Expression("0.1 + 0.2")((0,)) == F(3, 10)


def test_dimension_inference_and_check():
    assert Expression("x + z").dim == 3
    assert Expression("x3").dim == 4
    with pytest.raises(InvalidInput, match="dimension"):
        Expression("x + y", 1)


@pytest.mark.parametrize(
    "text,message,column",
    [
        ("x +", "cannot parse", 4),
        ("x^2 +", "cannot parse", 6),
        ("foo(x)", "unknown function", 1),
        ("x^2 * q", "unknown name", 7),
        ("x ^ y", "exponent", 1),
        ("sin(x, y)", "argument", 1),
        ("x == 1", "unsupported", 1),
        ("'a'", "literal", 1),
    ],
)
def test_parse_errors_name_the_column(text, message, column):
    with pytest.raises(InvalidInput, match=message) as info:
        Expression(text)
    assert f"column {column}" in str(info.value)


def test_polynomial_detection():
    assert Expression("x^3 - 2*x*y").is_polynomial
    assert not Expression("sin(x)").is_polynomial


# --- enclosures ---------------------------------------------------------------------


def test_exact_enclosures_of_simple_functions():
    assert Expression("x").enclose([F(0)], [F(1)]) == Interval(0, 1)
    assert Expression("x^2").enclose([F(-1)], [F(2)]) == Interval(0, 4)
    assert Expression("x*x").enclose([F(-1)], [F(2)]) == Interval(0, 4)  # a product of one operand is a square
    assert Expression("x*y").enclose([F(-1), F(-1)], [F(2), F(2)]) == Interval(-2, 4)
    assert Expression("rat(x)").enclose([F(0)], [F(1)]) == Interval(0, 1)


def test_division_by_an_interval_containing_zero():
    with pytest.raises(InvalidFunction):
        Expression("1/x").enclose([F(-1)], [F(1)])


@settings(max_examples=150, deadline=None)
@given(exprs(), boxes2(), st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=6))
def test_enclosure_contains_sampled_values(text, box, ts):
    e = Expression(text, 2)
    lo, hi = box
    r = e.enclose(lo, hi)
    for t in ts:
        p = tuple(l + F(s) * (h - l) for l, h, s in zip(lo, hi, t))
        v = e(p)
        v = v if isinstance(v, F) else F(float(v))
        # point values of transcendental terms are floats; allow their rounding
        slack = F(1, 10**9) if not isinstance(e(p), F) else 0
        assert r.lo - slack <= v <= r.hi + slack, (text, p)


@settings(max_examples=100, deadline=None)
@given(exprs(), st.lists(boxes2(), min_size=1, max_size=5))
def test_vector_enclosure_contains_the_exact_one(text, bs):
    e = Expression(text, 2)
    lows = [np.array([float(b[0][i]) for b in bs]) for i in range(2)]
    highs = [np.array([float(b[1][i]) for b in bs]) for i in range(2)]
    # the float box must contain the rational one
    lows = [np.nextafter(x, -np.inf) for x in lows]
    highs = [np.nextafter(x, np.inf) for x in highs]
    vec = e.enclose_vec(lows, highs)
    # constant subexpressions come back as scalars that broadcast
    vlo, vhi = np.broadcast_to(vec.lo, (len(bs),)), np.broadcast_to(vec.hi, (len(bs),))
    for k, (lo, hi) in enumerate(bs):
        exact = e.enclose(lo, hi)
        assert F(float(vlo[k])) <= exact.lo + F(1, 10**12)
        assert exact.hi - F(1, 10**12) <= F(float(vhi[k]))


# --- intervals ------------------------------------------------------------------------


@given(fracs, fracs, fracs, fracs, st.floats(0, 1), st.floats(0, 1))
def test_interval_ops_are_sound(a, b, c, d, s, t):
    I, J = Interval(min(a, b), max(a, b)), Interval(min(c, d), max(c, d))
    x = I.lo + F(s) * (I.hi - I.lo)
    y = J.lo + F(t) * (J.hi - J.lo)
    assert x + y in I + J and x - y in I - J and x * y in I * J
    assert x * x in I**2 and abs(x) in abs(I)
    assert min(x, y) in I.min(J) and max(x, y) in I.max(J)
    if not (J.lo <= 0 <= J.hi):
        assert x / y in I / J


def test_reals_enclose_their_value():
    with mpmath.workdps(60):
        cases = [("pi", +mpmath.pi), ("sqrt(2)/2", mpmath.sqrt(2) / 2), ("3*e", 3 * mpmath.e)]
        for text, value in cases:
            lo, hi = Real(text).enclose()
            assert mpmath.mpf(lo.numerator) / lo.denominator <= value <= mpmath.mpf(hi.numerator) / hi.denominator
            assert hi - lo < F(1, 10**20)
            lo2, hi2 = Real(text).enclose(400)
            assert lo <= lo2 <= hi2 <= hi


def test_certified_sum_brackets_the_exact_sum():
    vals = np.array([0.1] * 10 + [1e16, -1e16, 3.0])
    exact = sum((F(float(v)) for v in vals), F(0))
    assert certified_sum(vals, -1) <= exact <= certified_sum(vals, +1)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_certified_sum_property(xs):
    vals = np.array(xs)
    exact = sum((F(v) for v in xs), F(0))
    assert certified_sum(vals, -1) <= exact <= certified_sum(vals, +1)


def test_vector_intervals_round_outward():
    third = VecInterval.const(F(1, 3))
    assert F(float(third.lo)) <= F(1, 3) <= F(float(third.hi))
    assert third.lo < third.hi
