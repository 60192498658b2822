from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famint.errors import InvalidInput, PreconditionFailure
from famint.extend import (
    InnerUniverse,
    Universe,
    transfer_report,
    build_sandwich,
    enclosure_distance,
    extend_function,
    integrate_on,
    point_distance,
    restriction_check,
    uniqueness_check,
)


def square(p):
    return p[0] * p[0]


def brute_gap(f, D, s):
    """Sandwich gap on [0, 1] with cells of s lattice steps, straight from the points."""
    total = F(0)
    cells = D // s
    for c in range(cells):
        ks = range(c * s, (c + 1) * s + (1 if c == cells - 1 else 0))
        vals = [f((F(k, D),)) for k in ks]
        total += (max(vals) - min(vals)) * F(s, D)
    return total


# --- universes ------------------------------------------------------------------


def test_universe_points_and_membership():
    U = Universe((0,), (1,), 4)
    assert [p[0] for p in U.points] == [F(k, 4) for k in range(5)]
    assert (F(1, 2),) in U and (F(1, 3),) not in U and (F(2),) not in U


def test_universe_rejects_bad_input():
    with pytest.raises(InvalidInput):
        Universe((0,), (F(1, 3),), 4)
    with pytest.raises(InvalidInput):
        Universe((0,), (0,), 4)
    with pytest.raises(InvalidInput):
        Universe((0,), (1,), 0)


def test_table_must_cover_inner_points():
    with pytest.raises(InvalidInput):
        InnerUniverse.from_table((0,), (1,), 2, {(F(0),): 1, (F(1),): 1})
    M = InnerUniverse.from_table((0,), (1,), 2, {F(0): 1, F(1, 2): 2, F(1): 3})
    assert M.f_values[(F(1, 2),)] == 2


# --- sandwiches -------------------------------------------------------------------


def test_sandwich_of_identity_on_sixteen_points():
    M = InnerUniverse.from_function((0,), (1,), 16, lambda p: p[0])
    sw = build_sandwich(M, 3)
    assert sw.cells_per_axis == (4,)
    assert sw.gap == F(13, 64) == brute_gap(lambda p: p[0], 16, 4)
    # coarser grids miss the target 1/4
    assert brute_gap(lambda p: p[0], 16, 8) >= F(1, 4)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([4, 8, 16]), st.integers(0, 8))
def test_sandwich_is_the_coarsest_grid_below_target(D, m):
    M = InnerUniverse.from_function((0,), (1,), D, square)
    target = F(1, m + 1)
    steps = [s for s in range(D, 0, -1) if D % s == 0]
    good = [s for s in steps if brute_gap(square, D, s) < target]
    if not good:
        with pytest.raises(PreconditionFailure):
            build_sandwich(M, m)
        return
    sw = build_sandwich(M, m)
    assert sw.cells_per_axis == (D // good[0],)
    assert sw.gap == brute_gap(square, D, good[0])
    for p, v in M.f_values.items():
        assert sw.lookup(p, "sigma") <= v <= sw.lookup(p, "tau")


def test_constant_function_has_zero_gap():
    M = InnerUniverse.from_function((0, 0), (1, 1), 4, lambda p: F(3))
    sw = build_sandwich(M, 100)
    assert sw.gap == 0 and sw.cells_per_axis == (1, 1)


def test_single_spike_needs_fine_cells():
    M = InnerUniverse.from_function((0,), (1,), 8, lambda p: F(1) if p[0] == F(1, 2) else F(0))
    sw = build_sandwich(M, 5)
    assert sw.gap < F(1, 6)
    assert sw.lookup((F(1, 2),), "tau") == 1
    assert sw.lookup((F(0),), "tau") == 0


def test_negative_m_rejected():
    M = InnerUniverse.from_function((0,), (1,), 4, square)
    with pytest.raises(InvalidInput):
        build_sandwich(M, -1)


# --- extension -------------------------------------------------------------------


def test_extension_keeps_inner_values_and_stays_inside_the_envelope():
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    N = Universe((0,), (1,), 64)
    ext = extend_function(M, N, 8)
    for p, v in M.f_values.items():
        assert ext.g_values[p] == v
    for p in N.points:
        lo, hi = ext.envelope(p)
        assert lo <= ext.g_values[p] <= hi


@pytest.mark.parametrize("adversary", ["envelope", "lower", "random"])
def test_adversaries_stay_in_the_band(adversary):
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    N = Universe((0,), (1,), 32)
    ext = extend_function(M, N, 6, adversary=adversary, seed=3)
    for p in N.points:
        lo, hi = ext.envelope(p)
        assert lo <= ext.g_values[p] <= hi
    if adversary == "lower":
        assert all(ext.g_values[p] == ext.envelope(p)[0] for p in N.points if p not in M.f_values)


def test_envelope_narrows_with_depth():
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    N = Universe((0,), (1,), 64)
    ext = extend_function(M, N, 16)
    for p in N.points[::5]:
        widths = [ext.envelope(p, d)[1] - ext.envelope(p, d)[0] for d in range(1, 17)]
        assert all(w2 <= w1 for w1, w2 in zip(widths, widths[1:]))


def test_extension_argument_errors():
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    with pytest.raises(InvalidInput):
        extend_function(M, Universe((0,), (1,), 12), 4)
    with pytest.raises(InvalidInput):
        extend_function(M, Universe((0,), (2,), 16), 4)
    with pytest.raises(InvalidInput):
        extend_function(M, Universe((0,), (1,), 16), 0)
    with pytest.raises(InvalidInput):
        extend_function(M, Universe((0,), (1,), 16), 4, adversary="worst")


def test_uniqueness_bounded_and_shrinking():
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    N = Universe((0,), (1,), 64)
    vols = []
    for d in (4, 8, 16):
        u = uniqueness_check(extend_function(M, N, d), extend_function(M, N, d, adversary="lower"))
        assert u.ok
        vols.append(u.disagreement_volume)
    assert vols[0] >= vols[1] >= vols[2]


def test_uniqueness_of_identical_extensions():
    M = InnerUniverse.from_function((0,), (1,), 4, square)
    N = Universe((0,), (1,), 16)
    r = extend_function(M, N, 4)
    u = uniqueness_check(r, r)
    assert u.disagreement_volume == 0 and u.disagreeing_points == 0


def test_uniqueness_needs_matching_universes():
    M = InnerUniverse.from_function((0,), (1,), 4, square)
    r1 = extend_function(M, Universe((0,), (1,), 16), 2)
    r2 = extend_function(M, Universe((0,), (1,), 8), 2)
    with pytest.raises(InvalidInput):
        uniqueness_check(r1, r2)


# --- integrals on both sides ---------------------------------------------------------------


def test_lattice_integral_of_identity():
    U = Universe((0,), (1,), 8)
    rep = integrate_on(U, {p: p[0] for p in U.points}, F(1, 4))
    # lower-closed cells of width 1/8 plus the top point in the last cell
    assert rep.lower == sum((F(k, 8) * F(1, 8) for k in range(8)), F(0))
    assert rep.upper == rep.lower + F(1, 64)


def test_scenario_square():
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    N = Universe((0,), (1,), 64)
    rep = transfer_report(M, N, F(1, 16), depth=16)
    assert rep.inner_integrable and rep.outer_integrable and rep.equal_within_eps
    for r in (rep.extension.integral_M, rep.extension.integral_N):
        assert point_distance(r, F(1, 3)) <= F(1, 16)
    assert rep.restriction["inner_integrable"] and rep.restriction["outer_integrable"]


def test_restriction_route():
    M, N = Universe((0,), (1,), 4), Universe((0,), (1,), 16)
    g = {p: p[0] for p in N.points}
    res = restriction_check(M, N, g, F(1, 2))
    assert res["outer_integrable"] and res["inner_integrable"]
    # point sampling on the coarse lattice is biased low by one cell
    assert (res["inner"].lower, res["inner"].upper) == (F(3, 8), F(7, 16))
    assert (res["outer"].lower, res["outer"].upper) == (F(15, 32), F(121, 256))
    assert res["distance"] == enclosure_distance(res["inner"], res["outer"]) == F(1, 32)


def test_square_scenario_distances_to_one_third():
    M = InnerUniverse.from_function((0,), (1,), 8, square)
    N = Universe((0,), (1,), 64)
    ext = extend_function(M, N, 16, eps=F(1, 32))
    assert point_distance(ext.integral_M, F(1, 3)) <= F(1, 32)
    # the outer enclosure under the envelope extension sits a little further out
    assert point_distance(ext.integral_N, F(1, 3)) <= F(1, 16)


def test_identity_restricted_to_the_coarse_lattice():
    M, N = Universe((0,), (1,), 8), Universe((0,), (1,), 64)
    res = restriction_check(M, N, {p: p[0] for p in N.points}, F(1, 32))
    # lower sum over k/8 on cells of width 1/8, plus the top point in the last cell
    assert (res["inner"].lower, res["inner"].upper) == (F(7, 16), F(29, 64))
    assert res["inner_integrable"] and res["outer_integrable"]
