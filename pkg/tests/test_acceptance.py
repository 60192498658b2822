"""Acceptance gate: one test, and one PASS/FAIL line, per criterion."""
import time
from fractions import Fraction as F

from famint.extend import InnerUniverse, Universe, transfer_report, extend_function, point_distance, uniqueness_check
from famint.function import BoundedFn
from famint.integral import FinitePartition, darboux_sums, integrate
from famint.props import run_suite
from famint.rect import Box, restricted_algebra
from famint.report import SIMULATION_HEADER
from famint.riemann import riemann_integrate


def timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, time.perf_counter() - t0


def suite_line(res) -> str:
    return f"{res.passed} checks passed, {res.failed} failed, {res.elapsed:.2f}s"


def test_measure_identities(verdict):
    res = run_suite("identities", count=200)
    ok = res.ok and res.passed == 200 and res.elapsed < 10
    assert verdict("five identities on 200 random measures, |X| <= 10, < 10 s", ok, suite_line(res)), res.details


def test_filter_round_trips_and_order(verdict):
    res = run_suite("filters")
    ok = res.ok
    assert verdict("filter/measure round trips and order biconditionals, exhaustive", ok, suite_line(res)), res.details


def test_dyadic_measures(verdict):
    res = run_suite("dyadic", count=200)
    ok = res.ok and res.passed == 200
    assert verdict("dyadic measure validates, strictly positive, total 1 - 2^-N, N <= 12", ok, suite_line(res)), res.details


def test_identity_function_sums_and_integral(verdict):
    _, lam = restricted_algebra((0,), (1,))
    f = BoundedFn.from_expression("x")
    gaps_ok = True
    for n in range(1, 65):
        cells = [Box((F(k, n),), (F(k + 1, n),)) for k in range(n)]
        lo, hi = darboux_sums(f, FinitePartition(lam.algebra, cells), lam)
        gaps_ok &= hi - lo == F(1, n)
    rep, elapsed = timed(integrate, f, lam, F(1, 10**4))
    ok = (
        gaps_ok
        and rep.integrable_at_eps
        and rep.witness_cell_count <= 2**15
        and abs(rep.value - F(1, 2)) <= F(5, 10**5)
        and elapsed < 5
    )
    detail = f"U-L = 1/n for n <= 64: {gaps_ok}; {rep.witness_cell_count} cells; value {float(rep.value):.10f}; {elapsed:.2f}s"
    assert verdict("f(x) = x on [0,1]: exact gaps, certified at 1e-4", ok, detail)


def test_riemann_desk_values(verdict):
    cases = [("x^2", (0,), (1,), F(1, 3)), ("x + y", (0, 0), (1, 1), F(1)), ("7/3", (0,), (1,), F(7, 3))]
    eps = F(1, 1000)
    details, ok = [], True
    for text, a, b, exact in cases:
        rep, elapsed = timed(riemann_integrate, BoundedFn.from_expression(text, len(a)), a, b, eps)
        good = rep.integrable_at_eps and rep.lower <= exact <= rep.upper and elapsed < 10
        ok &= good
        details.append(f"{text}: {elapsed:.2f}s")
    assert verdict("Riemann desk values certified within 1e-3, < 10 s each", ok, "; ".join(details))


def test_grid_and_box_integrators(verdict):
    res = run_suite("grid-vs-box", count=100)
    ok = res.ok and res.passed == 100
    assert verdict("grid and box integrators agree on 100 random polynomials", ok, suite_line(res)), res.details


def test_pushforward_transfer(verdict):
    res = run_suite("pushforward", count=1000)
    ok = res.ok and res.passed == 1000
    assert verdict("integral transfer along finite maps, 1000 instances", ok, suite_line(res)), res.details


def test_extension_simulation(verdict):
    M = InnerUniverse.from_function((0,), (1,), 8, lambda p: p[0] * p[0])
    N = Universe((0,), (1,), 64)
    tol = F(1, 16)
    rep = transfer_report(M, N, F(1, 32), depth=16, adversary="envelope")
    inner, outer = rep.extension.integral_M, rep.extension.integral_N
    values_ok = (
        rep.inner_integrable
        and rep.outer_integrable
        and rep.distance <= tol
        and point_distance(inner, F(1, 3)) <= tol
        and point_distance(outer, F(1, 3)) <= tol
    )
    vols, bounded = [], True
    for d in (4, 8, 16):
        u = uniqueness_check(extend_function(M, N, d), extend_function(M, N, d, adversary="lower"))
        vols.append(u.disagreement_volume)
        bounded &= u.ok
    monotone = vols[0] >= vols[1] >= vols[2]
    ok = values_ok and bounded and monotone
    detail = (
        f"inner [{float(inner.lower):.4f}, {float(inner.upper):.4f}], "
        f"outer [{float(outer.lower):.4f}, {float(outer.upper):.4f}], "
        f"disagreement volumes {[str(v) for v in vols]}"
    )
    assert verdict("x^2 on nested grids 8 | 64: values within 1/16, uniqueness bounded and shrinking", ok, detail)


def test_rational_steps(verdict):
    res = run_suite("rational-steps", count=100)
    ok = res.ok and res.passed == 100
    assert verdict("rational step bounds for 100 irrational step functions, slack <= eps", ok, suite_line(res)), res.details


def test_simulation_header(verdict):
    text = SIMULATION_HEADER.lower()
    ok = "substitute" in text and "cannot be executed" in text and "grid" in text
    assert verdict("simulation report header documents the substitution", ok)
