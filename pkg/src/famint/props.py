"""Randomized and exhaustive property suites behind ``famint props``.

Every suite is seeded, so a given ``(seed, count)`` always checks the
same instances and reports the same outcome.
"""
from __future__ import annotations

import functools
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .algebra import Element, Filter, FiniteAlgebra, GroundSet, enumerate_ultrafilters, make_algebra
from .expr import Expression
from .fam import (
    Fam,
    classify,
    fam_leq,
    fam_to_filter,
    filter_to_fam,
    is_two_valued,
    measure_identities,
    sigma_centered_fam,
)
from .function import BoundedFn
from .integral import pushforward_integral_check, random_pushforward_instance
from .interval import Real
from .riemann import StepFunction, grid_box_check, rationalize_step


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    failed: int = 0
    details: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def record(self, ok: bool, detail=None) -> None:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
            if len(self.details) < 10:
                self.details.append(detail)

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "failed": self.failed,
            "ok": self.ok,
            "failures": [str(d) for d in self.details],
        }


def _timed(fn: Callable[..., SuiteResult]) -> Callable[..., SuiteResult]:
    @functools.wraps(fn)
    def run(*args, **kw) -> SuiteResult:
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.elapsed = time.perf_counter() - t0
        return res

    return run


def random_algebra(rng: random.Random, max_points: int = 10) -> FiniteAlgebra:
    n = rng.randint(1, max_points)
    X = GroundSet(range(n))
    gens = [Element(X, rng.randrange(1 << n)) for _ in range(rng.randint(0, 4))]
    return make_algebra(X, gens)


def random_fam(rng: random.Random, A: FiniteAlgebra) -> Fam:
    weights = [Fraction(rng.randint(0, 12), rng.randint(1, 12)) for _ in A.atoms]
    if not any(weights):
        weights[rng.randrange(len(weights))] = Fraction(1, rng.randint(1, 7))
    return Fam(A, weights)


@_timed
def identities_suite(seed: int = 0, count: int = 200, max_points: int = 10) -> SuiteResult:
    """The five basic identities on random measures over random algebras."""
    rng = random.Random(seed)
    res = SuiteResult("identities")
    for i in range(count):
        A = random_algebra(rng, max_points)
        m = random_fam(rng, A)
        rep = measure_identities(m, rng=rng)
        res.record(rep.ok, (i, {k: v for k, v in rep.failures.items() if v}))
    return res


def set_partitions(n: int, max_blocks: int):
    """All partitions of ``range(n)`` into at most ``max_blocks`` blocks, as block labels."""

    def rec(i, labels, k):
        if i == n:
            yield tuple(labels)
            return
        for b in range(min(k + 1, max_blocks)):
            labels.append(b)
            yield from rec(i + 1, labels, max(k, b + 1))
            labels.pop()

    yield from rec(0, [], 0)


def small_algebras(max_points: int = 5, max_atoms: int = 4):
    """Every algebra with at most ``2**max_atoms`` members on ground sets up to ``max_points``."""
    for n in range(1, max_points + 1):
        X = GroundSet(range(n))
        for labels in set_partitions(n, max_atoms):
            masks: dict[int, int] = {}
            for i, b in enumerate(labels):
                masks[b] = masks.get(b, 0) | 1 << i
            yield FiniteAlgebra(X, [Element(X, m) for m in masks.values()])


@_timed
def filter_suite(seed: int = 0, count: int | None = None, max_points: int = 5) -> SuiteResult:
    """Filter and two-valued measure round trips and the order biconditionals, exhaustively."""
    res = SuiteResult("filters")
    for A in small_algebras(max_points):
        ufs = enumerate_ultrafilters(A)
        fams = [filter_to_fam(U) for U in ufs]
        for U, m in zip(ufs, fams):
            back = fam_to_filter(m)
            res.record(back == U, ("filter round trip", A, U))
            res.record(filter_to_fam(back).weights == m.weights and is_two_valued(m), ("fam round trip", A, U))
        two_valued = [Fam(A, [Fraction(int(i == j)) for j in range(len(A.atoms))]) for i in range(len(A.atoms))]
        for m in two_valued:
            res.record(filter_to_fam(fam_to_filter(m)) == m, ("two-valued round trip", A, m))
        # the correspondence is a bijection onto the two-valued measures
        res.record(sorted(fm.weights for fm in fams) == sorted(m.weights for m in two_valued), ("bijection", A))
        for U, mU in zip(ufs, fams):
            for V, mV in zip(ufs, fams):
                inc = U.members <= V.members
                res.record(inc == fam_leq(mU, mV), ("ultrafilter order", A, U, V))
        for m1 in two_valued:
            for m2 in two_valued:
                inc = fam_to_filter(m1).members <= fam_to_filter(m2).members
                res.record(inc == fam_leq(m1, m2), ("two-valued order", A, m1, m2))
        # every filter is principal; compare all of them through their generated subalgebras
        filters = [Filter.principal(A, e) for e in A.members if e]
        ffams = [filter_to_fam(F) for F in filters]
        for F, mF in zip(filters, ffams):
            for G, mG in zip(filters, ffams):
                inc = F.members <= G.members
                res.record(inc == fam_leq(mF, mG), ("filter order", A, F, G))
    return res


@_timed
def dyadic_suite(seed: int = 0, count: int = 200, max_list: int = 12) -> SuiteResult:
    """Dyadic measures from random covering ultrafilter lists."""
    rng = random.Random(seed)
    res = SuiteResult("dyadic")
    for i in range(count):
        A = random_algebra(rng, 8)
        ufs = enumerate_ultrafilters(A)
        if len(ufs) > max_list:
            continue
        N = rng.randint(len(ufs), max_list)
        order = ufs + [rng.choice(ufs) for _ in range(N - len(ufs))]
        rng.shuffle(order)
        m = sigma_centered_fam(order)
        ok = classify(m).strictly_positive and m.bound == 1 - Fraction(1, 2**N)
        res.record(ok, (i, N, m.bound))
    return res


@_timed
def pushforward_suite(seed: int = 0, count: int = 1000, max_points: int = 8) -> SuiteResult:
    """Integral transfer along random finite maps."""
    rng = random.Random(seed)
    res = SuiteResult("pushforward")
    for i in range(count):
        f, h, m, Y = random_pushforward_instance(rng, max_points)
        rep = pushforward_integral_check(f, h, m, Y)
        res.record(rep.ok and rep.details.get("integrals_equal", False), (i, rep.details))
    return res


def _random_real(rng: random.Random):
    p, q = rng.randint(-6, 6), rng.randint(1, 7)
    if p == 0 or rng.random() < 0.3:
        return Fraction(p, q)
    base = rng.choice(["sqrt(2)", "pi"])
    return Real(f"{p}*{base}/{q}")


def _upper(p) -> Fraction:
    return p.enclose()[1] if isinstance(p, Real) else p


def random_irrational_step(rng: random.Random) -> StepFunction:
    dim = rng.choice((1, 1, 2))
    axes = []
    for _ in range(dim):
        cuts = sorted({Fraction(rng.randint(1, 15), 16) for _ in range(rng.randint(0, 3))})
        pts: list = [Fraction(0), *cuts, Fraction(1)]
        # occasionally replace a rational cut by a nearby irrational one
        for j in range(1, len(pts) - 1):
            if rng.random() < 0.4:
                k = rng.randint(1, 8)
                lo, hi = _upper(pts[j - 1]), pts[j + 1]
                cand = Real(f"sqrt(2)/{2 * k}") if rng.random() < 0.5 else Real(f"pi/{4 * k}")
                clo, chi = cand.enclose()
                if lo < clo and chi < hi:
                    pts[j] = cand
        axes.append(pts)
    shape = [len(ax) - 1 for ax in axes]
    values = [_random_real(rng) for _ in range(math.prod(shape))]
    return StepFunction(axes, values)


@_timed
def step_suite(seed: int = 0, count: int = 100) -> SuiteResult:
    """Rational step functions bracketing random irrational ones within eps."""
    rng = random.Random(seed)
    res = SuiteResult("rational-steps")
    for i in range(count):
        s = random_irrational_step(rng)
        eps = Fraction(1, rng.choice((8, 64, 1000, 10**6)))
        rep = rationalize_step(s, eps)
        ok = rep.ok and rep.slack_lower <= eps and rep.slack_upper <= eps
        res.record(ok, (i, eps, rep.slack_lower, rep.slack_upper, rep.pointwise_ok))
    return res


def random_polynomial(rng: random.Random, dim: int) -> str:
    """A sum of up to three monomials with small rational coefficients."""
    names = ["x", "y"][:dim]
    top = 3 if dim == 1 else 2
    terms = []
    for _ in range(rng.randint(1, 3)):
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 4))
        mono = "*".join(f"{v}^{rng.randint(0, top)}" for v in names)
        terms.append(f"({c.numerator}/{c.denominator})*{mono}")
    return " + ".join(terms)


@_timed
def grid_box_suite(seed: int = 0, count: int = 100, eps=Fraction(1, 4)) -> SuiteResult:
    """Grid and box-algebra integrators agree on random polynomials."""
    rng = random.Random(seed)
    res = SuiteResult("grid-vs-box")
    for i in range(count):
        dim = rng.choice((1, 2))
        text = random_polynomial(rng, dim)
        f = BoundedFn.from_expression(Expression(text, dim))
        a = tuple(Fraction(rng.randint(-1, 0)) for _ in range(dim))
        b = tuple(x + 1 for x in a)
        rep = grid_box_check(f, a, b, eps)
        ok = rep.ok and rep.details["grid"].integrable_at_eps
        res.record(ok, (i, text, a, b))
    return res


SUITES = {
    "identities": identities_suite,
    "filters": filter_suite,
    "dyadic": dyadic_suite,
    "pushforward": pushforward_suite,
    "rational-steps": step_suite,
    "grid-vs-box": grid_box_suite,
}


def run_suite(name: str, *, seed: int = 0, count: int | None = None) -> SuiteResult:
    fn = SUITES[name]
    if count is None:
        return fn(seed=seed)
    return fn(seed=seed, count=count)
