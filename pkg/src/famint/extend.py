"""Extending a function from a coarse rational grid to a finer one.

An *inner* universe holds the points of ``[a, b]`` whose coordinates are
multiples of ``1/D_M``; an *outer* universe uses ``1/D_N`` with ``D_M``
dividing ``D_N``, so it contains points the inner one has never seen.  A
function known only on inner points is extended to outer points with the
envelope of a sequence of step-function sandwiches, and the integrals on
both sides are compared.

Cells are lower-closed: each cell owns its lower faces, and the last cell
on every axis also owns the top face of the rectangle.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence

from .algebra import Element, FiniteAlgebra, GroundSet
from .errors import InvalidInput, PreconditionFailure
from .fam import Fam
from .function import BoundedFn
from .integral import IntegralReport, integrate
from .rational import to_fraction
from .rect import _point
from .riemann import StepFunction, step_integral


class Universe:
    """All points of ``[a, b]`` on the lattice ``(1/D) Z^n``."""

    def __init__(self, a: Sequence, b: Sequence, D: int):
        a, b = _point(a), _point(b)
        if len(a) != len(b) or not a:
            raise InvalidInput("corners must have the same positive dimension")
        if any(x >= y for x, y in zip(a, b)):
            raise InvalidInput("the rectangle must be nondegenerate")
        if not isinstance(D, int) or D < 1:
            raise InvalidInput("grid density must be a positive integer")
        for x in a + b:
            if (x * D).denominator != 1:
                raise InvalidInput(f"corner coordinate {x} is not a multiple of 1/{D}")
        self.a, self.b, self.D = a, b, D
        self.dim = len(a)
        self.steps = tuple(int((y - x) * D) for x, y in zip(a, b))

    @property
    def points(self) -> list[tuple[Fraction, ...]]:
        return [
            tuple(x + Fraction(k, self.D) for x, k in zip(self.a, idx))
            for idx in product(*(range(s + 1) for s in self.steps))
        ]

    def __contains__(self, p) -> bool:
        return all(x <= q <= y and (q * self.D).denominator == 1 for x, q, y in zip(self.a, p, self.b))

    def same_rectangle(self, other: "Universe") -> bool:
        return self.a == other.a and self.b == other.b


def _cell_index(p, a, width, counts) -> tuple[int, ...]:
    """Lower-closed cell of a uniform grid; the top face joins the last cell."""
    return tuple(min(int((q - x) // w), c - 1) for q, x, w, c in zip(p, a, width, counts))


@dataclass
class InnerUniverse:
    """Inner lattice points together with the known values of ``f``."""

    universe: Universe
    f_values: dict

    @classmethod
    def from_function(cls, a, b, D: int, f: Callable) -> "InnerUniverse":
        U = Universe(a, b, D)
        return cls(U, {p: _exact(f(p)) for p in U.points})

    @classmethod
    def from_table(cls, a, b, D: int, table: Mapping) -> "InnerUniverse":
        U = Universe(a, b, D)
        vals = {}
        for p in U.points:
            key = p if p in table else (p[0] if len(p) == 1 and p[0] in table else None)
            if key is None:
                raise InvalidInput(f"the table has no value at inner point {tuple(map(str, p))}")
            vals[p] = to_fraction(table[key], what=f"f{p}")
        return cls(U, vals)


def _exact(v) -> Fraction:
    if isinstance(v, float):
        if not math.isfinite(v):
            raise InvalidInput("function values must be finite")
        return Fraction(v)
    return to_fraction(v)


@dataclass
class Sandwich:
    m: int
    cells_per_axis: tuple[int, ...]
    sigma: StepFunction
    tau: StepFunction
    gap: Fraction

    def lookup(self, p, which: str) -> Fraction:
        s = self.sigma if which == "sigma" else self.tau
        a = tuple(ax[0] for ax in s.axes)
        width = tuple(ax[1] - ax[0] for ax in s.axes)
        return s.values[_cell_index(p, a, width, self.cells_per_axis)]

    def cell_of(self, p) -> tuple[int, ...]:
        a = tuple(ax[0] for ax in self.sigma.axes)
        width = tuple(ax[1] - ax[0] for ax in self.sigma.axes)
        return _cell_index(p, a, width, self.cells_per_axis)


def _grid_envelope(M: InnerUniverse, step: int):
    """Per-cell (min, max) of ``f`` on a uniform grid whose cells span ``step`` inner steps."""
    U = M.universe
    counts = tuple(s // step for s in U.steps)
    width = tuple(Fraction(step, U.D) for _ in counts)
    lo: dict = {}
    hi: dict = {}
    for p, v in M.f_values.items():
        idx = _cell_index(p, U.a, width, counts)
        if idx not in lo:
            lo[idx] = hi[idx] = v
        else:
            lo[idx] = min(lo[idx], v)
            hi[idx] = max(hi[idx], v)
    axes = [tuple(x + w * j for j in range(c + 1)) for x, w, c in zip(U.a, width, counts)]
    sigma, tau = StepFunction(axes, lo), StepFunction(axes, hi)
    return counts, sigma, tau, step_integral(tau) - step_integral(sigma)


def _divisor_steps(U: Universe) -> list[int]:
    g = 0
    for s in U.steps:
        g = math.gcd(g, s)
    return sorted((d for d in range(1, g + 1) if g % d == 0), reverse=True)


def build_sandwich(M: InnerUniverse, m: int) -> Sandwich:
    """Coarsest uniform grid aligned with the inner lattice whose sandwich gap is below ``1/(m+1)``."""
    if m < 0:
        raise InvalidInput("m must be a natural number")
    target = Fraction(1, m + 1)
    tried = {}
    for step in _divisor_steps(M.universe):
        counts, sigma, tau, gap = _grid_envelope(M, step)
        tried[counts] = gap
        if gap < target:
            return Sandwich(m, counts, sigma, tau, gap)
    raise PreconditionFailure(
        f"no lattice-aligned grid brings the sandwich gap below 1/{m + 1}; the finest gap is {gap}",
        {"target": target, "gaps": tried},
    )


def inner_algebra(U: Universe, values: Mapping) -> tuple[Fam, BoundedFn]:
    """Finest lattice-cell traces as atoms, each weighted by its cell volume."""
    ground = GroundSet(U.points)
    width = tuple(Fraction(1, U.D) for _ in U.steps)
    blocks: dict = {}
    for i, p in enumerate(ground.elements):
        idx = _cell_index(p, U.a, width, U.steps)
        blocks[idx] = blocks.get(idx, 0) | 1 << i
    vol = Fraction(1, U.D ** U.dim)
    keys = sorted(blocks)
    alg = FiniteAlgebra(ground, [Element(ground, blocks[k]) for k in keys])
    mask_weight = {blocks[k]: vol for k in keys}
    fam = Fam(alg, [mask_weight[t.mask] for t in alg.atoms])
    return fam, BoundedFn.on_points(values)


def integrate_on(U: Universe, values: Mapping, eps) -> IntegralReport:
    fam, fn = inner_algebra(U, values)
    return integrate(fn, fam, eps)


@dataclass
class ExtensionResult:
    inner: InnerUniverse
    outer: Universe
    depth: int
    g_values: dict
    sandwiches: list
    integral_M: IntegralReport
    integral_N: IntegralReport
    exceptional_mass: Fraction
    adversary: str = "envelope"
    notes: dict = field(default_factory=dict)

    def envelope(self, p, depth: int | None = None) -> tuple[Fraction, Fraction]:
        d = self.depth if depth is None else depth
        sw = self.sandwiches[:d]
        return max(s.lookup(p, "sigma") for s in sw), min(s.lookup(p, "tau") for s in sw)


def _boundary_volume(sw: Sandwich, delta) -> Fraction:
    vol = math.prod((ax[1] - ax[0] for ax in sw.sigma.axes), start=Fraction(1))
    n = sum(1 for idx in sw.sigma.cells() if sw.tau.values[idx] - sw.sigma.values[idx] > delta)
    return n * vol


def extend_function(
    M: InnerUniverse,
    N: Universe,
    depth: int,
    *,
    adversary: str = "envelope",
    seed: int = 0,
    eps=Fraction(1, 32),
) -> ExtensionResult:
    """Extend ``f`` from inner to outer points with the truncated envelope ``min_{m<depth} tau_m``.

    ``adversary`` chooses the value on outer-only points: ``"envelope"``
    (the default), ``"lower"`` for ``max_{m<depth} sigma_m`` or
    ``"random"`` for a seeded point inside that band.
    """
    if not isinstance(depth, int) or depth <= 0:
        raise InvalidInput("depth must be a positive integer")
    U = M.universe
    if not U.same_rectangle(N):
        raise InvalidInput("inner and outer universes cover different rectangles")
    if N.D % U.D:
        raise InvalidInput(f"outer density {N.D} is not a multiple of inner density {U.D}")
    if adversary not in ("envelope", "lower", "random"):
        raise InvalidInput(f"unknown adversary {adversary!r}")
    sandwiches = [build_sandwich(M, m) for m in range(depth)]
    rng = random.Random(seed)
    g = {}
    for p in N.points:
        if p in M.f_values:
            g[p] = M.f_values[p]
            continue
        top = min(s.lookup(p, "tau") for s in sandwiches)
        if adversary == "envelope":
            g[p] = top
            continue
        bottom = max(s.lookup(p, "sigma") for s in sandwiches)
        if adversary == "lower":
            g[p] = bottom
        else:
            g[p] = bottom + Fraction(rng.randint(0, 16), 16) * (top - bottom)
    rep_M = integrate_on(U, M.f_values, eps)
    rep_N = integrate_on(N, g, eps)
    return ExtensionResult(
        M, N, depth, g, sandwiches, rep_M, rep_N,
        exceptional_mass=_boundary_volume(sandwiches[-1], 0),
        adversary=adversary,
        notes={
            "truncation": f"infimum over m replaced by a minimum over m < {depth}",
            "gap_tolerance": Fraction(2, depth),
            "value_tolerance": Fraction(1, depth),
        },
    )


def enclosure_distance(r1: IntegralReport, r2: IntegralReport) -> Fraction:
    """Distance between the certified enclosures ``[lower, upper]``; 0 when they overlap."""
    return max(Fraction(0), r1.lower - r2.upper, r2.lower - r1.upper)


def point_distance(r: IntegralReport, x) -> Fraction:
    x = Fraction(x)
    return max(Fraction(0), r.lower - x, x - r.upper)


@dataclass
class UniquenessReport:
    disagreement_volume: Fraction
    boundary_volume: Fraction
    delta: Fraction
    disagreeing_points: int

    @property
    def ok(self) -> bool:
        return self.disagreement_volume <= self.boundary_volume


def uniqueness_check(r1: ExtensionResult, r2: ExtensionResult, delta=0) -> UniquenessReport:
    """Volume of outer cells holding a point where the two extensions differ by more than ``delta``."""
    delta = to_fraction(delta, what="delta")
    U1, U2 = r1.inner.universe, r2.inner.universe
    if not (U1.same_rectangle(U2) and U1.D == U2.D and r1.outer.D == r2.outer.D):
        raise InvalidInput("extensions live on different universes")
    if r1.inner.f_values != r2.inner.f_values:
        raise InvalidInput("extensions start from different functions")
    N = r1.outer
    width = tuple(Fraction(1, N.D) for _ in N.steps)
    bad_cells, bad_points = set(), 0
    for p, v in r1.g_values.items():
        if abs(v - r2.g_values[p]) > delta:
            bad_points += 1
            bad_cells.add(_cell_index(p, N.a, width, N.steps))
    cell_vol = Fraction(1, N.D ** N.dim)
    shallow = r1 if r1.depth <= r2.depth else r2
    return UniquenessReport(
        len(bad_cells) * cell_vol, _boundary_volume(shallow.sandwiches[-1], delta), delta, bad_points
    )


@dataclass
class TransferReport:
    extension: ExtensionResult
    eps: Fraction
    inner_integrable: bool
    outer_integrable: bool
    distance: Fraction
    restriction: dict

    @property
    def equal_within_eps(self) -> bool:
        return self.distance <= self.eps


def restriction_check(M: Universe, N: Universe, g_values: Mapping, eps) -> dict:
    """Integrate an outer-defined function on the outer lattice and on its inner restriction."""
    outer = integrate_on(N, g_values, eps)
    restricted = {p: g_values[p] for p in M.points}
    inner = integrate_on(M, restricted, eps)
    return {
        "outer": outer,
        "inner": inner,
        "outer_integrable": outer.integrable_at_eps,
        "inner_integrable": inner.integrable_at_eps,
        "distance": enclosure_distance(inner, outer),
    }


def transfer_report(M: InnerUniverse, N: Universe, eps, *, depth: int = 16, **kw) -> TransferReport:
    """Inner decision, extension, outer decision, value comparison, and the restriction route back."""
    eps = to_fraction(eps, what="eps")
    ext = extend_function(M, N, depth, eps=eps, **kw)
    restriction = restriction_check(M.universe, N, ext.g_values, eps)
    return TransferReport(
        ext, eps, ext.integral_M.integrable_at_eps, ext.integral_N.integrable_at_eps,
        enclosure_distance(ext.integral_M, ext.integral_N), restriction,
    )
