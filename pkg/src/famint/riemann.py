"""Riemann integration on rectangles via grid partitions and step functions."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from .errors import InvalidInput, PreconditionFailure
from .function import BoundedFn
from .grid import GridPartition, grid_sums
from .integral import CheckReport, IntegralReport, integrate
from .interval import IV_PREC, Interval, Real
from .rational import to_fraction
from .rect import _point, restricted_algebra

__all__ = [
    "GridPartition",
    "StepFunction",
    "riemann_sums",
    "riemann_integrate",
    "step_integral",
    "step_integral_enclosure",
    "step_sandwich",
    "rationalize_step",
    "simplest_between",
    "grid_box_check",
]


def riemann_sums(f: BoundedFn, P: GridPartition) -> tuple[Fraction, Fraction]:
    """Certified lower and upper Riemann sums over the closed cells of ``P``."""
    return grid_sums(f, P)


def riemann_integrate(
    f: BoundedFn, a: Sequence, b: Sequence, eps=Fraction(1, 1000), *, max_cells: int = 1 << 22
) -> IntegralReport:
    """Refine uniform dyadic grids until the certified gap drops below ``eps``."""
    eps = to_fraction(eps, what="eps")
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    a, b = _point(a), _point(b)
    if any(x >= y for x, y in zip(a, b)):
        raise InvalidInput("riemann_integrate needs a nondegenerate rectangle")
    dim = len(a)
    gaps, level, best = [], 0, None
    while (1 << level) ** dim <= max_cells:
        grid = GridPartition.uniform(a, b, 1 << level)
        lo, hi = grid_sums(f, grid)
        gaps.append(hi - lo)
        best = (lo, hi, grid)
        if hi - lo < eps:
            break
        level += 1
    lo, hi, grid = best
    ok = hi - lo < eps and f.certified
    rep = IntegralReport(
        lo, hi, eps, ok, grid, certified=f.certified, schedule="grid",
        diagnostics={"levels": len(gaps), "cells_per_axis": grid.shape[0], "gaps": gaps},
    )
    if ok:
        rep.value = (lo + hi) / 2
        rep.error_bound = (hi - lo) / 2
    return rep


# --- step functions ----------------------------------------------------------


def _enclose(x, prec: int = IV_PREC) -> tuple[Fraction, Fraction]:
    if isinstance(x, Real):
        return x.enclose(prec)
    q = Fraction(x)
    return q, q


def _is_rational(x) -> bool:
    return not isinstance(x, Real)


def _coerce_const(x):
    if isinstance(x, Real):
        return x
    return to_fraction(x, what="step constant")


class StepFunction:
    """Constants on the cells of a grid; each half-open cell owns its lower faces.

    Breakpoints and constants may be rationals or :class:`Real` constants.
    The top face of the rectangle belongs to the last cell on each axis.
    """

    def __init__(self, axes: Sequence[Sequence], values):
        axes = tuple(tuple(p if isinstance(p, Real) else to_fraction(p, what="breakpoint") for p in ax) for ax in axes)
        if not axes:
            raise InvalidInput("a step function needs at least one axis")
        for i, ax in enumerate(axes):
            if len(ax) < 2:
                raise InvalidInput(f"axis {i} needs at least two breakpoints")
            for p, q in zip(ax, ax[1:]):
                if _enclose(p)[1] >= _enclose(q)[0]:
                    raise InvalidInput(f"axis {i} breakpoints are not strictly increasing")
        self.axes = axes
        self.shape = tuple(len(ax) - 1 for ax in axes)
        vals = {}
        if callable(values):
            for idx in product(*(range(s) for s in self.shape)):
                vals[idx] = _coerce_const(values(idx))
        elif isinstance(values, dict):
            vals = {tuple(k): _coerce_const(v) for k, v in values.items()}
        else:
            flat = list(values)
            idxs = list(product(*(range(s) for s in self.shape)))
            if len(flat) != len(idxs):
                raise InvalidInput(f"need {len(idxs)} constants, got {len(flat)}")
            vals = {i: _coerce_const(v) for i, v in zip(idxs, flat)}
        missing = [i for i in product(*(range(s) for s in self.shape)) if i not in vals]
        if missing:
            raise InvalidInput(f"no constant for cell {missing[0]}")
        self.values = vals

    @classmethod
    def on_grid(cls, grid: GridPartition, values) -> "StepFunction":
        return cls(grid.axes, values)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def is_rational(self) -> bool:
        return all(_is_rational(p) for ax in self.axes for p in ax) and all(
            _is_rational(v) for v in self.values.values()
        )

    def cells(self):
        return product(*(range(s) for s in self.shape))

    def locate(self, point) -> tuple[int, ...]:
        idx = []
        for ax, x in zip(self.axes, point):
            x = Fraction(x)
            if x < _enclose(ax[0])[0] or x > _enclose(ax[-1])[1]:
                raise InvalidInput(f"point {tuple(point)} lies outside the step function's rectangle")
            k = 0
            for j in range(1, len(ax) - 1):
                lo, hi = _enclose(ax[j])
                if x >= hi:
                    k = j
                elif x > lo:
                    raise InvalidInput(f"cannot place {x} relative to breakpoint {ax[j]!r}")
            idx.append(k)
        return tuple(idx)

    def __call__(self, point):
        return self.values[self.locate(point)]

    def as_function(self) -> BoundedFn:
        """The step function with an exact range oracle over closed boxes (rational data only)."""
        if not self.is_rational:
            raise InvalidInput("as_function needs rational data")

        def oracle(cell):
            ranges = []
            for ax, lo, hi in zip(self.axes, cell.lower, cell.upper):
                last = len(ax) - 2
                # cell j owns [ax[j], ax[j+1]), the last one also owns the top face
                hit = [j for j in range(last + 1) if ax[j] <= hi and (lo < ax[j + 1] or j == last)]
                if not hit or lo < ax[0] or hi > ax[-1]:
                    raise InvalidInput(f"box {cell} is not inside the step function's rectangle")
                ranges.append(hit)
            touched = [self.values[i] for i in product(*ranges)]
            return min(touched), max(touched)

        return BoundedFn(self, oracle, exact=True, label="step")

    def cell_volume(self, idx) -> Fraction:
        v = Fraction(1)
        for ax, i in zip(self.axes, idx):
            v *= Fraction(ax[i + 1]) - Fraction(ax[i])
        return v

    def cell_volume_enclosure(self, idx, prec: int = IV_PREC) -> Interval:
        v = Interval(1)
        for ax, i in zip(self.axes, idx):
            v = v * (Interval(*_enclose(ax[i + 1], prec)) - Interval(*_enclose(ax[i], prec)))
        return v


def step_integral(s: StepFunction) -> Fraction:
    """Exact integral of a step function with rational data."""
    if not s.is_rational:
        raise InvalidInput("step_integral needs rational data; use step_integral_enclosure")
    return sum((s.values[i] * s.cell_volume(i) for i in s.cells()), Fraction(0))


def step_integral_enclosure(s: StepFunction, prec: int = IV_PREC) -> Interval:
    total = Interval(0)
    for i in s.cells():
        total = total + Interval(*_enclose(s.values[i], prec)) * s.cell_volume_enclosure(i, prec)
    return total


def step_sandwich(
    f: BoundedFn, a: Sequence, b: Sequence, eps=Fraction(1, 100), *, max_cells: int = 1 << 22
) -> tuple[StepFunction, StepFunction]:
    """Step functions ``sigma <= f <= tau`` whose integrals differ by less than ``eps``."""
    eps = to_fraction(eps, what="eps")
    rep = riemann_integrate(f, a, b, eps, max_cells=max_cells)
    if not rep.integrable_at_eps:
        raise PreconditionFailure(
            f"{f.label} is not certified integrable at eps={eps}",
            {"lower": rep.lower, "upper": rep.upper, "gaps": rep.diagnostics.get("gaps")},
        )
    grid = rep.witness
    while True:
        lows, highs = {}, {}
        for idx in product(*(range(s) for s in grid.shape)):
            lows[idx], highs[idx] = f.range(grid.cell(idx))
        sigma, tau = StepFunction(grid.axes, lows), StepFunction(grid.axes, highs)
        if step_integral(tau) - step_integral(sigma) < eps:
            return sigma, tau
        # per-cell rational enclosures can differ slightly from the vectorized ones
        if grid.cell_count * (1 << grid.dim) > max_cells:
            raise PreconditionFailure("sandwich gap did not drop below eps within the cell budget")
        grid = GridPartition.uniform(grid.a, grid.b, [2 * s for s in grid.shape])


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in ``[lo, hi]``."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise InvalidInput("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


@dataclass
class RationalizeReport:
    lower: StepFunction
    upper: StepFunction
    integral: Interval
    integral_lower: Fraction
    integral_upper: Fraction
    eps: Fraction
    pointwise_ok: bool

    @property
    def slack_lower(self) -> Fraction:
        """Upper bound on ``integral(s) - integral(s_minus)``."""
        return self.integral.hi - self.integral_lower

    @property
    def slack_upper(self) -> Fraction:
        return self.integral_upper - self.integral.lo

    @property
    def ok(self) -> bool:
        return (
            self.pointwise_ok
            and self.integral.hi - self.eps <= self.integral_lower
            and self.integral_upper <= self.integral.lo + self.eps
        )


# Each half of the budget is used at this fraction so that the enclosure of
# the irrational integral still fits inside eps.
_SAFETY = Fraction(7, 8)


def _tight(x, width: Fraction) -> tuple[Fraction, Fraction]:
    prec = IV_PREC
    lo, hi = _enclose(x, prec)
    while hi - lo > width:
        prec *= 2
        lo, hi = _enclose(x, prec)
    return lo, hi


def rationalize_step(s: StepFunction, eps) -> RationalizeReport:
    """Rational step functions ``s_minus <= s <= s_plus`` with integrals within ``eps`` of ``s``.

    Half the budget rounds the constants, half moves irrational breakpoints
    to rational pairs that straddle them.  The outer corners must be
    rational.
    """
    eps = to_fraction(eps, what="eps")
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    for i, ax in enumerate(s.axes):
        if not (_is_rational(ax[0]) and _is_rational(ax[-1])):
            raise InvalidInput(f"the rectangle corners on axis {i} must be rational")
    if s.is_rational:
        I = step_integral(s)
        return RationalizeReport(s, s, Interval(I), I, I, eps, True)

    sides = [Fraction(ax[-1]) - Fraction(ax[0]) for ax in s.axes]
    V = math.prod(sides, start=Fraction(1))
    delta = _SAFETY * eps / (2 * V)
    down_c, up_c = {}, {}
    for idx, c in s.values.items():
        if _is_rational(c):
            down_c[idx] = up_c[idx] = c
            continue
        lo, hi = _tight(c, delta / 2)
        down_c[idx] = simplest_between(hi - delta, lo)
        up_c[idx] = simplest_between(hi, lo + delta)

    R = max(up_c.values()) - min(down_c.values())
    irr = [(i, j) for i, ax in enumerate(s.axes) for j in range(1, len(ax) - 1) if not _is_rational(ax[j])]
    new_axes, origin = [], []
    for i, ax in enumerate(s.axes):
        cross = V / sides[i]
        if irr and R > 0:
            width = _SAFETY * eps / (2 * R * len(irr) * cross)
        else:
            width = None
        encl = [_enclose(p) for p in ax]
        pts: list[Fraction] = []
        owners: list[tuple[int, ...]] = []  # original slabs each new slab meets
        pts.append(Fraction(ax[0]))
        for j in range(1, len(ax) - 1):
            p = ax[j]
            if _is_rational(p):
                owners.append((j - 1,))
                pts.append(Fraction(p))
                continue
            # keep the straddle well clear of the neighbouring breakpoints
            room = min(encl[j][0] - encl[j - 1][1], encl[j + 1][0] - encl[j][1]) / 4
            w = room if width is None else min(room, width / 2)
            lo, hi = _tight(p, w / 2)
            qm = simplest_between(hi - w, lo)
            qp = simplest_between(hi, lo + w)
            owners.append((j - 1,))
            pts.append(qm)
            owners.append((j - 1, j))
            pts.append(qp)
        owners.append((len(ax) - 2,))
        pts.append(Fraction(ax[-1]))
        new_axes.append(tuple(pts))
        origin.append(owners)

    lo_vals, hi_vals = {}, {}
    ok = True
    for idx in product(*(range(len(o)) for o in origin)):
        src = list(product(*(origin[i][k] for i, k in enumerate(idx))))
        lo_vals[idx] = min(down_c[o] for o in src)
        hi_vals[idx] = max(up_c[o] for o in src)
        # pointwise check against every original constant the cell can meet
        for o in src:
            clo, chi = _enclose(s.values[o])
            ok &= lo_vals[idx] <= clo and chi <= hi_vals[idx]
    s_minus = StepFunction(new_axes, lo_vals)
    s_plus = StepFunction(new_axes, hi_vals)
    enc = step_integral_enclosure(s, IV_PREC * 2)
    return RationalizeReport(s_minus, s_plus, enc, step_integral(s_minus), step_integral(s_plus), eps, ok)


# --- cross-check with the box algebra ---------------------------------------


def grid_box_check(
    f: BoundedFn, a: Sequence, b: Sequence, eps=Fraction(1, 4), *, schedule: str = "adaptive",
    max_cells: int = 1 << 16,
) -> CheckReport:
    """Integrate with grid partitions and with box partitions; compare the outcomes."""
    eps = to_fraction(eps, what="eps")
    grid_rep = riemann_integrate(f, a, b, eps, max_cells=max_cells)
    _, lam = restricted_algebra(a, b)
    box_rep = integrate(f, lam, eps, schedule=schedule, max_cells=max_cells)
    agree = grid_rep.integrable_at_eps == box_rep.integrable_at_eps
    overlap = grid_rep.lower <= box_rep.upper and box_rep.lower <= grid_rep.upper
    return CheckReport(
        "grid-vs-box",
        agree and overlap,
        {
            "grid": grid_rep,
            "box": box_rep,
            "certified_together": agree,
            "intervals_overlap": overlap,
        },
    )
