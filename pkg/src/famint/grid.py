"""Grid partitions of a closed rectangle and their Darboux sums.

Sums are certified in one of two ways.  Small grids are handled cell by
cell with exact rational interval evaluation.  Large grids of expression
functions are evaluated in numpy chunks with outward rounding, and the sums
are bounded with a correctly rounded ``fsum`` widened by one ulp.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidFunction, InvalidInput
from .function import BoundedFn
from .interval import VecInterval, certified_sum, down, frac_down, frac_up, up
from .rect import Box, _point

#: Grids with at most this many cells are summed exactly, cell by cell.
EXACT_CELL_LIMIT = 4096
#: Cells per vectorized chunk.
CHUNK_CELLS = 1 << 20


@dataclass(frozen=True)
class GridPartition:
    """Per-axis breakpoints ``a_i = p_0 < ... < p_k = b_i`` of ``[a, b]``."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(tuple(_point(ax)) for ax in self.axes)
        if not axes:
            raise InvalidInput("a grid needs at least one axis")
        for i, ax in enumerate(axes):
            if len(ax) < 2:
                raise InvalidInput(f"axis {i} needs at least two breakpoints")
            if any(p >= q for p, q in zip(ax, ax[1:])):
                raise InvalidInput(f"axis {i} breakpoints are not strictly increasing")
        object.__setattr__(self, "axes", axes)

    @classmethod
    def uniform(cls, a: Sequence, b: Sequence, n: int | Sequence[int]) -> "GridPartition":
        a, b = _point(a), _point(b)
        ns = [n] * len(a) if isinstance(n, int) else list(n)
        if any(x >= y for x, y in zip(a, b)):
            raise InvalidInput("grid partitions need a nondegenerate rectangle")
        return cls(tuple(tuple(x + (y - x) * j / k for j in range(k + 1)) for x, y, k in zip(a, b, ns)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def a(self) -> tuple:
        return tuple(ax[0] for ax in self.axes)

    @property
    def b(self) -> tuple:
        return tuple(ax[-1] for ax in self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax) - 1 for ax in self.axes)

    @property
    def cell_count(self) -> int:
        return int(np.prod(self.shape, dtype=object))

    @property
    def is_uniform(self) -> bool:
        return all(len({q - p for p, q in zip(ax, ax[1:])}) == 1 for ax in self.axes)

    def cell(self, idx: Sequence[int]) -> Box:
        return Box(
            tuple(ax[i] for ax, i in zip(self.axes, idx)), tuple(ax[i + 1] for ax, i in zip(self.axes, idx))
        )

    def cells(self) -> Iterator[Box]:
        for idx in product(*(range(s) for s in self.shape)):
            yield self.cell(idx)

    def locate(self, point: Sequence) -> tuple[int, ...]:
        """Index of the lower-closed cell holding ``point``; the top face belongs to the last cell."""
        idx = []
        for ax, x in zip(self.axes, point):
            if not ax[0] <= x <= ax[-1]:
                raise InvalidInput(f"point {tuple(point)} lies outside the grid")
            idx.append(min(bisect_right(ax, x) - 1, len(ax) - 2))
        return tuple(idx)

    def refines(self, other: "GridPartition") -> bool:
        return self.dim == other.dim and all(set(o) <= set(s) for s, o in zip(self.axes, other.axes))

    def common_refinement(self, other: "GridPartition") -> "GridPartition":
        if self.a != other.a or self.b != other.b:
            raise InvalidInput("grids of different rectangles")
        return GridPartition(tuple(tuple(sorted(set(s) | set(o))) for s, o in zip(self.axes, other.axes)))

    def with_point(self, axis: int, p) -> "GridPartition":
        axes = list(self.axes)
        axes[axis] = tuple(sorted(set(axes[axis]) | {Fraction(p)}))
        return GridPartition(tuple(axes))

    def volumes(self) -> Iterator[Fraction]:
        for box in self.cells():
            yield box.volume


def _exact_sums(f: BoundedFn, grid: GridPartition) -> tuple[Fraction, Fraction]:
    lo_sum = hi_sum = Fraction(0)
    for box in grid.cells():
        lo, hi = f.range(box)
        v = box.volume
        lo_sum += lo * v
        hi_sum += hi * v
    return lo_sum, hi_sum


def _axis_bounds(ax):
    pts = np.array([frac_down(p) for p in ax[:-1]]), np.array([frac_up(p) for p in ax[1:]])
    return pts


def _vector_sums(f: BoundedFn, grid: GridPartition) -> tuple[Fraction, Fraction]:
    expr = f.expression
    dim = grid.dim
    shape = grid.shape
    bounds = [_axis_bounds(ax) for ax in grid.axes]
    uniform = grid.is_uniform
    if uniform:
        vol = Fraction(1)
        for ax in grid.axes:
            vol *= ax[1] - ax[0]
    else:
        widths = [
            (np.array([frac_down(q - p) for p, q in zip(ax, ax[1:])]),
             np.array([frac_up(q - p) for p, q in zip(ax, ax[1:])]))
            for ax in grid.axes
        ]
    inner = int(np.prod(shape[1:])) if dim > 1 else 1
    rows = max(1, CHUNK_CELLS // inner)
    lo_total = hi_total = Fraction(0)
    for start in range(0, shape[0], rows):
        stop = min(shape[0], start + rows)
        lows, highs = [], []
        for i in range(dim):
            lo_i, hi_i = bounds[i]
            if i == 0:
                lo_i, hi_i = lo_i[start:stop], hi_i[start:stop]
            view = [1] * dim
            view[i] = -1
            lows.append(lo_i.reshape(view))
            highs.append(hi_i.reshape(view))
        r = expr.enclose_vec(lows, highs)
        cshape = (stop - start,) + tuple(shape[1:])
        rlo = np.broadcast_to(r.lo, cshape)
        rhi = np.broadcast_to(r.hi, cshape)
        if np.any(rlo > rhi):
            raise InvalidFunction(f"inverted enclosure for {f.label}")
        if uniform:
            lo_total += certified_sum(rlo, -1)
            hi_total += certified_sum(rhi, +1)
        else:
            vlo = np.ones(cshape)
            vhi = np.ones(cshape)
            for i in range(dim):
                wl, wh = widths[i]
                if i == 0:
                    wl, wh = wl[start:stop], wh[start:stop]
                view = [1] * dim
                view[i] = -1
                vlo = down(vlo * wl.reshape(view))
                vhi = up(vhi * wh.reshape(view))
            prod_ = VecInterval(rlo, rhi) * VecInterval(vlo, vhi)
            lo_total += certified_sum(prod_.lo, -1)
            hi_total += certified_sum(prod_.hi, +1)
    if uniform:
        return lo_total * vol, hi_total * vol
    return lo_total, hi_total


def grid_sums(f: BoundedFn, grid: GridPartition, *, exact_limit: int = EXACT_CELL_LIMIT) -> tuple[Fraction, Fraction]:
    """Certified ``(lower, upper)`` Darboux sums of ``f`` over the closed cells of ``grid``."""
    if f.expression is not None and grid.cell_count > exact_limit:
        return _vector_sums(f, grid)
    return _exact_sums(f, grid)
