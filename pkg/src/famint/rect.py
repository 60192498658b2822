"""Finite unions of half-open boxes with rational corners, and their volume.

A :class:`RectUnion` is always kept in canonical form: the union is cut
along the coordinates that actually matter, runs of cells are merged along
the last axis, and the resulting disjoint boxes are sorted by corner.  Two
unions describing the same point set therefore compare equal.
"""
from __future__ import annotations

import re
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, NonTrivialityError
from .rational import fmt, to_fraction


def _point(p) -> tuple[Fraction, ...]:
    return tuple(to_fraction(x, what="coordinate") for x in p)


@dataclass(frozen=True, order=True)
class Box:
    """The half-open box ``[lower, upper)``; empty when any side has zero length."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo, hi = _point(self.lower), _point(self.upper)
        if len(lo) != len(hi) or not lo:
            raise InvalidInput("box corners must have the same positive dimension")
        if any(a > b for a, b in zip(lo, hi)):
            raise InvalidInput(f"box lower corner {lo} is not below upper corner {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def is_empty(self) -> bool:
        return any(a == b for a, b in zip(self.lower, self.upper))

    @property
    def volume(self) -> Fraction:
        v = Fraction(1)
        for a, b in zip(self.lower, self.upper):
            v *= b - a
        return v

    def contains(self, point: Sequence, *, closed: bool = False) -> bool:
        if closed:
            return all(a <= x <= b for a, x, b in zip(self.lower, point, self.upper))
        return all(a <= x < b for a, x, b in zip(self.lower, point, self.upper))

    def translate(self, shift: Sequence) -> "Box":
        s = _point(shift)
        return Box(
            tuple(a + d for a, d in zip(self.lower, s)), tuple(b + d for b, d in zip(self.upper, s))
        )

    def longest_axis(self) -> int:
        sides = [b - a for a, b in zip(self.lower, self.upper)]
        return sides.index(max(sides))

    def split(self, axis: int) -> tuple["Box", "Box"]:
        mid = (self.lower[axis] + self.upper[axis]) / 2
        hi1 = self.upper[:axis] + (mid,) + self.upper[axis + 1:]
        lo2 = self.lower[:axis] + (mid,) + self.lower[axis + 1:]
        return Box(self.lower, hi1), Box(lo2, self.upper)

    def __str__(self):
        return "x".join(f"[{fmt(a)},{fmt(b)})" for a, b in zip(self.lower, self.upper))


_SIDE = re.compile(r"\[\s*([^,\[\]()]+?)\s*,\s*([^,\[\]()]+?)\s*([)\]])")


def parse_box(text: str) -> Box:
    """Read ``[p/q,r/s)x[...]``.

    A closing ``]`` is accepted for the top face of a closed rectangle; the
    face has measure zero, so the box stored is the half-open one.
    """
    parts = [s.strip() for s in text.strip().split("x")]
    lo, hi = [], []
    for i, part in enumerate(parts):
        m = _SIDE.fullmatch(part)
        if not m:
            raise InvalidInput(f"cannot read side {i + 1} of box literal {text!r}: {part!r}")
        lo.append(to_fraction(m.group(1), what=f"box side {i + 1}"))
        hi.append(to_fraction(m.group(2), what=f"box side {i + 1}"))
    return Box(tuple(lo), tuple(hi))


class RectUnion:
    """A finite union of half-open boxes in canonical form."""

    __slots__ = ("dim", "boxes")

    def __init__(self, dim: int, boxes: tuple[Box, ...] = ()):
        # callers outside this module should use canonicalize()
        self.dim = dim
        self.boxes = boxes

    @classmethod
    def of(cls, *boxes: Box) -> "RectUnion":
        return canonicalize(boxes)

    def _grid(self, coords):
        shape = tuple(len(c) - 1 for c in coords)
        arr = np.zeros(shape, dtype=bool)
        for bx in self.boxes:
            sl = tuple(
                slice(bisect_left(c, a), bisect_left(c, b)) for c, a, b in zip(coords, bx.lower, bx.upper)
            )
            arr[sl] = True
        return arr

    def _combine(self, other: "RectUnion", op) -> "RectUnion":
        other = as_union(other, self.dim)
        if other.dim != self.dim:
            raise InvalidInput("unions of different dimensions")
        coords = _coords(self.boxes + other.boxes, self.dim)
        if coords is None:
            return RectUnion(self.dim)
        return _from_grid(coords, op(self._grid(coords), other._grid(coords)))

    def __or__(self, other):
        return self._combine(other, np.logical_or)

    def __and__(self, other):
        return self._combine(other, np.logical_and)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a & ~b)

    def complement(self, ambient) -> "RectUnion":
        """Complement relative to ``ambient``; there is no absolute complement."""
        return as_union(ambient, self.dim) - self

    def __le__(self, other) -> bool:
        return not (self - other)

    def __bool__(self):
        return bool(self.boxes)

    def __eq__(self, other):
        if isinstance(other, Box):
            other = canonicalize([other])
        if not isinstance(other, RectUnion):
            return NotImplemented
        return self.dim == other.dim and self.boxes == other.boxes

    def __hash__(self):
        return hash((self.dim, self.boxes))

    def contains(self, point) -> bool:
        return any(b.contains(point) for b in self.boxes)

    @property
    def volume(self) -> Fraction:
        return sum((b.volume for b in self.boxes), Fraction(0))

    def __iter__(self):
        return iter(self.boxes)

    def __len__(self):
        return len(self.boxes)

    def __str__(self):
        return " u ".join(str(b) for b in self.boxes) if self.boxes else "{}"

    def __repr__(self):
        return f"RectUnion({self})"


def _coords(boxes, dim):
    boxes = [b for b in boxes if not b.is_empty]
    if not boxes:
        return None
    return [sorted({b.lower[i] for b in boxes} | {b.upper[i] for b in boxes}) for i in range(dim)]


def _from_grid(coords, arr) -> RectUnion:
    dim = len(coords)
    coords = [list(c) for c in coords]
    # merge neighbouring slabs that agree and trim empty slabs at both ends,
    # leaving only cuts that separate points of the set from points outside
    for ax in range(dim):
        c = coords[ax]
        slabs = [np.take(arr, k, axis=ax) for k in range(arr.shape[ax])]
        runs: list[list[int]] = []
        for k, slab in enumerate(slabs):
            if runs and np.array_equal(slabs[runs[-1][0]], slab):
                runs[-1][1] = k + 1
            else:
                runs.append([k, k + 1])
        while runs and not slabs[runs[0][0]].any():
            runs.pop(0)
        while runs and not slabs[runs[-1][0]].any():
            runs.pop()
        if not runs:
            return RectUnion(dim)
        coords[ax] = [c[r[0]] for r in runs] + [c[runs[-1][1]]]
        arr = np.stack([slabs[r[0]] for r in runs], axis=ax)
    return _boxes_from_grid(coords, arr)


def _boxes_from_grid(coords, arr) -> RectUnion:
    dim = len(coords)
    out = []
    for idx in product(*(range(s) for s in arr.shape[:-1])):
        row = arr[idx]
        k, n = 0, row.shape[0]
        while k < n:
            if row[k]:
                j = k
                while j < n and row[j]:
                    j += 1
                lo = tuple(coords[a][idx[a]] for a in range(dim - 1)) + (coords[-1][k],)
                hi = tuple(coords[a][idx[a] + 1] for a in range(dim - 1)) + (coords[-1][j],)
                out.append(Box(lo, hi))
                k = j
            else:
                k += 1
    out.sort()
    return RectUnion(dim, tuple(out))


def canonicalize(boxes: Iterable[Box], dim: int | None = None) -> RectUnion:
    """Canonical disjoint form of the union of ``boxes``."""
    boxes = list(boxes)
    if dim is None:
        if not boxes:
            raise InvalidInput("an empty union needs an explicit dimension")
        dim = boxes[0].dim
    if any(b.dim != dim for b in boxes):
        raise InvalidInput("boxes of different dimensions")
    coords = _coords(boxes, dim)
    if coords is None:
        return RectUnion(dim)
    return _from_grid(coords, RectUnion(dim, tuple(b for b in boxes if not b.is_empty))._grid(coords))


def as_union(x, dim: int | None = None) -> RectUnion:
    if isinstance(x, RectUnion):
        return x
    if isinstance(x, Box):
        return canonicalize([x])
    return canonicalize(list(x), dim)


def lambda_n(u) -> Fraction:
    """Volume: the sum over canonical boxes of the product of side lengths."""
    if isinstance(u, Box):
        return u.volume
    return as_union(u).volume


class RectAlgebra:
    """Finite unions of half-open boxes inside ``[a, b]``.

    The ambient carrier is the half-open box ``[a, b)``; the upper faces of
    the closed rectangle have volume zero and are absorbed into the cells
    touching them.  Range oracles evaluate over closed cells.
    """

    def __init__(self, a: Sequence, b: Sequence):
        a, b = _point(a), _point(b)
        if len(a) != len(b) or not a:
            raise InvalidInput("corners must have the same positive dimension")
        if any(x > y for x, y in zip(a, b)):
            raise InvalidInput(f"corner {a} is not below {b} coordinatewise")
        self.a, self.b = a, b
        self.dim = len(a)
        self.box = Box(a, b)

    @property
    def top(self) -> RectUnion:
        return canonicalize([self.box])

    @property
    def bottom(self) -> RectUnion:
        return RectUnion(self.dim)

    def __contains__(self, u) -> bool:
        if isinstance(u, Box):
            return u.dim == self.dim and all(
                x <= p and q <= y for x, p, q, y in zip(self.a, u.lower, u.upper, self.b)
            )
        return isinstance(u, RectUnion) and u.dim == self.dim and all(b in self for b in u.boxes)

    def require(self, u):
        if u not in self:
            raise InvalidInput(f"{u} does not lie inside the ambient rectangle {self.box}")
        return u

    def complement(self, u) -> RectUnion:
        return as_union(u, self.dim).complement(self.box)

    def __eq__(self, other):
        return isinstance(other, RectAlgebra) and (self.a, self.b) == (other.a, other.b)

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"RectAlgebra({self.box})"


class Lebesgue:
    """Volume restricted to a rectangle algebra, usable wherever a measure is expected."""

    def __init__(self, algebra: RectAlgebra):
        total = algebra.box.volume
        if total == 0:
            flat = [i for i, (x, y) in enumerate(zip(algebra.a, algebra.b)) if x == y]
            raise NonTrivialityError(
                f"degenerate rectangle: side(s) {flat} have zero length, so the total volume is 0"
            )
        self.algebra = algebra
        self.bound = total

    def __call__(self, u) -> Fraction:
        self.algebra.require(u)
        return lambda_n(u)

    def __repr__(self):
        return f"Lebesgue({self.algebra.box})"


def restricted_algebra(a: Sequence, b: Sequence) -> tuple[RectAlgebra, Lebesgue]:
    alg = RectAlgebra(a, b)
    return alg, Lebesgue(alg)


def reduce_union(items) -> RectUnion:
    return reduce(lambda u, v: u | v, items)
