"""The partition integral with respect to a finitely additive measure.

Works over two kinds of algebra:

* finite set algebras with a :class:`~famint.fam.Fam`, where the atom
  partition is the finest partition and the upper and lower integrals are
  computed exactly;
* rectangle algebras with :class:`~famint.rect.Lebesgue`, where they are
  approached by a refinement schedule and certified with interval bounds.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from .algebra import Element, FiniteAlgebra, GroundSet, preimage_hom
from .errors import HypothesisViolation, InvalidInput
from .fam import Fam, pushforward_fam
from .function import BoundedFn, compose
from .grid import GridPartition, grid_sums
from .rational import to_fraction
from .rect import Box, Lebesgue, RectAlgebra, RectUnion, as_union, canonicalize, lambda_n

DEFAULT_MAX_CELLS = 1 << 20


# --- partitions -------------------------------------------------------------


def _cell_union(alg, cell):
    return as_union(cell, alg.dim) if isinstance(alg, RectAlgebra) else cell


def _content(alg, cell) -> Fraction:
    """A size that is additive over disjoint cells: point count or volume."""
    if isinstance(alg, RectAlgebra):
        return lambda_n(cell)
    return Fraction(len(cell))


def _top_content(alg) -> Fraction:
    return lambda_n(alg.box) if isinstance(alg, RectAlgebra) else Fraction(alg.ground.size)


def _meet(a, b):
    if isinstance(a, Box) and isinstance(b, Box):
        lo = tuple(max(x, y) for x, y in zip(a.lower, b.lower))
        hi = tuple(min(x, y) for x, y in zip(a.upper, b.upper))
        return Box(lo, tuple(max(x, y) for x, y in zip(lo, hi)))
    if isinstance(a, Box):
        a = as_union(a)
    if isinstance(b, Box):
        b = as_union(b)
    return a & b


def _nonzero(c) -> bool:
    return not c.is_empty if isinstance(c, Box) else bool(c)


def _leq(a, b) -> bool:
    if isinstance(a, Box) and isinstance(b, Box):
        return a.is_empty or all(
            p <= x and y <= q for p, x, y, q in zip(b.lower, a.lower, a.upper, b.upper)
        )
    if isinstance(a, Element):
        return a <= b
    return as_union(a) <= as_union(b)


def is_partition(cells: Sequence, algebra) -> bool:
    """Nonzero, pairwise disjoint members of ``algebra`` whose union is the top.

    Disjointness is checked through content: cells are disjoint exactly
    when their contents sum to the content of their union (nonempty
    half-open boxes that overlap share positive volume).
    """
    cells = list(cells)
    if not cells:
        return False
    for c in cells:
        if c not in algebra or not _nonzero(c):
            return False
    if isinstance(algebra, RectAlgebra):
        union = canonicalize([b for c in cells for b in _cell_union(algebra, c).boxes], algebra.dim)
        if union != algebra.top:
            return False
    else:
        mask = 0
        for c in cells:
            mask |= c.mask
        if mask != algebra.top.mask:
            return False
    return sum((_content(algebra, c) for c in cells), Fraction(0)) == _top_content(algebra)


class FinitePartition:
    """A validated finite partition of the top element into algebra members."""

    __slots__ = ("algebra", "cells")

    def __init__(self, algebra, cells: Sequence, *, check: bool = True):
        cells = tuple(cells)
        if check and not is_partition(cells, algebra):
            raise InvalidInput("cells do not partition the top element")
        self.algebra = algebra
        self.cells = cells

    @classmethod
    def trivial(cls, algebra) -> "FinitePartition":
        top = algebra.box if isinstance(algebra, RectAlgebra) else algebra.top
        return cls(algebra, [top], check=False)

    @classmethod
    def atoms(cls, algebra: FiniteAlgebra) -> "FinitePartition":
        return cls(algebra, algebra.atoms, check=False)

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __repr__(self):
        return f"FinitePartition({len(self.cells)} cells)"


class GridWitness:
    """A uniform grid used as a witness partition without materializing its cells."""

    def __init__(self, grid: GridPartition, algebra: RectAlgebra):
        self.grid = grid
        self.algebra = algebra

    def __len__(self):
        return self.grid.cell_count

    @property
    def cells(self) -> tuple[Box, ...]:
        return tuple(self.grid.cells())

    def __iter__(self):
        return self.grid.cells()

    def __repr__(self):
        return f"GridWitness({'x'.join(map(str, self.grid.shape))} cells)"


def refines(Q, P) -> bool:
    """Every cell of ``Q`` lies inside some cell of ``P``."""
    return all(any(_leq(q, p) for p in P.cells) for q in Q.cells)


def meet_partition(P, Q) -> FinitePartition:
    """All nonzero pairwise intersections, ordered by the ``P`` cell first."""
    if P.algebra != Q.algebra:
        raise InvalidInput("partitions of different algebras")
    cells = []
    for p in P.cells:
        for q in Q.cells:
            c = _meet(p, q)
            if _nonzero(c):
                cells.append(c)
    return FinitePartition(P.algebra, cells, check=False)


# --- sums -------------------------------------------------------------------


def upper_sum(f: BoundedFn, P, m) -> Fraction:
    return sum((f.range(c)[1] * m(c) for c in P.cells), Fraction(0))


def lower_sum(f: BoundedFn, P, m) -> Fraction:
    return sum((f.range(c)[0] * m(c) for c in P.cells), Fraction(0))


def darboux_sums(f: BoundedFn, P, m) -> tuple[Fraction, Fraction]:
    lo = hi = Fraction(0)
    for c in P.cells:
        a, b = f.range(c)
        w = m(c)
        lo += a * w
        hi += b * w
    return lo, hi


@dataclass
class IntegralReport:
    """Outcome of an integration run.

    ``integrable`` is the exact decision on finite algebras and ``None``
    where only enclosures are available.  ``value`` and ``error_bound`` are
    set once the gap is below ``eps``.
    """

    lower: Fraction
    upper: Fraction
    eps: Fraction
    integrable_at_eps: bool
    witness: object = None
    value: Fraction | None = None
    error_bound: Fraction | None = None
    integrable: bool | None = None
    certified: bool = True
    schedule: str = "atoms"
    diagnostics: dict = field(default_factory=dict)

    @property
    def gap(self) -> Fraction:
        return self.upper - self.lower

    @property
    def witness_cell_count(self) -> int:
        if self.witness is None:
            return 0
        count = getattr(self.witness, "cell_count", None)
        return count if count is not None else len(self.witness)

    def encloses(self, x) -> bool:
        return self.lower <= x <= self.upper


def _report(lower, upper, eps, witness, *, f: BoundedFn, **kw) -> IntegralReport:
    ok = (upper - lower) < eps and f.certified
    rep = IntegralReport(lower, upper, eps, ok, witness, certified=f.certified, **kw)
    if ok:
        rep.value = (lower + upper) / 2
        rep.error_bound = (upper - lower) / 2
    return rep


def integrate(
    f: BoundedFn,
    m,
    eps=Fraction(1, 1000),
    *,
    schedule: str = "uniform",
    max_cells: int = DEFAULT_MAX_CELLS,
) -> IntegralReport:
    """Integrate ``f`` against ``m`` and decide integrability at ``eps``."""
    eps = to_fraction(eps, what="eps")
    if eps <= 0:
        raise InvalidInput("eps must be positive")
    if isinstance(m, Fam):
        P = FinitePartition.atoms(m.algebra)
        lo, hi = darboux_sums(f, P, m)
        integrable = (lo == hi) if f.exact else None
        return _report(lo, hi, eps, P, f=f, integrable=integrable, schedule="atoms")
    if isinstance(m, Lebesgue):
        if schedule == "uniform":
            return _uniform(f, m, eps, max_cells)
        if schedule == "adaptive":
            return _adaptive(f, m, eps, max_cells)
        raise InvalidInput(f"unknown schedule {schedule!r}; use 'uniform' or 'adaptive'")
    raise InvalidInput(f"cannot integrate against {type(m).__name__}")


def _uniform(f, m: Lebesgue, eps, max_cells) -> IntegralReport:
    alg = m.algebra
    level, best = 0, None
    gaps = []
    while True:
        n = 1 << level
        if n ** alg.dim > max_cells:
            break
        grid = GridPartition.uniform(alg.a, alg.b, n)
        lo, hi = grid_sums(f, grid)
        gaps.append(hi - lo)
        best = (lo, hi, grid)
        if hi - lo < eps:
            break
        level += 1
    lo, hi, grid = best
    return _report(
        lo, hi, eps, GridWitness(grid, alg), f=f, schedule="uniform",
        diagnostics={"levels": len(gaps), "cells_per_axis": 1 << (len(gaps) - 1), "gaps": gaps},
    )


def _adaptive(f, m: Lebesgue, eps, max_cells) -> IntegralReport:
    alg = m.algebra
    counter = 0
    heap = []

    def push(box):
        nonlocal counter
        lo, hi = f.range(box)
        v = box.volume
        heapq.heappush(heap, (-(hi - lo) * v, counter, box, lo * v, hi * v))
        counter += 1
        return lo * v, hi * v

    lo_sum, hi_sum = push(alg.box)
    splits = 0
    while hi_sum - lo_sum >= eps and len(heap) < max_cells:
        score, _, box, l, h = heapq.heappop(heap)
        if score == 0:
            heapq.heappush(heap, (score, _, box, l, h))
            break
        lo_sum -= l
        hi_sum -= h
        for child in box.split(box.longest_axis()):
            a, b = push(child)
            lo_sum += a
            hi_sum += b
        splits += 1
    cells = sorted((item[2] for item in heap))
    P = FinitePartition(alg, cells, check=False)
    return _report(lo_sum, hi_sum, eps, P, f=f, schedule="adaptive", diagnostics={"splits": splits})


# --- transfer identities ----------------------------------------------------


@dataclass
class CheckReport:
    name: str
    ok: bool
    details: dict = field(default_factory=dict)


def _finite_integral(f: BoundedFn, m: Fam) -> tuple[Fraction, Fraction]:
    return darboux_sums(f, FinitePartition.atoms(m.algebra), m)


def _as_fn(f, points, label="f") -> BoundedFn:
    if isinstance(f, BoundedFn):
        return f
    if isinstance(f, Mapping):
        return BoundedFn.on_points(f, label)
    return BoundedFn.from_callable(f, points, label)


def pushforward_integral_check(
    f, h: Mapping | Callable, m: Fam, codomain: GroundSet | None = None
) -> CheckReport:
    """Compare ``f`` against the pushforward measure with ``f o h`` against ``m``.

    Verifies the sum identity on the refined image partition, the chain
    ``L_Y <= L_X <= U_X <= U_Y``, equality of integrals whenever ``f`` is
    integrable, and the converse transfer when ``h`` is one-to-one.
    """
    phi = preimage_hom(h, m.algebra, codomain)
    Y = phi.codomain
    f = _as_fn(f, Y.elements)
    mh = pushforward_fam(m, phi.h, Y)
    fh = compose(f, phi.h, m.algebra.ground.elements)
    details: dict = {}
    ok = True

    # refine the image partition by the range of h and pull it back
    ran = phi.range_element
    P = [t for t in phi.image_algebra.atoms]
    Pbullet = [c for p in P for c in (p & ran, p - ran) if c]
    Q = [phi(c) for c in Pbullet if c <= ran]
    sy = (sum((f.range(c)[0] * mh(c) for c in Pbullet), Fraction(0)),
          sum((f.range(c)[1] * mh(c) for c in Pbullet), Fraction(0)))
    sx = (sum((fh.range(c)[0] * m(c) for c in Q), Fraction(0)),
          sum((fh.range(c)[1] * m(c) for c in Q), Fraction(0)))
    details["refined_sums_equal"] = sy == sx
    ok &= sy == sx

    LY, UY = _finite_integral(f, mh)
    LX, UX = _finite_integral(fh, m)
    details.update(lower_Y=LY, upper_Y=UY, lower_X=LX, upper_X=UX)
    chain = LY <= LX <= UX <= UY
    details["chain"] = chain
    ok &= chain
    y_int = LY == UY
    details["integrable_Y"] = y_int
    if y_int:
        eq = LX == UX == LY
        details["integrals_equal"] = eq
        ok &= eq
    injective = len(set(phi.h.values())) == len(phi.h)
    details["injective"] = injective
    if injective:
        # push each pulled-back atom forward again, plus the complement of the range
        Pimg = [phi.image(t) for t in m.algebra.atoms]
        rest = ~ran
        if rest:
            Pimg.append(rest)
        sy2 = (sum((f.range(c)[0] * mh(c) for c in Pimg), Fraction(0)),
               sum((f.range(c)[1] * mh(c) for c in Pimg), Fraction(0)))
        conv = sy2 == (LX, UX)
        if LX == UX:
            conv &= LY == UY == LX
        details["converse"] = conv
        ok &= conv
    return CheckReport("pushforward", ok, details)


def restriction_integral_check(g, X: Sequence[Hashable], m_X: Fam, m_Y: Fam) -> CheckReport:
    """Restrict ``g`` from ``Y`` to the subset ``X`` under compatible measures.

    Requires every member of ``m_Y``'s algebra to pull back into ``m_X``'s
    algebra with the same measure; otherwise :class:`HypothesisViolation`.
    """
    Y = m_Y.algebra.ground
    inc = {x: x for x in X}
    if m_X.algebra.ground != GroundSet(X):
        raise InvalidInput("m_X must live on the ground set X")
    for x in X:
        if x not in Y:
            raise InvalidInput(f"{x!r} is not a point of Y")
    phi = preimage_hom(inc, m_X.algebra, Y)
    for t, w in zip(m_Y.algebra.atoms, m_Y.weights):
        if t not in phi.image_algebra:
            raise HypothesisViolation(f"{t!r} does not pull back into the algebra on X", t)
        if m_X(phi(t)) != w:
            raise HypothesisViolation(
                f"measures disagree on {t!r}: {w} on Y versus {m_X(phi(t))} on X", t
            )
    g = _as_fn(g, Y.elements, "g")
    gx = compose(g, inc, X)
    LY, UY = _finite_integral(g, m_Y)
    LX, UX = _finite_integral(gx, m_X)
    details = dict(lower_Y=LY, upper_Y=UY, lower_X=LX, upper_X=UX, integrable_Y=LY == UY)
    ok = True
    if LY == UY:
        ok = LX == UX == LY
    details["integrals_equal"] = ok if LY == UY else None
    return CheckReport("restriction", ok, details)


def extension_integral_check(f, m0: Fam, m1: Fam) -> CheckReport:
    """Integrability under ``m0`` transfers to an extension ``m1`` with the same value."""
    A0, A1 = m0.algebra, m1.algebra
    if not A0.is_subalgebra_of(A1):
        raise HypothesisViolation("the first algebra is not a subalgebra of the second")
    for t, w in zip(A0.atoms, m0.weights):
        if m1(t) != w:
            raise HypothesisViolation(f"m1 does not extend m0 at {t!r}", t)
    f = _as_fn(f, A0.ground.elements)
    L0, U0 = _finite_integral(f, m0)
    L1, U1 = _finite_integral(f, m1)
    ok = L0 <= L1 <= U1 <= U0
    if L0 == U0:
        ok &= L1 == U1 == L0
    return CheckReport("extension", ok, dict(lower_0=L0, upper_0=U0, lower_1=L1, upper_1=U1))


def random_pushforward_instance(rng: random.Random, max_points: int = 8):
    """A random ``(f, h, m, Y)`` with ``f`` integrable for the pushforward measure.

    ``f`` is constant on every image atom of positive measure and arbitrary
    elsewhere, so both sides of the transfer identity are exact integrals.
    """
    from .algebra import make_algebra
    from .fam import Fam as _Fam

    nx = rng.randint(1, max_points)
    X = GroundSet(range(nx))
    gens = [Element(X, rng.randrange(1 << nx)) for _ in range(rng.randint(0, 3))]
    A = make_algebra(X, gens)
    weights = [Fraction(rng.randint(0, 5), rng.randint(1, 6)) for _ in A.atoms]
    if not any(weights):
        weights[rng.randrange(len(weights))] = Fraction(1)
    m = _Fam(A, weights)
    ny = rng.randint(1, max_points)
    Y = GroundSet(f"y{j}" for j in range(ny))
    h = {x: Y.elements[rng.randrange(ny)] for x in X}
    phi = preimage_hom(h, A, Y)
    mh = pushforward_fam(m, h, Y)
    f = {}
    for t in phi.image_algebra.atoms:
        if mh(t) > 0:
            c = Fraction(rng.randint(-9, 9), rng.randint(1, 4))
            f.update({y: c for y in t})
        else:
            f.update({y: Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for y in t})
    return f, h, m, Y
