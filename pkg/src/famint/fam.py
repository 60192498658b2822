"""Finitely additive measures on finite set algebras.

A :class:`Fam` stores one exact weight per atom, which is all a finitely
additive set function on a finite algebra can carry; every member's value
is the sum of the weights of the atoms below it.  Constructors that start
from a full value map go through :func:`validate_fam`, which rejects maps
that are not additive and reports an offending pair.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Hashable, Iterable, Mapping

import numpy as np

from .algebra import (
    Element,
    Filter,
    FiniteAlgebra,
    GroundSet,
    generated_by_filter,
    negation_dual,
    preimage_hom,
)
from .errors import AdditivityFailure, CoverageFailure, InvalidInput, NonTrivialityError, ZeroMeasureError
from .rational import to_fraction


class Fam:
    """A finitely additive, non-negative, non-trivial set function."""

    __slots__ = ("algebra", "weights", "_bound")

    def __init__(self, algebra: FiniteAlgebra, weights: Iterable):
        weights = tuple(to_fraction(w, what="atom weight") for w in weights)
        if len(weights) != len(algebra.atoms):
            raise InvalidInput("need exactly one weight per atom")
        if any(w < 0 for w in weights):
            raise InvalidInput("measures are non-negative")
        total = sum(weights, Fraction(0))
        if total == 0:
            raise NonTrivialityError("the top element would have measure zero")
        self.algebra = algebra
        self.weights = weights
        self._bound = total

    @property
    def bound(self) -> Fraction:
        """Value at the top element."""
        return self._bound

    def __call__(self, e: Element) -> Fraction:
        self.algebra.require(e)
        m = e.mask
        return sum((w for t, w in zip(self.algebra.atoms, self.weights) if m & t.mask), Fraction(0))

    def value_by_atoms(self, idx: int) -> Fraction:
        """Value of the member whose atom-index mask is ``idx``."""
        return sum((w for j, w in enumerate(self.weights) if idx >> j & 1), Fraction(0))

    @property
    def values(self) -> dict[Element, Fraction]:
        return {e: self(e) for e in self.algebra.members}

    def __eq__(self, other):
        if not isinstance(other, Fam):
            return NotImplemented
        return self.algebra == other.algebra and self.weights == other.weights

    def __hash__(self):
        return hash((self.algebra, self.weights))

    def __repr__(self):
        pairs = ", ".join(f"{t!r}: {w}" for t, w in zip(self.algebra.atoms, self.weights))
        return f"Fam({{{pairs}}})"


def validate_fam(values: Mapping[Element, object], A: FiniteAlgebra) -> Fam:
    """Check that ``values`` is a finitely additive measure on ``A``.

    Raises :class:`AdditivityFailure` with an incompatible pair ``(a, b)``
    such that ``value(a | b) != value(a) + value(b)``.
    """
    vals: dict[int, Fraction] = {}
    for e, v in values.items():
        if e not in A:
            raise InvalidInput(f"{e!r} is not a member of the algebra")
        q = to_fraction(v, what=f"value at {e.bits()}")
        if q < 0:
            raise InvalidInput(f"negative value {q} at {e.bits()}")
        vals[e.mask] = q
    for e in A.members:
        if e.mask not in vals:
            raise InvalidInput(f"value map is missing member {e.bits()}")
    empty = A.bottom
    if vals[0] != 0:
        raise AdditivityFailure("the bottom element has nonzero value", (empty, empty))
    weights = [vals[t.mask] for t in A.atoms]
    # Checking each member against its atom sum, smallest first, is
    # equivalent to checking every incompatible pair; the first mismatch
    # splits as (first atom, rest) with both halves already consistent.
    order = sorted(range(len(A)), key=lambda i: (bin(i).count("1"), i))
    for idx in order:
        if bin(idx).count("1") < 2:
            continue
        b = A.from_atom_mask(idx)
        expect = sum((w for j, w in enumerate(weights) if idx >> j & 1), Fraction(0))
        if vals[b.mask] != expect:
            low = idx & -idx
            t = A.from_atom_mask(low)
            rest = A.from_atom_mask(idx ^ low)
            raise AdditivityFailure(
                f"value({b.bits()}) = {vals[b.mask]} but value({t.bits()}) + value({rest.bits()})"
                f" = {vals[t.mask] + vals[rest.mask]}",
                (t, rest),
            )
    if sum(weights, Fraction(0)) == 0:
        raise NonTrivialityError("the top element has measure zero")
    return Fam(A, weights)


@dataclass(frozen=True)
class FamClass:
    finite: bool
    probability: bool
    strictly_positive: bool
    free: bool | None  # None when some singleton is not measurable


def classify(m: Fam) -> FamClass:
    A = m.algebra
    singletons = [Element(A.ground, 1 << i) for i in range(A.ground.size)]
    if all(s in A for s in singletons):
        free = all(m(s) == 0 for s in singletons)
    else:
        free = None
    return FamClass(
        finite=True,
        probability=m.bound == 1,
        strictly_positive=all(w > 0 for w in m.weights),
        free=free,
    )


def uniform_fam(X: GroundSet, u: Iterable[Hashable]) -> Fam:
    """Uniform probability with finite support ``u`` on the power set of ``X``."""
    support = X.subset(u)
    if not support:
        raise InvalidInput("the support of a uniform measure must be nonempty")
    k = len(support)
    weights = [Fraction(1, k) if support.mask >> i & 1 else Fraction(0) for i in range(X.size)]
    return Fam(FiniteAlgebra.power_set(X), weights)


def counting_fam(X: GroundSet) -> Fam:
    """Normalized counting measure on the power set of ``X``."""
    return uniform_fam(X, X.elements)


def conditional_fam(m: Fam, b: Element) -> Fam:
    """``a -> m(a & b) / m(b)``."""
    mb = m(b)
    if mb == 0:
        raise ZeroMeasureError(f"cannot condition on {b!r}: it has measure zero")
    A = m.algebra
    weights = [w / mb if t <= b else Fraction(0) for t, w in zip(A.atoms, m.weights)]
    return Fam(A, weights)


def sigma_centered_fam(ultrafilters: list[Filter], *, normalize: bool = False) -> Fam:
    """Dyadic measure from a finite list of ultrafilters covering the nonzero members.

    ``b`` gets ``sum(2**-(n+1) for n with b in ultrafilters[n])``, so the top
    element gets ``1 - 2**-N``.  With ``normalize`` the result is rescaled
    to a probability.
    """
    if not ultrafilters:
        raise InvalidInput("need at least one ultrafilter")
    A = ultrafilters[0].algebra
    for n, F in enumerate(ultrafilters):
        if F.algebra != A:
            raise InvalidInput(f"ultrafilter {n} lives on a different algebra")
        if not F.is_ultrafilter():
            raise InvalidInput(f"filter {n} is not an ultrafilter")
    # upward closure means coverage of the atoms is coverage of every nonzero member
    for t in A.atoms:
        if not any(t in F for F in ultrafilters):
            raise CoverageFailure(
                f"{t.bits()} lies in none of the ultrafilters; the measure would not be strictly positive",
                t,
            )
    values = {}
    for b in A.members:
        values[b] = sum(
            (Fraction(1, 2 ** (n + 1)) for n, F in enumerate(ultrafilters) if b in F), Fraction(0)
        )
    fam = validate_fam(values, A)
    if normalize:
        scale = 1 / fam.bound
        fam = Fam(A, [w * scale for w in fam.weights])
    return fam


def filter_to_fam(F: Filter) -> Fam:
    """Two-valued probability on the subalgebra generated by ``F``: 1 on ``F``, 0 on its dual."""
    C = generated_by_filter(F)
    values = {e: Fraction(1) for e in F.members}
    values.update({e: Fraction(0) for e in negation_dual(F)})
    return validate_fam(values, C)


def is_two_valued(m: Fam) -> bool:
    return m.bound == 1 and all(w in (0, 1) for w in m.weights)


def fam_to_filter(m: Fam) -> Filter:
    """The filter ``{c : m(c) = 1}`` of a two-valued probability."""
    if not is_two_valued(m):
        raise InvalidInput("only two-valued probability measures correspond to filters")
    return Filter(m.algebra, frozenset(c for c in m.algebra.members if m(c) == 1))


def fam_leq(m1: Fam, m2: Fam, *, domain: str = "inclusion") -> bool:
    """Pointwise order of two measures on a shared ground set.

    ``domain="inclusion"`` requires the first domain to sit inside the
    second and compares there.  ``domain="common"`` compares only on the
    intersection of the two domains.
    """
    A1, A2 = m1.algebra, m2.algebra
    if A1.ground != A2.ground:
        raise InvalidInput("measures live on different ground sets")
    if domain == "inclusion":
        if not A1.is_subalgebra_of(A2):
            return False
        return all(m1(a) <= m2(a) for a in A1.members)
    if domain == "common":
        return all(m1(a) <= m2(a) for a in A1.members if a in A2)
    raise InvalidInput(f"unknown domain mode {domain!r}")


def pushforward_fam(m: Fam, h: Mapping | Callable, codomain: GroundSet | None = None) -> Fam:
    """Measure ``A -> m(h^{-1}[A])`` on the image algebra of ``h``."""
    phi = preimage_hom(h, m.algebra, codomain)
    return Fam(phi.image_algebra, [m(phi(t)) for t in phi.image_algebra.atoms])


def restrict_fam(m: Fam, E: Element) -> Fam:
    """Restriction to the trace algebra ``{E & b}`` on the ground set ``E``."""
    A = m.algebra
    A.require(E)
    if m(E) == 0:
        raise NonTrivialityError(f"{E!r} has measure zero; the restriction would be trivial")
    sub = GroundSet(x for x in A.ground if x in set(E))
    atoms, weights = [], []
    for t, w in zip(A.atoms, m.weights):
        if t <= E:
            atoms.append(sub.subset(t))
            weights.append(w)
    return Fam(FiniteAlgebra(sub, atoms), weights)


def trace(b: Element, sub: GroundSet) -> Element:
    """``b`` intersected with a sub-ground-set, as an element of that ground set."""
    return sub.subset(x for x in b if x in sub)


# --- identity suite -------------------------------------------------------


@dataclass
class IdentityReport:
    """Outcome of the basic-identity checks for one measure."""

    checked: dict[str, int] = field(default_factory=dict)
    failures: dict[str, list] = field(default_factory=dict)
    exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())


def _value_table(m: Fam) -> tuple[np.ndarray, int]:
    """Integer numerators (common denominator returned alongside) for every member."""
    den = lcm(*(w.denominator for w in m.weights))
    nums = [w.numerator * (den // w.denominator) for w in m.weights]
    k = len(nums)
    dtype = np.int64 if sum(nums) < 2**60 else object
    v = np.zeros(1 << k, dtype=dtype)
    for j, w in enumerate(nums):
        v[1 << j: 2 << j] = v[: 1 << j] + w
    return v, den


def measure_identities(
    m: Fam,
    *,
    rng: random.Random | None = None,
    exhaustive_atoms: int = 10,
    samples: int = 4096,
    families: int = 64,
) -> IdentityReport:
    """Check monotonicity, modularity, the difference bound, finite
    subadditivity and complementation on all member pairs of ``m``.

    Pairs are enumerated exhaustively up to ``exhaustive_atoms`` atoms and
    sampled beyond that.  Arithmetic is exact (integer numerators over a
    common denominator).
    """
    rng = rng or random.Random(0)
    v, _ = _value_table(m)
    k = len(m.weights)
    n = 1 << k
    full = n - 1
    rep = IdentityReport()
    if k <= exhaustive_atoms:
        I, J = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        I, J = I.ravel(), J.ravel()
    else:
        rep.exhaustive = False
        I = np.array([rng.randrange(n) for _ in range(samples)])
        J = np.array([rng.randrange(n) for _ in range(samples)])

    def record(name, bad):
        idx = np.flatnonzero(bad)
        rep.checked[name] = int(bad.size)
        rep.failures[name] = [(int(I[i]), int(J[i])) for i in idx[:5]]

    vi, vj = v[I], v[J]
    below = (I & J) == I
    record("monotone", below & ~(vi <= vj))
    record("modular", v[I | J] + v[I & J] != vi + vj)
    record("difference", ~(vi - vj <= v[I & ~J]))
    singles = np.arange(n) if k <= exhaustive_atoms else I
    bad = v[full] != v[singles] + v[full ^ singles]
    rep.checked["complement"] = int(singles.size)
    rep.failures["complement"] = [int(s) for s in np.flatnonzero(bad)[:5]]

    fails = []
    for _ in range(families):
        fam = [rng.randrange(n) for _ in range(rng.randint(1, 6))]
        joined = 0
        for a in fam:
            joined |= a
        total = sum(v[a] for a in fam)
        if v[joined] > total:
            fails.append(("subadditive", fam))
        # a disjoint family carved from the atoms
        pool = list(range(k))
        rng.shuffle(pool)
        parts, cur = [], 0
        for j in pool:
            cur |= 1 << j
            if rng.random() < 0.4:
                parts.append(cur)
                cur = 0
        parts.append(cur)
        joined = 0
        for a in parts:
            joined |= a
        if v[joined] != sum(v[a] for a in parts):
            fails.append(("additive", parts))
    rep.checked["finite_family"] = 2 * families
    rep.failures["finite_family"] = fails
    return rep


# --- a finitely additive measure that is not countably additive ------------


@dataclass(frozen=True)
class FinCofin:
    """A finite or cofinite subset of the naturals.

    ``points`` lists the members when ``cofinite`` is false and the
    omitted naturals when it is true.
    """

    points: frozenset
    cofinite: bool = False

    def __or__(self, other):
        a, b = self, other
        if not a.cofinite and not b.cofinite:
            return FinCofin(a.points | b.points)
        if a.cofinite and b.cofinite:
            return FinCofin(a.points & b.points, True)
        fin, co = (a, b) if b.cofinite else (b, a)
        return FinCofin(co.points - fin.points, True)

    def __invert__(self):
        return FinCofin(self.points, not self.cofinite)

    def __and__(self, other):
        return ~(~self | ~other)

    def isdisjoint(self, other) -> bool:
        return (self & other) == FinCofin(frozenset())


def cofinite_measure(s: FinCofin) -> int:
    """The two-valued measure of the cofinite ultrafilter: 1 on cofinite sets, 0 on finite ones."""
    return 1 if s.cofinite else 0


def countable_additivity_counterexample(terms: int = 64) -> dict:
    """Singletons ``{n}`` partition the naturals, yet each has measure 0
    while the whole set has measure 1.

    The finite part of the sum is computed explicitly; every further term
    is a singleton as well, so the full series is 0.
    """
    partial = sum(cofinite_measure(FinCofin(frozenset({n}))) for n in range(terms))
    whole = cofinite_measure(FinCofin(frozenset(), True))
    return {
        "algebra": "finite and cofinite subsets of the naturals",
        "measure": "1 on cofinite sets, 0 on finite sets",
        "partition": "singletons {n}, n = 0, 1, 2, ...",
        "terms_evaluated": terms,
        "sum_of_parts": partial,
        "measure_of_union": whole,
        "countably_additive": partial == whole,
    }
