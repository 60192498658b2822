"""Finite Boolean set algebras, filters, ideals and preimage homomorphisms.

Elements are subsets of a fixed finite ground set stored as integer
membership masks (bit ``i`` set iff ``ground[i]`` is in the subset).  An
algebra is determined by its atoms, which partition the ground set; its
members are all unions of atoms and are only materialized on demand.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Callable, Hashable, Iterable, Iterator, Mapping

from .errors import InvalidInput

#: Soft cap on ground-set size; closure can reach ``2**|X|`` members.
DEFAULT_MAX_GROUND = 24


class GroundSet:
    """An ordered finite set of distinct, hashable point identifiers."""

    __slots__ = ("elements", "_index", "_hash")

    def __init__(self, elements: Iterable[Hashable]):
        elements = tuple(elements)
        if not elements:
            raise InvalidInput("ground set must have at least one element")
        index = {}
        for i, x in enumerate(elements):
            if x in index:
                raise InvalidInput(f"duplicate ground element {x!r}")
            index[x] = i
        self.elements = elements
        self._index = index
        self._hash = hash(elements)

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, GroundSet) and self.elements == other.elements

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"GroundSet({list(self.elements)!r})"

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise InvalidInput(f"{x!r} is not in the ground set") from None

    def __contains__(self, x) -> bool:
        return x in self._index

    def subset(self, points: Iterable[Hashable]) -> "Element":
        mask = 0
        for x in points:
            mask |= 1 << self.index(x)
        return Element(self, mask)

    def from_bits(self, bits: str) -> "Element":
        """Parse a bitstring whose ``i``-th character is membership of ``ground[i]``."""
        if len(bits) != self.size or set(bits) - {"0", "1"}:
            raise InvalidInput(
                f"bitstring {bits!r} must be {self.size} characters of 0/1"
            )
        mask = 0
        for i, ch in enumerate(bits):
            if ch == "1":
                mask |= 1 << i
        return Element(self, mask)

    @property
    def empty(self) -> "Element":
        return Element(self, 0)

    @property
    def full(self) -> "Element":
        return Element(self, (1 << self.size) - 1)


class Element:
    """A subset of a ground set; supports ``& | ~ -`` and ``<=`` (inclusion)."""

    __slots__ = ("ground", "mask")

    def __init__(self, ground: GroundSet, mask: int):
        if mask < 0 or mask >> ground.size:
            raise InvalidInput(f"mask {mask} does not fit a ground set of size {ground.size}")
        self.ground = ground
        self.mask = mask

    def _check(self, other: "Element") -> None:
        if not isinstance(other, Element):
            raise InvalidInput(f"expected an algebra element, got {type(other).__name__}")
        if self.ground is not other.ground and self.ground != other.ground:
            raise InvalidInput("elements live on different ground sets")

    def __and__(self, other):
        self._check(other)
        return Element(self.ground, self.mask & other.mask)

    def __or__(self, other):
        self._check(other)
        return Element(self.ground, self.mask | other.mask)

    def __sub__(self, other):
        self._check(other)
        return Element(self.ground, self.mask & ~other.mask)

    def __invert__(self):
        return Element(self.ground, ((1 << self.ground.size) - 1) ^ self.mask)

    def __le__(self, other):
        self._check(other)
        return self.mask & other.mask == self.mask

    def __lt__(self, other):
        return self <= other and self.mask != other.mask

    def __ge__(self, other):
        return other <= self

    def __gt__(self, other):
        return other < self

    def incompatible(self, other) -> bool:
        self._check(other)
        return self.mask & other.mask == 0

    def __bool__(self):
        return self.mask != 0

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.mask == other.mask and (
            self.ground is other.ground or self.ground == other.ground
        )

    def __hash__(self):
        return hash(self.mask)

    def __len__(self):
        return bin(self.mask).count("1")

    def __iter__(self) -> Iterator[Hashable]:
        m, i = self.mask, 0
        while m:
            if m & 1:
                yield self.ground.elements[i]
            m >>= 1
            i += 1

    def bits(self) -> str:
        return "".join("1" if self.mask >> i & 1 else "0" for i in range(self.ground.size))

    def __repr__(self):
        return "{" + ",".join(str(x) for x in self) + "}"


# plain-function forms of the Boolean operations


def meet(a: Element, b: Element) -> Element:
    return a & b


def join(a: Element, b: Element) -> Element:
    return a | b


def complement(a: Element) -> Element:
    return ~a


def difference(a: Element, b: Element) -> Element:
    return a - b


def leq(a: Element, b: Element) -> bool:
    return a <= b


def incompatible(a: Element, b: Element) -> bool:
    return a.incompatible(b)


class FiniteAlgebra:
    """A Boolean subalgebra of the power set of a finite ground set.

    Built from its atoms (a partition of the ground set into nonempty
    blocks).  Use :func:`make_algebra` or :meth:`from_members` rather than
    calling the constructor with unchecked atoms.
    """

    def __init__(self, ground: GroundSet, atoms: Iterable[Element]):
        atoms = sorted(atoms, key=lambda t: t.mask)
        seen = 0
        for t in atoms:
            if t.ground != ground:
                raise InvalidInput("atom on a different ground set")
            if not t:
                raise InvalidInput("atoms must be nonempty")
            if t.mask & seen:
                raise InvalidInput(f"atoms overlap at {t!r}")
            seen |= t.mask
        if seen != ground.full.mask:
            raise InvalidInput("atoms do not cover the ground set")
        self.ground = ground
        self.atoms: tuple[Element, ...] = tuple(atoms)
        self._atom_masks = tuple(t.mask for t in atoms)

    @classmethod
    def power_set(cls, ground: GroundSet) -> "FiniteAlgebra":
        return cls(ground, [Element(ground, 1 << i) for i in range(ground.size)])

    @classmethod
    def from_members(cls, ground: GroundSet, members: Iterable[Element]) -> "FiniteAlgebra":
        """Validate an explicit member set and build the algebra.

        Raises :class:`InvalidInput` naming an element the set is missing
        when it is not closed under the Boolean operations.
        """
        mset = {}
        for e in members:
            if e.ground != ground:
                raise InvalidInput("member on a different ground set")
            mset[e.mask] = e
        missing = _missing_from_closure(ground, mset)
        if missing is not None:
            how, elem = missing
            raise InvalidInput(f"member set is not closed: missing {elem.bits()} ({how})")
        nonzero = [e for e in mset.values() if e]
        atoms = [e for e in nonzero if not any(o.mask != e.mask and o <= e for o in nonzero)]
        return cls(ground, atoms)

    @property
    def top(self) -> Element:
        return self.ground.full

    @property
    def bottom(self) -> Element:
        return self.ground.empty

    def __len__(self) -> int:
        return 1 << len(self.atoms)

    @cached_property
    def members(self) -> tuple[Element, ...]:
        return tuple(
            sorted((self.from_atom_mask(i) for i in range(len(self))), key=lambda e: e.mask)
        )

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, e) -> bool:
        if not isinstance(e, Element) or e.ground != self.ground:
            return False
        m = e.mask
        return all(m & t == 0 or m & t == t for t in self._atom_masks)

    def require(self, e: Element) -> Element:
        if e not in self:
            raise InvalidInput(f"{e!r} is not a member of the algebra")
        return e

    def atom_mask(self, e: Element) -> int:
        """Index mask of the atoms below ``e`` (bit ``j`` for ``atoms[j]``)."""
        m, out = e.mask, 0
        for j, t in enumerate(self._atom_masks):
            if m & t == t:
                out |= 1 << j
        return out

    def from_atom_mask(self, idx: int) -> Element:
        m, j = 0, 0
        while idx:
            if idx & 1:
                m |= self._atom_masks[j]
            idx >>= 1
            j += 1
        return Element(self.ground, m)

    def atoms_below(self, e: Element) -> list[Element]:
        return [t for t in self.atoms if t <= e]

    def is_subalgebra_of(self, other: "FiniteAlgebra") -> bool:
        return self.ground == other.ground and all(t in other for t in self.atoms)

    def __eq__(self, other):
        if not isinstance(other, FiniteAlgebra):
            return NotImplemented
        return self.ground == other.ground and self._atom_masks == other._atom_masks

    def __hash__(self):
        return hash((self.ground, self._atom_masks))

    def __repr__(self):
        return f"FiniteAlgebra(atoms={list(self.atoms)!r})"


def _missing_from_closure(ground, mset):
    if 0 not in mset:
        return "bottom", ground.empty
    full = ground.full.mask
    if full not in mset:
        return "top", ground.full
    ordered = sorted(mset)
    for m in ordered:
        if full ^ m not in mset:
            return "complement", Element(ground, full ^ m)
    for a, b in combinations(ordered, 2):
        if a & b not in mset:
            return "meet", Element(ground, a & b)
        if a | b not in mset:
            return "join", Element(ground, a | b)
    return None


def make_algebra(
    ground: GroundSet | Iterable[Hashable],
    generators: Iterable[Element] = (),
    *,
    max_ground: int = DEFAULT_MAX_GROUND,
    allow_large: bool = False,
) -> FiniteAlgebra:
    """Boolean subalgebra of the power set generated by ``generators``.

    Atoms are the classes of points that no generator separates, so the
    result is exactly the closure under complement, union and intersection.
    """
    if not isinstance(ground, GroundSet):
        ground = GroundSet(ground)
    if ground.size > max_ground and not allow_large:
        raise InvalidInput(
            f"ground set of size {ground.size} exceeds the cap {max_ground}; pass allow_large=True"
        )
    gens = []
    for g in generators:
        if not isinstance(g, Element) or g.ground != ground:
            raise InvalidInput("generator does not live on the ground set")
        gens.append(g.mask)
    classes: dict[tuple, int] = {}
    for i in range(ground.size):
        sig = tuple(m >> i & 1 for m in gens)
        classes[sig] = classes.get(sig, 0) | 1 << i
    return FiniteAlgebra(ground, [Element(ground, m) for m in classes.values()])


# --- filters and ideals -------------------------------------------------


def _members_in(F, A: FiniteAlgebra) -> set:
    F = set(F)
    for e in F:
        if e not in A:
            raise InvalidInput(f"{e!r} is not a member of the algebra")
    return F


def filter_violation(F: Iterable[Element], A: FiniteAlgebra) -> str | None:
    """First violated filter clause, or ``None`` if ``F`` is a filter on ``A``."""
    F = _members_in(F, A)
    if not F:
        return "empty"
    if A.bottom in F:
        return "contains bottom"
    items = sorted(F, key=lambda e: e.mask)
    for i, x in enumerate(items):
        for y in items[i + 1:]:
            if x & y not in F:
                return f"not meet-closed: {x!r} & {y!r}"
    for x in items:
        for t in A.atoms:
            if not t <= x and x | t not in F:
                return f"not upward closed above {x!r}"
    return None


def is_filter(F: Iterable[Element], A: FiniteAlgebra) -> bool:
    return filter_violation(F, A) is None


def ideal_violation(I: Iterable[Element], A: FiniteAlgebra) -> str | None:
    I = _members_in(I, A)
    if not I:
        return "empty"
    if A.top in I:
        return "contains top"
    items = sorted(I, key=lambda e: e.mask)
    for i, x in enumerate(items):
        for y in items[i + 1:]:
            if x | y not in I:
                return f"not join-closed: {x!r} | {y!r}"
    for x in items:
        for t in A.atoms:
            if t <= x and x - t not in I:
                return f"not downward closed below {x!r}"
    return None


def is_ideal(I: Iterable[Element], A: FiniteAlgebra) -> bool:
    return ideal_violation(I, A) is None


@dataclass(frozen=True)
class Filter:
    """A validated filter on a finite algebra."""

    algebra: FiniteAlgebra
    members: frozenset

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        why = filter_violation(self.members, self.algebra)
        if why is not None:
            raise InvalidInput(f"not a filter: {why}")

    @classmethod
    def principal(cls, algebra: FiniteAlgebra, a: Element) -> "Filter":
        """Upward closure of a nonzero member ``a``."""
        algebra.require(a)
        if not a:
            raise InvalidInput("the principal filter of the bottom element is improper")
        free = [t for t in algebra.atoms if not t <= a]
        ups = set()
        for r in range(len(free) + 1):
            for combo in combinations(free, r):
                e = a
                for t in combo:
                    e = e | t
                ups.add(e)
        return cls(algebra, frozenset(ups))

    def __contains__(self, e) -> bool:
        return e in self.members

    def __len__(self):
        return len(self.members)

    @property
    def generator(self) -> Element:
        """The least member (finite filters are principal)."""
        g = self.algebra.top
        for e in self.members:
            g = g & e
        return g

    def is_ultrafilter(self) -> bool:
        return all(b in self.members or ~b in self.members for b in self.algebra)

    def __repr__(self):
        return f"Filter(generator={self.generator!r}, size={len(self.members)})"


def negation_dual(F: Filter | Iterable[Element]) -> frozenset:
    """The set ``{~a : a in F}``; an ideal exactly when ``F`` is a filter."""
    members = F.members if isinstance(F, Filter) else F
    return frozenset(~a for a in members)


def generated_by_filter(F: Filter) -> FiniteAlgebra:
    """Subalgebra generated by a filter, built from ``F | F^neg`` and checked closed."""
    return FiniteAlgebra.from_members(F.algebra.ground, set(F.members) | negation_dual(F))


def enumerate_ultrafilters(A: FiniteAlgebra) -> list[Filter]:
    return [Filter.principal(A, t) for t in A.atoms]


def upward_closure(F: Filter, algebra: FiniteAlgebra) -> Filter:
    """Close a filter on a subalgebra upward inside ``algebra``."""
    if not F.algebra.is_subalgebra_of(algebra):
        raise InvalidInput("filter's algebra is not a subalgebra of the target")
    return Filter.principal(algebra, F.generator)


# --- preimage homomorphisms -------------------------------------------


class PreimageHom:
    """``A -> h^{-1}[A]`` from ``h^->(B)`` on the codomain into ``B`` on the domain."""

    def __init__(self, h: Mapping, codomain: GroundSet, algebra: FiniteAlgebra):
        dom = algebra.ground
        for x in dom:
            if x not in h:
                raise InvalidInput(f"map is not total: no image for {x!r}")
            if h[x] not in codomain:
                raise InvalidInput(f"image {h[x]!r} of {x!r} is not in the codomain")
        self.h = dict(h)
        self.domain_algebra = algebra
        self.codomain = codomain
        pre = [0] * codomain.size
        for i, x in enumerate(dom):
            pre[codomain.index(h[x])] |= 1 << i
        self._pre = pre

        parent = list(range(codomain.size))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for t in algebra.atoms:
            ys = sorted({codomain.index(h[x]) for x in t})
            for y in ys[1:]:
                ra, rb = find(ys[0]), find(y)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        blocks: dict[int, int] = {}
        for y in range(codomain.size):
            r = find(y)
            blocks[r] = blocks.get(r, 0) | 1 << y
        self.image_algebra = FiniteAlgebra(codomain, [Element(codomain, m) for m in blocks.values()])

    def __call__(self, A: Element) -> Element:
        if A.ground != self.codomain:
            raise InvalidInput("element is not on the codomain")
        m, i, out = A.mask, 0, 0
        while m:
            if m & 1:
                out |= self._pre[i]
            m >>= 1
            i += 1
        return Element(self.domain_algebra.ground, out)

    @property
    def range_element(self) -> Element:
        return self.codomain.subset(set(self.h.values()))

    def image(self, B: Element) -> Element:
        """Forward image ``h[B]`` as a codomain element."""
        return self.codomain.subset({self.h[x] for x in B})

    def is_isomorphism(self) -> bool:
        imgs = {self(A).mask for A in self.image_algebra}
        return len(imgs) == len(self.image_algebra) == len(self.domain_algebra)


def preimage_hom(
    h: Mapping | Callable, algebra: FiniteAlgebra, codomain: GroundSet | None = None
) -> PreimageHom:
    """Build ``h^->(B)`` and the homomorphism ``f_h(A) = h^{-1}[A]``.

    ``h`` may be a mapping or a callable on the domain points.  Without an
    explicit ``codomain`` the image points are used, in first-seen order.
    """
    if callable(h) and not isinstance(h, Mapping):
        h = {x: h(x) for x in algebra.ground}
    if codomain is None:
        codomain = GroundSet(dict.fromkeys(h[x] for x in algebra.ground))
    return PreimageHom(h, codomain, algebra)
