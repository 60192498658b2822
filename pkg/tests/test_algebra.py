from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famint.algebra import (
    Element,
    Filter,
    FiniteAlgebra,
    GroundSet,
    complement,
    difference,
    enumerate_ultrafilters,
    generated_by_filter,
    incompatible,
    is_filter,
    is_ideal,
    join,
    leq,
    make_algebra,
    meet,
    negation_dual,
    preimage_hom,
)
from famint.errors import InvalidInput


def sets(X, *groups):
    return [X.subset(g) for g in groups]


X3 = GroundSet([0, 1, 2])
P3 = FiniteAlgebra.power_set(X3)


@st.composite
def algebras(draw, max_points=6):
    n = draw(st.integers(1, max_points))
    X = GroundSet(range(n))
    gens = draw(st.lists(st.integers(0, (1 << n) - 1), max_size=3))
    return make_algebra(X, [Element(X, g) for g in gens])


# --- construction -------------------------------------------------------------


def test_single_generator_closure():
    A = make_algebra(X3, [X3.subset([0])])
    assert set(A.members) == set(sets(X3, [], [0], [1, 2], [0, 1, 2]))
    assert set(A.atoms) == set(sets(X3, [0], [1, 2]))


def test_one_point_ground_without_generators():
    X = GroundSet([0])
    A = make_algebra(X, [])
    assert set(A.members) == {X.empty, X.full}


def test_separating_generators_give_the_power_set():
    X = GroundSet(range(4))
    A = make_algebra(X, sets(X, [0, 1], [1, 2]))
    assert len(A) == 16
    assert set(A.atoms) == set(sets(X, [0], [1], [2], [3]))


def test_empty_ground_rejected():
    with pytest.raises(InvalidInput):
        GroundSet([])


def test_ground_cap_and_override():
    X = GroundSet(range(30))
    with pytest.raises(InvalidInput):
        make_algebra(X, [])
    assert len(make_algebra(X, [], allow_large=True).atoms) == 1


def test_closing_twice_adds_nothing():
    A = make_algebra(X3, [X3.subset([0])])
    assert make_algebra(X3, A.members) == A


def test_from_members_names_the_missing_element():
    with pytest.raises(InvalidInput, match="missing"):
        FiniteAlgebra.from_members(X3, sets(X3, [], [0], [0, 1, 2]))


# --- Boolean operations ----------------------------------------------------------


def test_boolean_ops():
    a, b = X3.subset([0, 1]), X3.subset([1, 2])
    assert meet(a, b) == X3.subset([1])
    assert complement(X3.subset([0])) == X3.subset([1, 2])
    assert difference(a, b) == X3.subset([0])
    assert join(a, b) == X3.full
    assert leq(X3.subset([1]), a) and not leq(a, b)
    assert incompatible(X3.subset([0]), X3.subset([2]))
    assert not incompatible(a, b)


def test_mismatched_grounds_rejected():
    other = GroundSet([0, 1, 3])
    with pytest.raises(InvalidInput):
        X3.subset([0]) & other.subset([0])


@settings(max_examples=60)
@given(algebras(5))
def test_closure_and_boolean_axioms(A):
    M = A.members
    for a, b in product(M, M):
        assert a & b in A and a | b in A and ~a in A and a - b in A
        assert a & (a | b) == a and a | (a & b) == a  # absorption
        assert a | ~a == A.top and a & ~a == A.bottom
    for a, b, c in product(M[:8], M[:8], M[:8]):
        assert a & (b | c) == (a & b) | (a & c)
        assert a | (b & c) == (a | b) & (a | c)


@given(algebras())
def test_atom_decomposition(A):
    for e in A.members:
        joined = A.bottom
        for t in A.atoms_below(e):
            joined = joined | t
        assert joined == e
    for s, t in product(A.atoms, A.atoms):
        assert s == t or s.incompatible(t)


# --- filters and ideals ------------------------------------------------------------


def test_filter_examples():
    assert is_filter([X3.full], P3)
    assert not is_filter([X3.empty, X3.full], P3)
    assert is_filter(sets(X3, [1], [0, 1], [1, 2], [0, 1, 2]), P3)
    assert not is_filter(sets(X3, [0], [1], [0, 1, 2]), P3)  # not meet-closed


def test_filter_outside_algebra_rejected():
    A = make_algebra(X3, [X3.subset([0])])
    with pytest.raises(InvalidInput):
        is_filter([X3.subset([1])], A)


def test_negation_dual_examples():
    U = Filter.principal(P3, X3.subset([1]))
    assert negation_dual(U) == {e for e in P3.members if 1 not in e}
    assert is_ideal(negation_dual(U), P3)
    assert negation_dual(Filter(P3, {X3.full})) == {X3.empty}
    up01 = Filter.principal(P3, X3.subset([0, 1]))
    assert negation_dual(up01) == set(sets(X3, [], [2]))


def test_generated_by_filter_examples():
    U = Filter.principal(P3, X3.subset([1]))
    assert generated_by_filter(U) == P3
    X2 = GroundSet([0, 1])
    P2 = FiniteAlgebra.power_set(X2)
    assert set(generated_by_filter(Filter(P2, {X2.full})).members) == {X2.empty, X2.full}
    up01 = Filter.principal(P3, X3.subset([0, 1]))
    assert set(generated_by_filter(up01).members) == set(sets(X3, [], [2], [0, 1], [0, 1, 2]))


@given(algebras(5), st.data())
def test_filter_ideal_duality_and_generated_members(A, data):
    a = data.draw(st.sampled_from([e for e in A.members if e]))
    F = Filter.principal(A, a)
    dual = negation_dual(F)
    assert is_ideal(dual, A)
    assert negation_dual(dual) == F.members
    G = generated_by_filter(F)
    assert set(G.members) == set(F.members) | dual
    assert (G == A) == F.is_ultrafilter()


def test_ultrafilter_counts():
    assert len(enumerate_ultrafilters(P3)) == 3
    assert len(enumerate_ultrafilters(make_algebra(X3, [X3.subset([0])]))) == 2
    trivial = enumerate_ultrafilters(make_algebra(X3, []))
    assert len(trivial) == 1 and trivial[0].members == {X3.full}


@given(st.integers(1, 7))
def test_power_set_has_one_ultrafilter_per_point(n):
    A = FiniteAlgebra.power_set(GroundSet(range(n)))
    ufs = enumerate_ultrafilters(A)
    assert len(ufs) == n
    assert all(U.is_ultrafilter() for U in ufs)


# --- preimage homomorphisms --------------------------------------------------------


def test_preimage_of_two_block_map():
    X = GroundSet(range(4))
    phi = preimage_hom({0: "a", 1: "a", 2: "b", 3: "b"}, FiniteAlgebra.power_set(X))
    Y = phi.codomain
    assert phi.image_algebra == FiniteAlgebra.power_set(Y)
    assert phi(Y.subset(["a"])) == X.subset([0, 1])


def test_bijection_gives_isomorphism():
    X = GroundSet(range(3))
    A = FiniteAlgebra.power_set(X)
    assert preimage_hom({0: "c", 1: "a", 2: "b"}, A).is_isomorphism()
    assert not preimage_hom({0: "a", 1: "a", 2: "b"}, A).is_isomorphism()


def test_constant_map():
    X = GroundSet(range(3))
    Y = GroundSet(["p", "q"])
    phi = preimage_hom(lambda x: "p", FiniteAlgebra.power_set(X), Y)
    assert phi.image_algebra == FiniteAlgebra.power_set(Y)
    assert {phi(e) for e in phi.image_algebra.members} == {X.empty, X.full}


@given(algebras(5), st.data())
def test_preimage_preserves_operations(A, data):
    ny = data.draw(st.integers(1, 4))
    h = {x: data.draw(st.integers(0, ny - 1)) for x in A.ground}
    phi = preimage_hom(h, A, GroundSet(range(ny)))
    B = phi.image_algebra
    for a, b in product(B.members, B.members):
        assert phi(a & b) == phi(a) & phi(b)
        assert phi(a | b) == phi(a) | phi(b)
        assert phi(~a) == ~phi(a)
        assert phi(a) in A
