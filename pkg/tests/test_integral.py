import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from famint.algebra import FiniteAlgebra, GroundSet, preimage_hom
from famint.errors import HypothesisViolation, InvalidFunction, InvalidInput
from famint.fam import Fam, counting_fam, pushforward_fam
from famint.function import BoundedFn
from famint.integral import (
    FinitePartition,
    darboux_sums,
    extension_integral_check,
    integrate,
    is_partition,
    lower_sum,
    meet_partition,
    pushforward_integral_check,
    random_pushforward_instance,
    refines,
    restriction_integral_check,
    upper_sum,
)
from famint.props import random_algebra, random_fam
from famint.rect import Box, restricted_algebra

X3 = GroundSet([0, 1, 2])
P3 = FiniteAlgebra.power_set(X3)


def unit_interval():
    return restricted_algebra((0,), (1,))


def b1(lo, hi):
    return Box((F(lo),), (F(hi),))


# --- partitions -----------------------------------------------------------------


def test_partition_examples():
    assert is_partition([X3.full], P3)
    assert is_partition(P3.atoms, P3)
    assert not is_partition([X3.subset([0, 1]), X3.subset([1, 2])], P3)
    assert not is_partition([X3.subset([0, 1])], P3)
    assert not is_partition([X3.empty, X3.full], P3)


def test_refinement_examples():
    P = FinitePartition(P3, [X3.subset([0, 1]), X3.subset([2])])
    atoms = FinitePartition.atoms(P3)
    assert refines(P, FinitePartition.trivial(P3))
    assert refines(P, P)
    assert refines(atoms, P)
    assert not refines(P, atoms)


def test_meet_of_interval_partitions():
    alg, _ = unit_interval()
    P = FinitePartition(alg, [b1(0, F(1, 2)), b1(F(1, 2), 1)])
    Q = FinitePartition(alg, [b1(0, F(1, 3)), b1(F(1, 3), 1)])
    R = meet_partition(P, Q)
    assert sorted(R.cells) == [b1(0, F(1, 3)), b1(F(1, 3), F(1, 2)), b1(F(1, 2), 1)]
    assert refines(R, P) and refines(R, Q)
    assert sorted(meet_partition(P, FinitePartition.trivial(alg)).cells) == sorted(P.cells)
    assert sorted(meet_partition(P, P).cells) == sorted(P.cells)


def test_invalid_partition_rejected():
    with pytest.raises(InvalidInput):
        FinitePartition(P3, [X3.subset([0])])


# --- sums and the integrability criterion --------------------------------------------


def test_sums_of_identity_on_two_halves():
    alg, lam = unit_interval()
    f = BoundedFn.from_expression("x")
    P = FinitePartition(alg, [b1(0, F(1, 2)), b1(F(1, 2), 1)])
    assert upper_sum(f, P, lam) == F(3, 4)
    assert lower_sum(f, P, lam) == F(1, 4)


def test_constant_sums():
    alg, lam = restricted_algebra((0, 0), (2, 3))
    f = BoundedFn.from_expression("7/2", 2)
    P = FinitePartition.trivial(alg)
    assert darboux_sums(f, P, lam) == (F(21), F(21))


@settings(max_examples=30)
@given(st.lists(st.fractions(0, 1).filter(lambda q: 0 < q < 1), max_size=4),
       st.lists(st.fractions(0, 1).filter(lambda q: 0 < q < 1), max_size=4))
def test_refinement_tightens_sums(cuts_p, cuts_q):
    alg, lam = unit_interval()
    f = BoundedFn.from_expression("x^2 - x/3")

    def part(cuts):
        pts = [F(0), *sorted(set(cuts)), F(1)]
        return FinitePartition(alg, [b1(a, b) for a, b in zip(pts, pts[1:])])

    P, Q = part(cuts_p), part(cuts_q)
    R = meet_partition(P, Q)
    lp, up = darboux_sums(f, P, lam)
    lr, ur = darboux_sums(f, R, lam)
    lq, uq = darboux_sums(f, Q, lam)
    assert lp <= lr <= ur <= up
    # any lower sum sits below any upper sum
    assert lp <= uq and lq <= up


def test_uniform_schedule_on_identity():
    _, lam = unit_interval()
    rep = integrate(BoundedFn.from_expression("x"), lam, F(1, 100))
    assert rep.integrable_at_eps
    assert rep.value == F(1, 2)
    assert rep.error_bound <= F(1, 200)
    assert rep.witness_cell_count == 128
    # U - L = 1/n on n uniform cells
    assert rep.diagnostics["gaps"] == [F(1, 1 << k) for k in range(8)]


def test_adaptive_schedule_on_identity():
    _, lam = unit_interval()
    rep = integrate(BoundedFn.from_expression("x"), lam, F(1, 100), schedule="adaptive")
    assert rep.integrable_at_eps and rep.encloses(F(1, 2))
    assert is_partition(rep.witness.cells, lam.algebra)


def test_dirichlet_like_oracle_never_certifies():
    _, lam = unit_interval()
    f = BoundedFn.constant_range(0, 1, "dirichlet")
    rep = integrate(f, lam, F(99, 100), max_cells=1 << 10)
    assert not rep.integrable_at_eps
    assert rep.gap == 1
    assert rep.value is None
    rep = integrate(BoundedFn.from_expression("rat(x)"), lam, F(1, 2), max_cells=1 << 8)
    assert not rep.integrable_at_eps


def test_unbounded_oracle_is_invalid_function():
    _, lam = unit_interval()
    with pytest.raises(InvalidFunction):
        integrate(BoundedFn.from_expression("1/x"), lam, F(1, 10))


def test_finite_algebra_integral_is_exact():
    m = counting_fam(X3)
    f = BoundedFn.on_points({0: 1, 1: 2, 2: 6})
    rep = integrate(f, m, F(1, 10**9))
    assert rep.lower == rep.upper == 3
    assert rep.integrable


def test_coarse_algebra_can_fail_integrability():
    from famint.algebra import make_algebra

    A = make_algebra(X3, [X3.subset([0])])
    m = Fam(A, [1, 1])
    f = BoundedFn.on_points({0: 0, 1: 1, 2: 3})
    rep = integrate(f, m, F(1, 2))
    assert (rep.lower, rep.upper) == (F(1), F(3))
    assert rep.integrable is False and not rep.integrable_at_eps


@st.composite
def finite_setup(draw):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    A = random_algebra(rng, 7)
    m = random_fam(rng, A)
    f = {x: F(rng.randint(-9, 9), rng.randint(1, 4)) for x in A.ground}
    g = {x: F(rng.randint(-9, 9), rng.randint(1, 4)) for x in A.ground}
    return m, f, g


@given(finite_setup(), st.fractions(-5, 5))
def test_linearity_on_finite_algebras(setup, c):
    m, f, g = setup
    eps = F(1, 10)

    def integral(values):
        rep = integrate(BoundedFn.on_points(values), m, eps)
        return rep.lower, rep.upper

    (lf, uf), (lg, ug) = integral(f), integral(g)
    (ls, us) = integral({x: f[x] + g[x] for x in f})
    # lower is superadditive and upper subadditive; equality when both are integrable
    assert lf + lg <= ls <= us <= uf + ug
    if lf == uf and lg == ug:
        assert ls == us == lf + lg
    lc, uc = integral({x: c * f[x] for x in f})
    if c >= 0:
        assert (lc, uc) == (c * lf, c * uf)
    else:
        assert (lc, uc) == (c * uf, c * lf)


@given(finite_setup())
def test_integrable_iff_atom_gap_zero(setup):
    m, f, _ = setup
    rep = integrate(BoundedFn.on_points(f), m, F(1, 10))
    A = m.algebra
    constant_on_charged_atoms = all(
        len({f[x] for x in t}) == 1 for t, w in zip(A.atoms, m.weights) if w > 0
    )
    assert rep.integrable == constant_on_charged_atoms


def test_linearity_on_the_unit_square_within_bounds():
    _, lam = restricted_algebra((0, 0), (1, 1))
    eps = F(1, 50)
    rf = integrate(BoundedFn.from_expression("x*y", 2), lam, eps)
    rg = integrate(BoundedFn.from_expression("x + y^2", 2), lam, eps)
    rs = integrate(BoundedFn.from_expression("x*y + x + y^2", 2), lam, eps)
    assert abs(rs.value - (rf.value + rg.value)) <= rs.error_bound + rf.error_bound + rg.error_bound
    r3 = integrate(BoundedFn.from_expression("3*x*y", 2), lam, eps)
    assert abs(r3.value - 3 * rf.value) <= r3.error_bound + 3 * rf.error_bound


def test_monotonicity_on_rectangles():
    _, lam = unit_interval()
    lo = integrate(BoundedFn.from_expression("x^2"), lam, F(1, 100))
    hi = integrate(BoundedFn.from_expression("x"), lam, F(1, 100))
    assert lo.lower <= hi.upper
    assert lo.value <= hi.value + lo.error_bound + hi.error_bound


# --- transfer identities -------------------------------------------------------------


def test_pushforward_example_merging_pairs():
    X = GroundSet(range(4))
    h = {0: "a", 1: "a", 2: "b", 3: "b"}
    rep = pushforward_integral_check({"a": 1, "b": 3}, h, counting_fam(X))
    assert rep.ok
    assert rep.details["lower_Y"] == rep.details["lower_X"] == 2
    assert rep.details["integrals_equal"]


def test_pushforward_identity_map():
    m = counting_fam(X3)
    rep = pushforward_integral_check({0: 1, 1: 5, 2: -2}, {x: x for x in X3}, m, X3)
    assert rep.ok and rep.details["injective"] and rep.details["converse"]


def test_pushforward_random_instances():
    rng = random.Random(7)
    for _ in range(200):
        f, h, m, Y = random_pushforward_instance(rng)
        rep = pushforward_integral_check(f, h, m, Y)
        assert rep.ok and rep.details["integrals_equal"], rep.details


@given(st.integers(0, 2**32 - 1))
def test_pushforward_chain_for_arbitrary_f(seed):
    rng = random.Random(seed)
    f, h, m, Y = random_pushforward_instance(rng)
    # scramble f so that it need not be integrable
    f = {y: F(rng.randint(-5, 5)) for y in Y}
    rep = pushforward_integral_check(f, h, m, Y)
    assert rep.details["chain"] and rep.details["refined_sums_equal"]
    assert rep.ok


def test_pushforward_measure_matches_direct_preimage():
    rng = random.Random(3)
    for _ in range(50):
        _, h, m, Y = random_pushforward_instance(rng)
        phi = preimage_hom(h, m.algebra, Y)
        mh = pushforward_fam(m, h, Y)
        for B in phi.image_algebra.members:
            assert mh(B) == m(phi(B))


def test_restriction_same_set():
    m = counting_fam(X3)
    rep = restriction_integral_check({0: 1, 1: 2, 2: 3}, [0, 1, 2], m, m)
    assert rep.ok and rep.details["integrals_equal"]


def test_restriction_to_a_subset():
    Y = GroundSet(range(4))
    X = GroundSet(range(3))
    from famint.algebra import make_algebra

    # the algebra on Y lumps 2 and 3 together, so its trace on X is compatible
    AY = make_algebra(Y, [Y.subset([0]), Y.subset([1])])
    mY = Fam(AY, [1, 1, 1])
    mX = Fam(FiniteAlgebra.power_set(X), [1, 1, 1])
    rep = restriction_integral_check({0: 4, 1: 5, 2: 6, 3: 6}, list(X), mX, mY)
    assert rep.ok and rep.details["integrals_equal"]
    assert rep.details["lower_Y"] == 15


def test_restriction_with_incompatible_measures():
    Y = GroundSet(range(4))
    X = GroundSet(range(3))
    mY = counting_fam(Y)
    mX = counting_fam(X)
    with pytest.raises(HypothesisViolation):
        restriction_integral_check({y: 1 for y in Y}, list(X), mX, mY)


@given(finite_setup())
def test_extension_keeps_integrals(setup):
    m0, f, _ = setup
    A0 = m0.algebra
    P = FiniteAlgebra.power_set(A0.ground)
    # spread each atom weight over its points
    weights = []
    for x in A0.ground:
        t = next(t for t in A0.atoms if x in t)
        w = m0.weights[A0.atoms.index(t)]
        weights.append(w / len(t))
    m1 = Fam(P, weights)
    rep = extension_integral_check(f, m0, m1)
    assert rep.ok


def test_extension_rejects_non_extensions():
    from famint.algebra import make_algebra

    A0 = make_algebra(X3, [X3.subset([0])])
    with pytest.raises(HypothesisViolation):
        extension_integral_check({0: 1, 1: 1, 2: 1}, Fam(A0, [1, 1]), counting_fam(X3))
