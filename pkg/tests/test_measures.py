import random
from fractions import Fraction as F
from math import factorial

import pytest
from hypothesis import given, strategies as st

from momentlab.errors import OutOfRange, SpecError
from momentlab.measures import (
    Measure,
    lp_feasible,
    mixed_moment,
    moments_of,
    random_atomic,
    random_vector,
)
from momentlab.moments import MomentVector, iterated_difference, membership
from momentlab.simplex import phase_one

MEASURES = [
    Measure.lebesgue(),
    Measure.beta(2, 3),
    Measure.delta(F(1, 2)),
    Measure.atomic([(F(1, 4), F(1, 2)), (F(3, 4), F(1, 2))]),
]


def beta_integral(a, b, n):
    """Integral of x^n against Beta(a, b) by the factorial formula B(a+n, b) / B(a, b)."""
    B = lambda x, y: F(factorial(x - 1) * factorial(y - 1), factorial(x + y - 1))
    return B(a + n, b) / B(a, b)


def test_moments_examples():
    assert moments_of(Measure.lebesgue(), 3) == MomentVector([1, F(1, 2), F(1, 3), F(1, 4)])
    assert moments_of(Measure.delta(F(1, 2)), 3) == MomentVector([1, F(1, 2), F(1, 4), F(1, 8)])
    assert moments_of(Measure.atomic([(0, F(1, 2)), (1, F(1, 2))]), 3) == MomentVector(
        [1, F(1, 2), F(1, 2), F(1, 2)]
    )


@pytest.mark.parametrize("a,b", [(1, 1), (2, 3), (5, 2), (4, 4)])
def test_beta_moments_match_factorials(a, b):
    t = moments_of(Measure.beta(a, b), 10)
    assert list(t) == [beta_integral(a, b, n) for n in range(11)]


def test_mixed_moment_examples():
    assert mixed_moment(Measure.lebesgue(), 2, 1) == F(1, 6)
    for n in range(6):
        for k in range(n + 1):
            assert mixed_moment(Measure.delta(F(1, 2)), n, k) == F(1, 2**n)
            assert mixed_moment(Measure.delta(1), n, k) == (1 if k == n else 0)
    with pytest.raises(OutOfRange):
        mixed_moment(Measure.lebesgue(), 2, 3)


@pytest.mark.parametrize("mu", MEASURES, ids=str)
def test_differences_equal_mixed_moments(mu):
    t = moments_of(mu, 12)
    for n in range(13):
        for k in range(n + 1):
            assert iterated_difference(t, n - k, k) == mixed_moment(mu, n, k)


@given(st.integers(0, 10**6), st.integers(1, 12))
def test_truncation_consistency(seed, N):
    mu = random_atomic(random.Random(seed))
    assert moments_of(mu, N).truncate(N - 1) == moments_of(mu, N - 1)


def test_measure_parse_and_str():
    for text in ["lebesgue", "beta:2,3", "atomic:1/2@1/4,1/2@3/4"]:
        assert str(Measure.parse(text)) == text
    assert Measure.parse("delta:1/2") == Measure.delta(F(1, 2))
    for bad in ["beta:0,1", "atomic:1/2@1/4", "atomic:1/2@2,1/2@0", "gauss", "delta:x"]:
        with pytest.raises(SpecError):
            Measure.parse(bad)


# -- LP oracle ----------------------------------------------------------------------


def test_lp_examples():
    ok, w = lp_feasible((1, F(1, 2), F(1, 3)), 64, F(1, 1024))
    assert ok and w.check((1, F(1, 2), F(1, 3)))
    assert lp_feasible((1, F(3, 4), F(1, 4)), 64, F(1, 1024)) == (False, None)
    ok, w = lp_feasible((1, 1, 1), 8, 0)
    assert ok and w.weights[-1] == 1 and sum(w.weights[:-1]) == 0


def test_lp_exact_atomic_on_grid():
    mu = Measure.atomic([(F(1, 8), F(1, 3)), (F(5, 8), F(2, 3))])
    t = moments_of(mu, 5)
    ok, w = lp_feasible(t, 16, 0)
    assert ok and w.moments(5) == list(t)


def test_lp_validates_arguments():
    with pytest.raises(ValueError):
        lp_feasible((1, F(1, 2), F(1, 3)), 1, F(1, 8))
    with pytest.raises(ValueError):
        lp_feasible((1, F(1, 2)), 8, -1)


@pytest.mark.parametrize("seed", range(8))
def test_lp_agrees_with_membership(seed):
    rng = random.Random(1000 + seed)
    for _ in range(4):
        t = random_vector(rng, 6)
        v = membership(t)
        if v.is_interior:
            assert lp_feasible(t, 256, F(1, 1024))[0]
        elif v.is_outside and v.witness.violation > F(1, 256):
            assert not lp_feasible(t, 256, F(1, 4096))[0]


def test_phase_one_small_systems():
    # x + y = 1, x - y = 1/2 -> (3/4, 1/4)
    assert phase_one([[1, 1], [1, -1]], [1, F(1, 2)]) == [F(3, 4), F(1, 4)]
    # x + y = 1 and x + y = 2 is infeasible
    assert phase_one([[1, 1], [1, 1]], [1, 2]) is None
    # redundant rows are fine
    x = phase_one([[1, 1, 1], [2, 2, 2], [1, 0, 0]], [1, 2, F(1, 3)])
    assert x is not None and x[0] == F(1, 3) and sum(x) == 1 and min(x) >= 0
    # negative right-hand side
    assert phase_one([[-1, 0], [0, 1]], [-2, 3]) == [2, 3]


@given(
    st.lists(st.lists(st.integers(-3, 3), min_size=4, max_size=4), min_size=1, max_size=3),
    st.lists(st.integers(0, 3), min_size=4, max_size=4),
)
def test_phase_one_finds_planted_solutions(A, x0):
    b = [sum(a * x for a, x in zip(row, x0)) for row in A]
    x = phase_one(A, b)
    assert x is not None
    assert all(v >= 0 for v in x)
    assert [sum(a * v for a, v in zip(row, x)) for row in A] == b


def test_random_vectors_are_seeded():
    a = [random_vector(random.Random(5)) for _ in range(3)]
    b = [random_vector(random.Random(5)) for _ in range(3)]
    assert a == b
    for t in a:
        assert t[0] == 1 and all(0 <= x <= 1 for x in t) and len(t) <= 7
