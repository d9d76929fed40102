from fractions import Fraction as F
from math import comb, factorial

import pytest
from hypothesis import given, strategies as st

from momentlab.arith import GroupElement, Subgroup
from momentlab.errors import NotAMomentVector, OutOfRange, RecurrenceError, TooShort
from momentlab.measures import Measure, moments_of
from momentlab.moments import Classification, classify, membership
from momentlab.pascal import PascalTable, build_table, gicar_trace, verify_hom
from momentlab.perturb import PerturbationRequest, perturb

LEB = moments_of(Measure.lebesgue(), 20)


def test_lebesgue_table():
    T = build_table(LEB, 3)
    for n in range(4):
        for k in range(n + 1):
            assert T(n, k) == F(factorial(k) * factorial(n - k), factorial(n + 1))
    assert T(2, 1) == F(1, 6) and T(3, 1) == F(1, 12)


def test_delta_half_table():
    T = build_table(moments_of(Measure.delta(F(1, 2)), 3), 3)
    assert all(x == F(1, 2**n) for n, _, x in T.entries())


def test_trivial_sequence_table():
    T = build_table((1, 0, 0, 0), 3)
    for n in range(4):
        assert T(n, 0) == 1
        assert all(T(n, k) == 0 for k in range(1, n + 1))
    r = verify_hom(T)
    assert r.positive and not r.strictly_positive and not r.faithful


def test_table_errors():
    with pytest.raises(TooShort):
        build_table((1, F(1, 2)), 3)
    T = build_table(LEB, 3)
    with pytest.raises(OutOfRange):
        T(2, 3)
    with pytest.raises(RecurrenceError):
        PascalTable(1, ((1,), (F(1, 2), F(1, 3)))).check_recurrence()


def test_verify_hom_lebesgue():
    r = verify_hom(build_table(LEB, 8))
    assert r.positive and r.strictly_positive and r.faithful
    assert r.injective_prefix_ranks is None and not r.injective


def test_verify_hom_group_elements_rank():
    T = build_table(LEB, 4)
    g = [GroupElement.rational(x) for x in LEB[:5]]
    r = verify_hom(build_table(g, 4))
    assert r.faithful and r.injective_prefix_ranks == (1, 1, 1, 1, 1) and not r.injective
    assert T.rows == build_table(LEB, 4).rows


def test_verify_hom_independent_table():
    req = PerturbationRequest(
        Measure.lebesgue(), 2, F(1, 64), Subgroup.parse("gen:sqrt2,sqrt3,sqrt5,sqrt7"), 4, True
    )
    res = perturb(req)
    r = verify_hom(build_table(res.elements, 4))
    assert r.faithful and r.injective_prefix_ranks == (1, 2, 3, 4, 5) and r.injective


@pytest.mark.parametrize(
    "mu", [Measure.lebesgue(), Measure.beta(2, 3), Measure.delta(F(1, 2)),
           Measure.atomic([(F(1, 4), F(1, 2)), (F(3, 4), F(1, 2))])], ids=str,
)
def test_recurrence_and_normalization(mu):
    T = build_table(moments_of(mu, 20), 20)
    for n in range(20):
        for k in range(n + 1):
            assert T(n + 1, k) + T(n + 1, k + 1) == T(n, k)
    for n in range(21):
        assert sum(comb(n, k) * T(n, k) for k in range(n + 1)) == 1


@given(st.lists(st.fractions(-1, 1, max_denominator=30), min_size=0, max_size=10))
def test_uniqueness_from_diagonal(tail):
    g = [F(1)] + tail
    N = len(g) - 1
    T = build_table(g, N)
    assert T.diagonal == g
    assert build_table(T.diagonal, N) == T


def _atomic(draw_locs, draw_ws):
    total = sum(draw_ws)
    return Measure.atomic([(F(x, 32), F(w, total)) for x, w in zip(draw_locs, draw_ws)])


@given(
    st.lists(st.integers(0, 32), min_size=1, max_size=4, unique=True),
    st.lists(st.integers(1, 5), min_size=4, max_size=4),
    st.integers(2, 10),
)
def test_faithful_iff_nontrivial(locs, ws, N):
    t = moments_of(_atomic(locs, ws[: len(locs)]), N)
    r = verify_hom(build_table(t, N))
    assert r.positive
    nontrivial = classify(t) is Classification.NONTRIVIAL
    assert r.faithful == nontrivial


def test_trace_examples():
    assert gicar_trace(LEB, 2) == [F(1, 3), F(1, 6), F(1, 3)]
    assert gicar_trace(moments_of(Measure.delta(F(1, 2)), 3), 3) == [F(1, 8)] * 4
    assert gicar_trace(moments_of(Measure.delta(1), 2), 2) == [0, 0, 1]
    with pytest.raises(NotAMomentVector):
        gicar_trace((1, F(3, 4), F(1, 4)), 2)
    with pytest.raises(OutOfRange):
        gicar_trace((1, F(1, 2)), 2)


@given(st.lists(st.integers(0, 16), min_size=1, max_size=4, unique=True), st.integers(1, 12))
def test_trace_normalization(locs, n):
    mu = Measure.atomic([(F(x, 16), F(1, len(locs))) for x in locs])
    t = moments_of(mu, n)
    assert not membership(t).is_outside
    tau = gicar_trace(t, n)
    assert sum(comb(n, k) * x for k, x in enumerate(tau)) == 1
    assert all(x >= 0 for x in tau)
