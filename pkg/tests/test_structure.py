import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from paircorr.gapgen import CapExceeded, GAPDescriptor, gap_enumerate
from paircorr.stats import additive_energy
from paircorr.structure import (
    PreconditionError,
    SumsetReport,
    covers,
    energy_lower_bound_check,
    gap_cover_search,
    sumset,
    sumset_report,
)


def test_sumset_examples():
    assert sumset({1, 2}, {1, 2}) == {2, 3, 4}
    B = {3, 8, 20}
    assert sumset({0}, B) == B
    assert len(sumset(range(1, 11), range(1, 11))) == 19


def test_sumset_big_integers():
    assert sumset({2**70}, {1, 2}) == {2**70 + 1, 2**70 + 2}


@given(st.sets(st.integers(-10**5, 10**5), max_size=30), st.sets(st.integers(-10**5, 10**5), max_size=30))
def test_sumset_matches_comprehension(A, B):
    assert sumset(A, B) == {a + b for a in A for b in B}


@given(st.sets(st.integers(-1000, 1000), min_size=1, max_size=30))
def test_sumset_report_bounds(A):
    r = sumset_report(A)
    assert 2 * len(A) - 1 <= r.sumset_size <= len(A) ** 2
    assert r.doubling == Fraction(r.sumset_size, len(A))


def test_sumset_report_invariant():
    with pytest.raises(ValueError):
        SumsetReport(5, 4, Fraction(4, 5))


def test_sumset_cap(monkeypatch):
    import paircorr.structure as mod
    monkeypatch.setattr(mod, "SUMSET_CAP", 100)
    with pytest.raises(CapExceeded):
        sumset(range(20), range(20))


def test_energy_lower_bound_examples():
    assert additive_energy(range(1, 11)) == 670
    assert energy_lower_bound_check(range(1, 11), Fraction(19, 10))
    assert energy_lower_bound_check({42}, 1)
    with pytest.raises(PreconditionError):
        energy_lower_bound_check({1, 2, 4, 8}, 1)


def test_energy_lower_bound_sweep():
    rng = random.Random(17)
    for _ in range(500):
        A = rng.sample(range(1, rng.choice([40, 200, 5000])), rng.randint(1, 30))
        r = sumset_report(A)
        assert energy_lower_bound_check(A, r.doubling)


def test_cover_examples():
    assert gap_cover_search({1, 4, 7, 10}, 1, 1) == GAPDescriptor(1, (3,), (4,))
    assert gap_cover_search({1, 2, 5, 6, 9, 10}, 2, 1) == GAPDescriptor(1, (1, 4), (2, 3))
    assert gap_cover_search({1, 2, 4, 8, 16, 32}, 1, 2) is None


def test_cover_singleton_and_cap():
    assert gap_cover_search({5}, 1, 1) == GAPDescriptor(5, (1,), (1,))
    with pytest.raises(CapExceeded):
        gap_cover_search(range(31), 1, 1)


def test_cover_none_is_exhaustive_for_d1():
    # every AP of size <= 12 containing {1,2,4,8,16,32} needs step 1 and 32 terms
    A = {1, 2, 4, 8, 16, 32}
    for k in range(1, 32):
        for s in range(2, 13):
            for h in range(1 - (s - 1) * k, 2):
                P = set(gap_enumerate(GAPDescriptor(h, (k,), (s,))).values)
                assert not A <= P


@given(st.integers(-40, 40), st.lists(st.tuples(st.integers(1, 12), st.integers(2, 4)), min_size=1, max_size=2),
       st.randoms(use_true_random=False))
def test_cover_round_trip(h, ks, rnd):
    P = GAPDescriptor(h, tuple(k for k, _ in ks), tuple(s for _, s in ks))
    e = gap_enumerate(P)
    if not e.proper:
        return
    A = rnd.sample(e.values, rnd.randint(max(1, (P.size + 1) // 2), P.size))
    K = Fraction(P.size, len(A))
    Q = gap_cover_search(A, P.d, K)
    assert Q is not None and covers(Q, A) and Q.d <= P.d and Q.size <= K * len(A)
