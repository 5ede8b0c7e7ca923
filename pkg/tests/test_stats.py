import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from paircorr.exactreal import UnitReal, alpha_parse
from paircorr.stats import (
    IntegerSequence,
    additive_energy,
    additive_energy_bruteforce,
    count_differences,
    difference_spectrum,
    difference_spectrum_bruteforce,
    energy_identity_check,
    multiplicity,
    pair_correlation,
    pair_correlation_bruteforce,
    pair_correlation_curve,
    pair_correlation_oracle,
)

distinct_sets = st.sets(st.integers(1, 10**6), min_size=1, max_size=40)


def pts(*xs):
    return [UnitReal.exact(Fraction(x)) for x in xs]


def test_sequence_validation():
    with pytest.raises(ValueError):
        IntegerSequence((1, 1, 2))
    with pytest.raises(ValueError):
        IntegerSequence((0, 1))
    assert IntegerSequence((1, 5, 9)).prefix(2) == (1, 5)


def test_spectrum_examples():
    assert dict(difference_spectrum([1, 2, 3])) == {1: 2, -1: 2, 2: 1, -2: 1}
    assert dict(difference_spectrum([1, 2, 4])) == {1: 1, -1: 1, 2: 1, -2: 1, 3: 1, -3: 1}


@pytest.mark.parametrize("N", [2, 7, 50])
def test_spectrum_of_progression(N):
    spec = difference_spectrum(list(range(1, N + 1)))
    assert all(spec[v] == N - abs(v) for v in range(-(N - 1), N) if v)
    assert dict(spec) == difference_spectrum_bruteforce(list(range(1, N + 1)))


@given(distinct_sets)
def test_spectrum_invariants(A):
    terms = sorted(A)
    spec = difference_spectrum(terms)
    N = len(terms)
    assert dict(spec) == difference_spectrum_bruteforce(terms)
    assert spec.total() == N * (N - 1)
    assert all(spec[v] == spec[-v] and 1 <= spec[v] <= N - 1 for v in spec)
    for v in list(spec)[:5]:
        assert multiplicity(terms, v) == spec[v]


def test_count_differences_threads_agree():
    rng = random.Random(5)
    terms = sorted(rng.sample(range(1, 10**9), 3000))
    v1, c1 = count_differences(terms, workers=1)
    v4, c4 = count_differences(terms, workers=4)
    assert (v1 == v4).all() and (c1 == c4).all()


def test_count_differences_big_integers():
    terms = [2**70 + i * 3 for i in range(20)]
    spec = difference_spectrum(terms)
    assert spec[3] == 19 and spec[57] == 1


def test_energy_examples():
    assert additive_energy({1, 2, 3}) == 19
    assert additive_energy({7}) == 1
    assert additive_energy({1, 2, 4}) == 15
    assert additive_energy({3, 10}) == 6


@pytest.mark.parametrize("N", [1, 2, 10, 100])
def test_energy_closed_form(N):
    assert additive_energy(range(1, N + 1)) == (2 * N**3 + N) // 3


@given(st.sets(st.integers(-50, 50), min_size=1, max_size=12))
def test_energy_matches_bruteforce(A):
    assert additive_energy(A) == additive_energy_bruteforce(A)


@given(distinct_sets)
def test_energy_identity_and_bounds(A):
    N = len(A)
    E = additive_energy(A)
    assert N**2 <= E <= N**3
    assert energy_identity_check(A, difference_spectrum(sorted(A)))
    assert E == N**2 + difference_spectrum(sorted(A)).sum_of_squares()


def test_pair_correlation_examples():
    tenths = pts(*[Fraction(k, 10) for k in range(10)])
    assert pair_correlation(tenths, Fraction(3, 2)) == 2
    assert pair_correlation(tenths, Fraction(1, 2)) == 0
    assert pair_correlation(pts(0, Fraction(3, 10)), 1) == 1


def test_curve_half_alpha():
    curve = pair_correlation_curve(list(range(1, 5)), alpha_parse("1/2"), 4, [1])
    assert curve.r2(Fraction(1)) == 1


def test_curve_empty_grid():
    assert pair_correlation_curve([1, 2, 3], alpha_parse("phi"), 3, []).samples == []


def test_curve_phi_frozen():
    curve = pair_correlation_curve(list(range(1, 1001)), alpha_parse("phi"), 1000,
                                   [Fraction(1, 2), Fraction(1), Fraction(2)])
    assert [r for _, r in curve.samples] == [Fraction(13, 500), Fraction(403, 500), Fraction(1793, 500)]


@given(st.lists(st.fractions(0, 1, max_denominator=60).filter(lambda x: x < 1), min_size=1, max_size=40),
       st.fractions(Fraction(1, 50), 30, max_denominator=50))
def test_fast_path_matches_bruteforce(xs, s):
    p = pts(*xs)
    assert pair_correlation(p, s) == pair_correlation_bruteforce(p, s)


@given(st.sets(st.integers(1, 10**6), min_size=2, max_size=60),
       st.sampled_from(["phi", "sqrt:2", "sqrt:11", "3/10", "355/113", "12345/65536"]),
       st.fractions(Fraction(1, 10), 5, max_denominator=20))
def test_curve_matches_oracle(A, spec, s):
    terms = sorted(A)
    alpha = alpha_parse(spec)
    curve = pair_correlation_curve(terms, alpha, len(terms), [s])
    assert curve.r2(s) == pair_correlation_oracle(terms, alpha, s)


@given(st.sets(st.integers(1, 10**4), min_size=2, max_size=40), st.sampled_from(["phi", "5/17"]))
def test_r2_monotone_and_saturates(A, spec):
    terms = sorted(A)
    N = len(terms)
    grid = sorted({Fraction(k, 4) for k in range(1, 12)} | {Fraction(N, 2)})
    vals = [r for _, r in pair_correlation_curve(terms, alpha_parse(spec), N, grid).samples]
    assert vals == sorted(vals)
    assert vals[-1] == N - 1


@pytest.mark.parametrize("spread", [300, 10**5, 10**15])
def test_numpy_paths_match_bruteforce(spread):
    rng = random.Random(spread)
    terms = sorted(rng.sample(range(1, spread), 200))
    assert dict(difference_spectrum(terms)) == difference_spectrum_bruteforce(terms)
    from collections import Counter
    sums = Counter(a + b for a in terms for b in terms)
    assert additive_energy(terms) == sum(c * c for c in sums.values())
