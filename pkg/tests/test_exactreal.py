import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from paircorr.exactreal import (
    AlphaParseError,
    Decision,
    PrecisionError,
    QuadraticAlpha,
    RationalAlpha,
    Surd,
    TorusDistance,
    UnitReal,
    alpha_parse,
    compare_with_threshold,
    decide_pair,
    default_guard_bits,
    exact_frac,
    exact_norm,
    frac_part,
    torus_dist,
)


def test_parse_rational():
    a = alpha_parse("3/7")
    assert isinstance(a, RationalAlpha) and (a.p, a.q) == (3, 7)


def test_parse_rational_reduces_mod_one():
    assert alpha_parse("10/7").exact() == Fraction(3, 7)
    assert alpha_parse("-1/3").exact() == Fraction(2, 3)


def test_parse_sqrt2():
    a = alpha_parse("sqrt:2")
    assert isinstance(a, QuadraticAlpha)
    assert abs(float(a.exact()) - 0.41421356) < 1e-8


def test_parse_phi():
    a = alpha_parse("phi")
    assert abs(float(a.exact()) - (math.sqrt(5) - 1) / 2) < 1e-12


@pytest.mark.parametrize("bad", ["5/5", "1/0", "sqrt:4", "sqrt:0", "pi", "", "3/", "0.5@x"])
def test_parse_errors(bad):
    with pytest.raises(AlphaParseError):
        alpha_parse(bad)


def test_decimal_is_its_exact_rational():
    a = alpha_parse("0.3@10")
    assert a.exact() == Fraction(3, 10)


def test_frac_part_examples():
    assert frac_part(5, alpha_parse("3/7")).value == Fraction(1, 7)
    x = frac_part(3, alpha_parse("1/3"))
    assert x.value == 0 and x.is_exact
    y = frac_part(13, alpha_parse("phi"))
    assert abs(float(y) - 0.034442) < 1e-6
    assert y.error_bound < Fraction(1, 2**64)


@given(st.integers(1, 10**12), st.integers(1, 10**6), st.integers(2, 10**6))
def test_frac_part_rational_is_modular(a, p, q):
    if p % q == 0:
        return
    alpha = alpha_parse(f"{p}/{q}")
    assert frac_part(a, alpha).value == Fraction(a * p % q, q)
    assert frac_part(a + q, alpha).value == frac_part(a, alpha).value


@given(st.integers(1, 10**15), st.sampled_from(["sqrt:2", "sqrt:3", "phi", "sqrt:7"]), st.integers(8, 200))
def test_frac_part_quadratic_encloses_truth(a, spec, bits):
    alpha = alpha_parse(spec)
    x = frac_part(a, alpha, guard_bits=bits)
    truth = exact_frac(a, alpha)
    assert abs(truth - x.value) <= x.error_bound
    assert x.error_bound <= Fraction(1, 2**bits)


def test_torus_dist_examples():
    assert torus_dist(UnitReal.exact(Fraction(9, 10)), UnitReal.exact(Fraction(1, 10))).value == Fraction(1, 5)
    assert torus_dist(UnitReal.exact(Fraction(1, 4)), UnitReal.exact(Fraction(1, 4))).value == 0
    assert torus_dist(UnitReal.exact(0), UnitReal.exact(Fraction(1, 2))).value == Fraction(1, 2)


fracs = st.fractions(min_value=0, max_value=1, max_denominator=1000).filter(lambda x: x < 1)


@given(fracs, fracs, fracs)
def test_torus_dist_metric(x, y, z):
    X, Y, Z = (UnitReal.exact(t) for t in (x, y, z))
    assert torus_dist(X, Y).value == torus_dist(Y, X).value
    assert torus_dist(X, X).value == 0
    assert torus_dist(X, Z).value <= torus_dist(X, Y).value + torus_dist(Y, Z).value


def test_compare_with_threshold_examples():
    t = Fraction(1, 10)
    assert compare_with_threshold(TorusDistance(1, 10, 0), t) is Decision.BELOW
    assert compare_with_threshold(TorusDistance(200, 1000, 1), t) is Decision.ABOVE
    assert compare_with_threshold(TorusDistance(100, 1000, 10), t) is Decision.RETRY


def test_decide_pair_escalates_to_decision():
    phi = alpha_parse("phi")
    # ||55 phi|| is tiny; thresholds just either side of it need many bits
    d = exact_norm(55, phi)
    lo = Fraction(math.floor(float(d) * 10**12) - 1, 10**12)
    hi = lo + Fraction(3, 10**12)
    assert decide_pair(56, 1, phi, hi, guard_bits=8) is True
    assert decide_pair(56, 1, phi, lo, guard_bits=8) is False


def test_decide_pair_precision_cap(monkeypatch):
    monkeypatch.setenv("PAIRCORR_MAX_PRECISION_BITS", "16")
    phi = alpha_parse("phi")
    d = exact_norm(10946, phi)
    t = Fraction(math.floor(float(d) * 2**60), 2**60)
    with pytest.raises(PrecisionError):
        decide_pair(10947, 1, phi, t, guard_bits=8)


def test_default_guard_bits():
    assert default_guard_bits(1, 1) == 66
    assert default_guard_bits(2**40, 1000) == 64 + 41 + 10


def test_surd_exact_compare():
    s = Surd(Fraction(0), Fraction(1), 2)
    assert Fraction(141421, 100000) < s < Fraction(141422, 100000)
    assert math.floor(s * 1000) == 1414
    assert Surd(Fraction(3), Fraction(0), 2) == 3
    assert (s - s).sign() == 0


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6), st.sampled_from([2, 3, 5, 6, 7]))
def test_surd_sign_matches_float(x, y, D):
    s = Surd(Fraction(x), Fraction(y), D)
    f = x + y * math.sqrt(D)
    if abs(f) > 1e-6:
        assert s.sign() == (1 if f > 0 else -1)
    assert math.floor(s) in (math.floor(f), math.floor(f) - 1, math.floor(f) + 1)


def test_quadratic_canonical_form():
    a = QuadraticAlpha.of(0, 2, 1, 8)  # 2*sqrt(8) = 4*sqrt(2)
    assert a.D == 2
    assert 0 <= a.exact() < 1
    with pytest.raises(ValueError):
        QuadraticAlpha.of(1, 1, 1, 9)
