"""Exact and error-bounded arithmetic on the torus R/Z.

The dilation factor alpha is always one of: a rational p/q, a quadratic
irrational r + t*sqrt(D), or a finite decimal (which is itself rational).
Every floor of a*alpha is therefore computable exactly with integer
arithmetic, so fixed-point values carry honest error radii and ties against
rational thresholds are decided symbolically.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, gcd, isqrt
from typing import Union

DEFAULT_MAX_PRECISION_BITS = 1 << 14


class AlphaParseError(ValueError):
    """Malformed or degenerate alpha specification."""


class PrecisionError(ArithmeticError):
    """Requested resolution exceeds the configured precision cap."""


def max_precision_bits() -> int:
    raw = os.environ.get("PAIRCORR_MAX_PRECISION_BITS")
    if raw is None:
        return DEFAULT_MAX_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise PrecisionError(f"PAIRCORR_MAX_PRECISION_BITS={raw!r} is not an integer") from None
    if bits < 8:
        raise PrecisionError("PAIRCORR_MAX_PRECISION_BITS must be >= 8")
    return bits


def _squarefree_split(D: int) -> tuple[int, int]:
    """Return (m, D') with D = m^2 * D' and D' square-free."""
    m, rest, p = 1, D, 2
    while p * p <= rest:
        while rest % (p * p) == 0:
            rest //= p * p
            m *= p
        p += 1 if p == 2 else 2
    return m, rest


def _floor_sqrt_times(x: int, D: int) -> int:
    """floor(x * sqrt(D)) for integer x, D >= 0."""
    if x >= 0:
        return isqrt(x * x * D)
    root = isqrt(x * x * D)
    # x*sqrt(D) is negative; exact only when D is a perfect square
    return -root if root * root == x * x * D else -root - 1


# ---------------------------------------------------------------------------
# Quadratic surds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Surd:
    """Exact real number x + y*sqrt(D) with rational x, y and square-free D."""

    x: Fraction
    y: Fraction
    D: int

    def sign(self) -> int:
        x, y = self.x, self.y
        if y == 0:
            return (x > 0) - (x < 0)
        if x >= 0 and y > 0:
            return 1
        if x <= 0 and y < 0:
            return -1
        lhs, rhs = x * x, y * y * self.D
        # x and y have opposite signs here and lhs != rhs (sqrt(D) irrational)
        if x > 0:
            return 1 if lhs > rhs else -1
        return 1 if rhs > lhs else -1

    def __floor__(self) -> int:
        x, y = self.x, self.y
        Q = x.denominator * y.denominator // gcd(x.denominator, y.denominator)
        R = x.numerator * (Q // x.denominator)
        T = y.numerator * (Q // y.denominator)
        return (R + _floor_sqrt_times(T, self.D)) // Q

    def _coerce(self, other: "Real") -> "Surd":
        if isinstance(other, Surd):
            if other.D != self.D and other.y != 0 and self.y != 0:
                raise ValueError("cannot mix surds with different radicands")
            return other
        return Surd(Fraction(other), Fraction(0), self.D)

    def __add__(self, other: "Real") -> "Surd":
        o = self._coerce(other)
        return Surd(self.x + o.x, self.y + o.y, self.D)

    __radd__ = __add__

    def __neg__(self) -> "Surd":
        return Surd(-self.x, -self.y, self.D)

    def __abs__(self) -> "Surd":
        return -self if self.sign() < 0 else self

    def __sub__(self, other: "Real") -> "Surd":
        return self + (-self._coerce(other))

    def __rsub__(self, other: "Real") -> "Surd":
        return self._coerce(other) - self

    def __mul__(self, other: Fraction | int) -> "Surd":
        if isinstance(other, Surd):
            return NotImplemented
        f = Fraction(other)
        return Surd(self.x * f, self.y * f, self.D)

    __rmul__ = __mul__

    def __truediv__(self, other: Fraction | int) -> "Surd":
        return self * (1 / Fraction(other))

    def _cmp(self, other: "Real") -> int:
        return (self - other).sign()

    def __lt__(self, other: "Real") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "Real") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "Real") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "Real") -> bool:
        return self._cmp(other) >= 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, (Surd, Fraction, int)):
            return NotImplemented
        return self._cmp(other) == 0

    def __hash__(self) -> int:
        if self.y == 0:
            return hash(self.x)
        return hash((self.x, self.y, self.D))

    def __float__(self) -> float:
        return float(approximate(self, 80))

    def __str__(self) -> str:
        if self.y == 0:
            return str(self.x)
        sign = "+" if self.y > 0 else "-"
        return f"{self.x} {sign} {abs(self.y)}*sqrt({self.D})"


Real = Union[Fraction, int, Surd]


def approximate(value: Real, bits: int) -> Fraction:
    """floor(value * 2^bits) / 2^bits, computed exactly."""
    return Fraction(floor(value * (1 << bits)), 1 << bits)


def fixed_point(value: Real, bits: int = 128) -> tuple[int, int, int]:
    """(num, den, err) with value within err/den of num/den; exact for
    rationals, one unit of 2^-bits for irrationals."""
    if isinstance(value, Surd) and value.y != 0:
        return floor(value * (1 << bits)), 1 << bits, 1
    x = Fraction(value.x if isinstance(value, Surd) else value)
    return x.numerator, x.denominator, 0


# ---------------------------------------------------------------------------
# Alpha values
# ---------------------------------------------------------------------------


class AlphaValue:
    """Common interface of the alpha variants; values live in [0, 1)."""

    def is_exact(self) -> bool:
        raise NotImplementedError

    def exact(self) -> Real:
        raise NotImplementedError

    def times(self, a: int) -> Real:
        """Exact value of a*alpha (not reduced mod 1)."""
        raise NotImplementedError

    def spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class RationalAlpha(AlphaValue):
    p: int
    q: int

    def __post_init__(self) -> None:
        if self.q <= 0 or not 0 <= self.p < self.q or gcd(self.p, self.q) != 1:
            raise ValueError(f"non-canonical rational alpha {self.p}/{self.q}")

    @classmethod
    def of(cls, value: Fraction) -> "RationalAlpha":
        value = value - (value.numerator // value.denominator)
        return cls(value.numerator, value.denominator)

    def is_exact(self) -> bool:
        return True

    def exact(self) -> Fraction:
        return Fraction(self.p, self.q)

    def times(self, a: int) -> Fraction:
        return Fraction(a * self.p, self.q)

    def spec(self) -> str:
        return f"{self.p}/{self.q}"


@dataclass(frozen=True)
class DecimalAlpha(AlphaValue):
    """Finite decimal literal, taken as the exact rational it denotes.

    ``bits`` is the declared precision; it seeds the guard bits used when
    the value is rendered in fixed point.
    """

    digits: str
    bits: int
    value: Fraction = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        v = Fraction(self.digits)
        object.__setattr__(self, "value", v - (v.numerator // v.denominator))

    def is_exact(self) -> bool:
        return True

    def exact(self) -> Fraction:
        return self.value

    def times(self, a: int) -> Fraction:
        return a * self.value

    def spec(self) -> str:
        return f"{self.digits}@{self.bits}"


@dataclass(frozen=True)
class QuadraticAlpha(AlphaValue):
    """alpha = (a + b*sqrt(D)) / c, stored canonically with c = 1 and
    0 <= alpha < 1."""

    a: Fraction
    b: Fraction
    c: Fraction
    D: int
    label: str = field(default="", compare=False)

    @classmethod
    def of(cls, a: Real, b: Real, c: Real, D: int, label: str = "") -> "QuadraticAlpha":
        a, b, c = Fraction(a), Fraction(b), Fraction(c)
        if c == 0:
            raise ValueError("quadratic alpha with c = 0")
        if D <= 0:
            raise ValueError("radicand must be positive")
        m, D0 = _squarefree_split(D)
        if D0 == 1:
            raise ValueError(f"{D} is a perfect square")
        if b == 0:
            raise ValueError("quadratic alpha with b = 0 is rational")
        x, y = a / c, b * m / c
        x -= Surd(x, y, D0).__floor__()
        return cls(x, y, Fraction(1), D0, label)

    def is_exact(self) -> bool:
        return False

    def exact(self) -> Surd:
        return Surd(self.a, self.b, self.D)

    def times(self, a: int) -> Surd:
        return Surd(a * self.a, a * self.b, self.D)

    def spec(self) -> str:
        if self.label:
            return self.label
        return f"({self.a}) + ({self.b})*sqrt({self.D})"


_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*(\d+)\s*$")
_SQRT_RE = re.compile(r"^\s*sqrt:\s*(\d+)\s*$")
_DECIMAL_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+))\s*@\s*(\d+)\s*$")


def alpha_parse(spec: str) -> AlphaValue:
    """Parse ``p/q``, ``sqrt:D``, ``phi`` or ``DECIMAL@BITS`` into a
    canonical alpha in [0, 1). Degenerate alpha = 0 is rejected."""
    text = spec.strip()
    if m := _RATIONAL_RE.match(text):
        p, q = int(m.group(1)), int(m.group(2))
        if q == 0:
            raise AlphaParseError(f"zero denominator in {spec!r}")
        alpha = RationalAlpha.of(Fraction(p, q))
        if alpha.p == 0:
            raise AlphaParseError(f"{spec!r} is an integer; alpha = 0 mod 1 is degenerate")
        return alpha
    if m := _SQRT_RE.match(text):
        D = int(m.group(1))
        if D == 0 or isqrt(D) ** 2 == D:
            raise AlphaParseError(f"sqrt:{D} is rational (perfect square)")
        return QuadraticAlpha.of(0, 1, 1, D, label=f"sqrt:{D}")
    if text == "phi":
        return QuadraticAlpha.of(1, 1, 2, 5, label="phi")
    if m := _DECIMAL_RE.match(text):
        bits = int(m.group(2))
        if bits <= 0:
            raise AlphaParseError("declared precision must be positive")
        alpha = DecimalAlpha(m.group(1), bits)
        if alpha.value == 0:
            raise AlphaParseError(f"{spec!r} is an integer; alpha = 0 mod 1 is degenerate")
        return alpha
    raise AlphaParseError(f"cannot parse alpha spec {spec!r}")


# ---------------------------------------------------------------------------
# Fixed-point torus values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnitReal:
    """Point of [0, 1): true value lies within num/den +- err/den (mod 1)."""

    num: int
    den: int
    err: int = 0

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def error_bound(self) -> Fraction:
        return Fraction(self.err, self.den)

    def is_exact(self) -> bool:
        return self.err == 0

    def __float__(self) -> float:
        return self.num / self.den

    @classmethod
    def exact(cls, x: Fraction | int) -> "UnitReal":
        x = Fraction(x)
        x -= x.numerator // x.denominator
        return cls(x.numerator, x.denominator, 0)


@dataclass(frozen=True)
class TorusDistance:
    num: int
    den: int
    err: int = 0

    def __post_init__(self) -> None:
        if not 0 <= 2 * self.num <= self.den:
            raise ValueError("torus distance outside [0, 1/2]")

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    @property
    def error_bound(self) -> Fraction:
        return Fraction(self.err, self.den)

    def __float__(self) -> float:
        return self.num / self.den


class Decision(enum.Enum):
    BELOW = "BELOW"
    ABOVE = "ABOVE"
    RETRY = "RETRY"


def default_guard_bits(max_term: int, N: int) -> int:
    """64 bits beyond the resolution needed to separate distances at scale 1/N
    after dilation by integers of size max_term."""
    return 64 + max(1, int(max_term).bit_length()) + max(1, int(N).bit_length())


def frac_part(a: int, alpha: AlphaValue, guard_bits: int = 64) -> UnitReal:
    """{a * alpha} with error below 2^-guard_bits (exact for rational alpha)."""
    if guard_bits <= 0:
        raise ValueError("guard_bits must be positive")
    if alpha.is_exact():
        return UnitReal.exact(alpha.times(a))
    if guard_bits + 1 > max_precision_bits():
        raise PrecisionError(f"{guard_bits} guard bits exceed cap {max_precision_bits()}")
    v = alpha.times(a)
    p = guard_bits
    # floor(a*alpha*2^p) is exact; true value in [m, m+1) * 2^-p, report midpoint
    m = Surd(v.x * (1 << p), v.y * (1 << p), v.D).__floor__() & ((1 << p) - 1)
    return UnitReal(2 * m + 1, 1 << (p + 1), 1)


def exact_frac(a: int, alpha: AlphaValue) -> Real:
    """Exact {a * alpha} as a Fraction or Surd."""
    v = alpha.times(a)
    return v - v.__floor__()


def exact_norm(a: int, alpha: AlphaValue) -> Real:
    """Exact nearest-integer distance ||a * alpha||."""
    f = exact_frac(a, alpha)
    g = 1 - f
    return f if f <= g else g


def norm_le(a: int, alpha: AlphaValue, threshold: Fraction) -> bool:
    """Decide ||a * alpha|| <= threshold symbolically."""
    return exact_norm(a, alpha) <= Fraction(threshold)


def _lift(x: UnitReal, den: int) -> tuple[int, int]:
    if x.den == den:
        return x.num, x.err
    num = x.num * den
    # floor to the new grid; rounding adds at most one unit
    q, r = divmod(num, x.den)
    err = -(-x.err * den // x.den) + (1 if r else 0)
    return q, err


def torus_dist(x: UnitReal, y: UnitReal) -> TorusDistance:
    """min(|x - y|, 1 - |x - y|) with the error radii summed."""
    den = x.den if x.den == y.den else x.den * y.den // gcd(x.den, y.den)
    xn, xe = _lift(x, den)
    yn, ye = _lift(y, den)
    diff = abs(xn - yn) % den
    return TorusDistance(min(diff, den - diff), den, xe + ye)


def compare_with_threshold(d: TorusDistance, threshold: Fraction) -> Decision:
    """Closed comparison of d against threshold; RETRY when undecidable."""
    threshold = Fraction(threshold)
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    tn, td = threshold.numerator, threshold.denominator
    if (d.num + d.err) * td <= tn * d.den:
        return Decision.BELOW
    if (d.num - d.err) * td > tn * d.den:
        return Decision.ABOVE
    return Decision.RETRY


def decide_pair(a: int, b: int, alpha: AlphaValue, threshold: Fraction,
                guard_bits: int = 64) -> bool:
    """||{a alpha} - {b alpha}|| <= threshold, escalating precision of both
    points until the comparison is decided."""
    if alpha.is_exact() or a == b:
        return norm_le(a - b, alpha, threshold)
    bits = guard_bits
    cap = max_precision_bits()
    while True:
        dec = compare_with_threshold(
            torus_dist(frac_part(a, alpha, bits), frac_part(b, alpha, bits)), threshold
        )
        if dec is not Decision.RETRY:
            return dec is Decision.BELOW
        if 2 * bits + 1 > cap:
            raise PrecisionError(f"pair ({a}, {b}) undecided at {bits} bits")
        bits *= 2
