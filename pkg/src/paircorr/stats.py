"""Counting kernels: pair correlation R2, difference spectrum A_N(v) and
additive energy E(A), each with a fast path and a slow reference."""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import Counter
from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import floor, gcd
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .exactreal import (
    AlphaValue,
    Decision,
    PrecisionError,
    UnitReal,
    compare_with_threshold,
    decide_pair,
    default_guard_bits,
    exact_norm,
    frac_part,
    torus_dist,
)

# differences are binned directly when the value span is below this
BINCOUNT_SPAN_LIMIT = 1 << 26
_CHUNK = 1 << 22
SMALL_SET = 64
_INT64_SAFE = 1 << 62

Resolver = Callable[[int, int], bool]


@dataclass(frozen=True)
class IntegerSequence:
    """Strictly increasing positive integers plus a description of where
    they came from (generator family and parameters, or ``file``)."""

    terms: tuple[int, ...]
    origin: str = "inline"

    def __post_init__(self) -> None:
        terms = tuple(int(t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        if terms and terms[0] < 1:
            raise ValueError("sequence terms must be positive")
        for prev, nxt in zip(terms, terms[1:]):
            if nxt <= prev:
                raise ValueError(f"sequence not strictly increasing at {prev}, {nxt}")

    def __len__(self) -> int:
        return len(self.terms)

    def prefix(self, N: int) -> tuple[int, ...]:
        if N > len(self.terms):
            raise ValueError(f"N = {N} exceeds sequence length {len(self.terms)}")
        return self.terms[:N]


# ---------------------------------------------------------------------------
# Difference counting
# ---------------------------------------------------------------------------


def _int64_ok(values: Sequence[int]) -> bool:
    return bool(values) and -_INT64_SAFE < min(values) and max(values) < _INT64_SAFE and (
        max(values) - min(values) < _INT64_SAFE
    )


def _diff_chunks(a: np.ndarray, offsets: range) -> Iterator[np.ndarray]:
    buf: list[np.ndarray] = []
    size = 0
    for k in offsets:
        d = a[k:] - a[:-k]
        buf.append(d)
        size += d.size
        if size >= _CHUNK:
            yield np.concatenate(buf)
            buf, size = [], 0
    if buf:
        yield np.concatenate(buf)


def _dense(span: int, pairs: int) -> bool:
    """Bincount pays off when the table is not much wider than the data."""
    return span <= BINCOUNT_SPAN_LIMIT and span <= 8 * pairs + 4096


def _count_offsets(a: np.ndarray, offsets: range, span: int) -> tuple[np.ndarray, np.ndarray]:
    if _dense(span, len(offsets) * len(a)):
        acc = np.zeros(span + 1, dtype=np.int64)
        for chunk in _diff_chunks(a, offsets):
            acc += np.bincount(chunk, minlength=span + 1)
        vals = np.flatnonzero(acc)
        return vals.astype(np.int64), acc[vals]
    parts_v, parts_c = [], []
    for chunk in _diff_chunks(a, offsets):
        v, c = np.unique(chunk, return_counts=True)
        parts_v.append(v)
        parts_c.append(c.astype(np.int64))
    return _merge_counts(parts_v, parts_c)


def _merge_counts(parts_v: list[np.ndarray], parts_c: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    if not parts_v:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    v = np.concatenate(parts_v)
    c = np.concatenate(parts_c)
    order = np.argsort(v, kind="stable")
    v, c = v[order], c[order]
    starts = np.flatnonzero(np.r_[True, v[1:] != v[:-1]])
    return v[starts], np.add.reduceat(c, starts)


def count_differences(values: Iterable[int], workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Multiplicities of the positive differences y - x over pairs of
    distinct values. Returns (differences ascending, counts)."""
    vals = sorted(set(int(v) for v in values))
    n = len(vals)
    if n < 2:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if n <= SMALL_SET or not _int64_ok(vals):
        cnt: Counter[int] = Counter()
        for i, x in enumerate(vals):
            for y in vals[i + 1:]:
                cnt[y - x] += 1
        keys = sorted(cnt)
        dtype = np.int64 if _int64_ok(vals) else object
        return np.array(keys, dtype=dtype), np.array([cnt[k] for k in keys], dtype=np.int64)
    a = np.asarray(vals, dtype=np.int64)
    span = int(a[-1] - a[0])
    workers = max(1, min(workers, n - 1))
    if workers == 1:
        return _count_offsets(a, range(1, n), span)
    # interleaved offsets balance the triangular workload; merge is exact
    ranges = [range(1 + w, n, workers) for w in range(workers)]
    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(lambda r: _count_offsets(a, r, span), ranges))
    return _merge_counts([p[0] for p in parts], [p[1] for p in parts])


@dataclass(frozen=True, eq=False)
class DifferenceSpectrum(Mapping):
    """v -> A_N(v) for nonzero v, stored as the positive half."""

    N: int
    positive: np.ndarray
    pos_counts: np.ndarray

    def __getitem__(self, v: int) -> int:
        v = abs(int(v))
        if v == 0:
            raise KeyError(0)
        i = int(np.searchsorted(self.positive, v))
        if i < len(self.positive) and int(self.positive[i]) == v:
            return int(self.pos_counts[i])
        raise KeyError(v)

    def get(self, v: int, default: int = 0) -> int:
        try:
            return self[v]
        except KeyError:
            return default

    def __iter__(self) -> Iterator[int]:
        for v in self.positive:
            yield int(v)
            yield -int(v)

    def __len__(self) -> int:
        return 2 * len(self.positive)

    def sum_of_squares(self) -> int:
        """Sum over v != 0 of A_N(v)^2."""
        return 2 * sum(int(c) * int(c) for c in self.pos_counts)

    def total(self) -> int:
        return 2 * int(self.pos_counts.sum())

    def by_multiplicity(self) -> list[tuple[int, int]]:
        """(v, A_N(v)) for v > 0, highest multiplicity first, then smaller v."""
        order = np.lexsort((np.arange(len(self.positive)), -self.pos_counts))
        return [(int(self.positive[i]), int(self.pos_counts[i])) for i in order]


def difference_spectrum(seq: IntegerSequence | Sequence[int], N: int | None = None,
                        workers: int = 1) -> DifferenceSpectrum:
    terms = seq.terms if isinstance(seq, IntegerSequence) else tuple(seq)
    N = len(terms) if N is None else N
    if N < 1:
        raise ValueError("difference spectrum needs N >= 1")
    if N > len(terms):
        raise ValueError(f"N = {N} exceeds sequence length {len(terms)}")
    vals, counts = count_differences(terms[:N], workers=workers)
    return DifferenceSpectrum(N, vals, counts)


def difference_spectrum_bruteforce(terms: Sequence[int]) -> dict[int, int]:
    out: Counter[int] = Counter()
    for x, ax in enumerate(terms):
        for y, ay in enumerate(terms):
            if x != y:
                out[ax - ay] += 1
    return dict(out)


def multiplicity(terms: Sequence[int], v: int) -> int:
    """A_N(v) for a single v in O(N)."""
    if v == 0:
        return 0
    present = set(terms)
    return sum(1 for a in terms if a - v in present)


# ---------------------------------------------------------------------------
# Additive energy
# ---------------------------------------------------------------------------


def additive_energy(A: Iterable[int]) -> int:
    """#{(a,b,c,d) in A^4 : a + b = c + d}, by counting pairwise sums."""
    items = [int(a) for a in A]
    vals = sorted(set(items))
    if len(vals) != len(items):
        raise ValueError("additive_energy expects distinct elements")
    if not vals:
        raise ValueError("additive_energy of empty set")
    if len(vals) <= SMALL_SET or not _int64_ok(vals) or 2 * max(abs(vals[0]), abs(vals[-1])) >= _INT64_SAFE:
        sums: Counter[int] = Counter(a + b for a in vals for b in vals)
        return sum(c * c for c in sums.values())
    a = np.asarray(vals, dtype=np.int64) - vals[0]
    n = len(a)
    span = 2 * int(a[-1])
    rows = max(1, _CHUNK // n)
    if _dense(span, n * n):
        acc = np.zeros(span + 1, dtype=np.int64)
        for i in range(0, n, rows):
            acc += np.bincount((a[i:i + rows, None] + a[None, :]).ravel(), minlength=span + 1)
        return int(np.dot(acc, acc))
    parts_v, parts_c = [], []
    for i in range(0, n, rows):
        v, c = np.unique((a[i:i + rows, None] + a[None, :]).ravel(), return_counts=True)
        parts_v.append(v)
        parts_c.append(c.astype(np.int64))
    _, c = _merge_counts(parts_v, parts_c)
    return int(np.dot(c, c))


def additive_energy_bruteforce(A: Iterable[int]) -> int:
    vals = list(A)
    return sum(1 for a, b, c, d in product(vals, repeat=4) if a + b == c + d)


def energy_identity_check(A: Iterable[int], spectrum: DifferenceSpectrum) -> bool:
    """E(A) == N^2 + sum_{v != 0} A_N(v)^2; the diagonal v = 0 gives N^2."""
    vals = list(A)
    N = len(vals)
    if spectrum.N != N:
        raise ValueError("spectrum was computed at a different N")
    return additive_energy(vals) == N * N + spectrum.sum_of_squares()


# ---------------------------------------------------------------------------
# Pair correlation
# ---------------------------------------------------------------------------


def _common_grid(points: Sequence[UnitReal]) -> tuple[list[int], int, int]:
    dens = {p.den for p in points}
    if len(dens) == 1:
        den = dens.pop()
        return [p.num % den for p in points], den, max(p.err for p in points)
    if all(p.err == 0 for p in points):
        den = 1
        for d in dens:
            den = den * d // gcd(den, d)
        return [p.num * (den // p.den) for p in points], den, 0
    den = max(dens)
    xs, err = [], 0
    for p in points:
        q, r = divmod(p.num * den, p.den)
        xs.append(q % den)
        err = max(err, -(-p.err * den // p.den) + (1 if r else 0))
    return xs, den, err


def _sweep_count(xs: list[int], den: int, W: int) -> int:
    """Ordered pairs i != j with circular integer distance <= W; xs sorted,
    2W < den. Two-pointer scan over the sequence tiled three times."""
    n = len(xs)
    ext = [x - den for x in xs] + xs + [x + den for x in xs]
    lo, hi = 0, n
    total = 0
    for x in xs:
        while ext[lo] < x - W:
            lo += 1
        while hi < 3 * n and ext[hi] <= x + W:
            hi += 1
        total += hi - lo - 1
    return total


def _band_pairs(xs: list[int], den: int, lo_w: int, hi_w: int) -> Iterator[tuple[int, int]]:
    """Ordered pairs (i, j) of sorted positions with lo_w < dist <= hi_w."""
    n = len(xs)
    ext = [x - den for x in xs] + xs + [x + den for x in xs]
    for i, x in enumerate(xs):
        for a, b in ((x + lo_w + 1, x + hi_w), (x - hi_w, x - max(lo_w, 0) - 1)):
            for t in range(bisect_left(ext, a), bisect_right(ext, b)):
                j = t % n
                if j != i:
                    yield i, j


def pair_correlation(points: Sequence[UnitReal], s: Fraction | int,
                     resolve: Resolver | None = None) -> Fraction:
    """(1/N) #{i != j : ||x_i - x_j|| <= s/N}, ordered pairs, closed bound.

    Inexact points are swept with sure/unsure windows; each unsure pair is
    handed to ``resolve(i, j)`` (original indices), which must decide it
    exactly, typically by recomputing both points at higher precision.
    """
    N = len(points)
    if N < 1:
        raise ValueError("pair correlation needs N >= 1")
    s = Fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    if N == 1:
        return Fraction(0)
    xs, den, e = _common_grid(points)
    order = sorted(range(N), key=xs.__getitem__)
    xs = [xs[i] for i in order]
    T = floor(s * den / N)
    w_lo, w_hi = T - 2 * e, T + 2 * e
    if 2 * w_lo >= den - 1:
        return Fraction(N - 1)
    if 2 * w_hi >= den - 1:
        return pair_correlation_bruteforce(points, s, resolve)
    count = _sweep_count(xs, den, w_lo) if w_lo >= 0 else 0
    if e:
        cache: dict[tuple[int, int], bool] = {}
        for i, j in _band_pairs(xs, den, max(w_lo, -1), w_hi):
            a, b = order[i], order[j]
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                cache[key] = _decide(points[a], points[b], s / N, resolve, a, b)
            count += cache[key]
    return Fraction(count, N)


def _decide(x: UnitReal, y: UnitReal, threshold: Fraction, resolve: Resolver | None,
            i: int, j: int) -> bool:
    dec = compare_with_threshold(torus_dist(x, y), threshold)
    if dec is not Decision.RETRY:
        return dec is Decision.BELOW
    if resolve is None:
        raise PrecisionError(f"pair ({i}, {j}) undecidable at available precision")
    return resolve(i, j)


def pair_correlation_bruteforce(points: Sequence[UnitReal], s: Fraction | int,
                                resolve: Resolver | None = None) -> Fraction:
    """O(N^2) all-pairs R2."""
    N = len(points)
    if N < 1:
        raise ValueError("pair correlation needs N >= 1")
    threshold = Fraction(s) / N
    count = 0
    for i in range(N):
        for j in range(i + 1, N):
            count += 2 * _decide(points[i], points[j], threshold, resolve, i, j)
    return Fraction(count, N)


@dataclass(frozen=True)
class PairCorrelationCurve:
    N: int
    samples: list[tuple[Fraction, Fraction]] = field(default_factory=list)

    def r2(self, s: Fraction) -> Fraction:
        for si, r in self.samples:
            if si == s:
                return r
        raise KeyError(s)


def dilated_points(terms: Sequence[int], alpha: AlphaValue, guard_bits: int | None = None) -> list[UnitReal]:
    if guard_bits is None:
        guard_bits = default_guard_bits(max(terms), len(terms))
    return [frac_part(a, alpha, guard_bits) for a in terms]


def pair_correlation_curve(seq: IntegerSequence | Sequence[int], alpha: AlphaValue, N: int,
                           s_grid: Sequence[Fraction | int | str],
                           guard_bits: int | None = None) -> PairCorrelationCurve:
    terms = seq.prefix(N) if isinstance(seq, IntegerSequence) else tuple(seq)[:N]
    if len(terms) < N:
        raise ValueError(f"N = {N} exceeds sequence length")
    grid = [Fraction(s) for s in s_grid]
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("s_grid must be sorted ascending")
    if not grid:
        return PairCorrelationCurve(N, [])
    if guard_bits is None:
        guard_bits = default_guard_bits(max(terms), N)
    points = dilated_points(terms, alpha, guard_bits)
    samples = []
    for s in grid:
        def resolve(i: int, j: int, _t: Fraction = s / N) -> bool:
            return decide_pair(terms[i], terms[j], alpha, _t, guard_bits)
        samples.append((s, pair_correlation(points, s, resolve)))
    return PairCorrelationCurve(N, samples)


def pair_correlation_oracle(terms: Sequence[int], alpha: AlphaValue, s: Fraction | int) -> Fraction:
    """Independent exact R2: group all ordered pairs by their difference v
    and decide ||v alpha|| <= s/N symbolically once per distinct |v|."""
    N = len(terms)
    threshold = Fraction(s) / N
    vals, counts = count_differences(terms)
    total = 0
    if alpha.is_exact() and len(vals) and vals.dtype != object:
        x = alpha.exact()
        p, q = x.numerator, x.denominator
        tn, td = threshold.numerator, threshold.denominator
        if q < (1 << 31) and td < (1 << 31) and tn * q < (1 << 62):
            r = (vals % q) * p % q
            dist = np.minimum(r, q - r)
            return Fraction(2 * int(counts[dist * td <= tn * q].sum()), N)
    for v, c in zip(vals, counts):
        if exact_norm(int(v), alpha) <= threshold:
            total += int(c)
    return Fraction(2 * total, N)
