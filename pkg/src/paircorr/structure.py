"""Sumsets, small doubling and exhaustive GAP covers for tiny sets.

Nothing here attempts an effective Freiman theorem. Covers are found by brute
force over a bounded parameter space, which is only sensible for |A| <= 30.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd, prod
from typing import Iterable, Iterator

import numpy as np

from .gapgen import CapExceeded, GAPDescriptor, _boxes
from .stats import additive_energy

SUMSET_CAP = 10**8
COVER_CAP = 30


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class SumsetReport:
    A_size: int
    sumset_size: int
    doubling: Fraction

    def __post_init__(self):
        if not self.A_size <= self.sumset_size <= self.A_size**2:
            raise ValueError("sumset size outside [|A|, |A|^2]")


def sumset(A: Iterable[int], B: Iterable[int]) -> set[int]:
    """{a + b : a in A, b in B}."""
    a = np.array(sorted(set(A)), dtype=object)
    b = sorted(set(B))
    if len(a) * len(b) > SUMSET_CAP:
        raise CapExceeded(f"|A||B| = {len(a) * len(b)} exceeds {SUMSET_CAP}")
    if not len(a) or not len(b):
        return set()
    try:
        a64 = a.astype(np.int64)
        if max(abs(int(a64[0])), abs(int(a64[-1]))) + max(abs(b[0]), abs(b[-1])) >= 2**62:
            raise OverflowError
        out: set[int] = set()
        rows = max(1, (1 << 22) // len(a64))
        b64 = np.array(b, dtype=np.int64)
        for i in range(0, len(b64), rows):
            block = np.unique(np.add.outer(b64[i:i + rows], a64))
            out.update(block.tolist())
        return out
    except OverflowError:
        return {x + y for x in a.tolist() for y in b}


def sumset_report(A: Iterable[int]) -> SumsetReport:
    A = set(A)
    if not A:
        raise ValueError("empty set")
    size = len(sumset(A, A))
    return SumsetReport(len(A), size, Fraction(size, len(A)))


def energy_lower_bound_check(A0: Iterable[int], C_bound: Fraction | int | str | float) -> bool:
    """Given |A0 + A0| <= C |A0|, check E(A0) >= |A0|^3 / C."""
    A0 = sorted(set(A0))
    C_bound = Fraction(C_bound)
    report = sumset_report(A0)
    if report.sumset_size > C_bound * report.A_size:
        raise PreconditionError(f"|A+A| = {report.sumset_size} > {C_bound} * {report.A_size}")
    n = len(A0)
    return additive_energy(A0) * C_bound >= n**3


# ---------------------------------------------------------------------------
# Cover search
# ---------------------------------------------------------------------------


def _divisors(n: int) -> Iterator[int]:
    i = 1
    while i * i <= n:
        if n % i == 0:
            yield i
            if i * i != n:
                yield n // i
        i += 1


def _generator_candidates(A: list[int]) -> list[int]:
    cands: set[int] = set()
    for x, y in combinations(A, 2):
        cands.update(_divisors(abs(x - y)))
    return sorted(cands)


def _side_lengths(d: int, limit: int) -> Iterator[tuple[int, ...]]:
    """Tuples with s_j >= 2 and product <= limit, lexicographic."""
    if d == 0:
        yield ()
        return
    for first in range(2, limit // 2 ** (d - 1) + 1):
        for rest in _side_lengths(d - 1, limit // first):
            yield (first,) + rest


def _offset_mask(k: tuple[int, ...], s: tuple[int, ...]) -> int:
    """Bitset of {r . k : 0 <= r_j < s_j}."""
    mask = 1
    for kj, sj in zip(k, s):
        layer = mask
        for _ in range(sj - 1):
            layer <<= kj
            mask |= layer
    return mask


def gap_cover_search(A: Iterable[int], d_max: int, K_bound: Fraction | int | str | float) -> GAPDescriptor | None:
    """First GAP (h, k, s) with d <= d_max, A inside P and prod(s) <= K |A|.

    Order: d ascending, then increasing generator tuples k drawn from the
    divisors of differences of A, then s lexicographic, then h descending.
    Generators are kept strictly increasing, which loses nothing since the
    coordinates can be permuted. A singleton is covered by (a, (1,), (1,)).
    """
    A = sorted(set(A))
    if not A:
        raise ValueError("empty set")
    if len(A) > COVER_CAP:
        raise CapExceeded(f"|A| = {len(A)} exceeds {COVER_CAP}")
    K_bound = Fraction(K_bound)
    limit = int(K_bound * len(A))
    lo, span = A[0], A[-1] - A[0]
    if span == 0:
        return GAPDescriptor(lo, (1,), (1,)) if limit >= 1 else None
    deltas = [a - lo for a in A[1:]]
    gens = _generator_candidates(A)
    g = gcd(*deltas)
    for d in range(1, d_max + 1):
        if 2**d > limit:
            break
        shapes = [s for s in _side_lengths(d, limit) if prod(s) >= len(A)]
        for k in combinations(gens, d):
            if g % gcd(*k):
                continue
            for s in shapes:
                if sum((sj - 1) * kj for sj, kj in zip(s, k)) < span:
                    continue
                S = _offset_mask(k, s)
                # x = lo - h must put every x + delta inside S
                ok = S
                for delta in deltas:
                    ok &= S >> delta
                    if not ok:
                        break
                if ok:
                    x = (ok & -ok).bit_length() - 1
                    return GAPDescriptor(lo - x, tuple(k), tuple(s))
    return None


def covers(P: GAPDescriptor, A: Iterable[int]) -> bool:
    elems = {P.value(r) for r in _boxes(P.s)}
    return all(a in elems for a in A)
