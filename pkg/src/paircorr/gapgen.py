"""Generalized arithmetic progressions, quasi-arithmetic sequences and
reference sequence families."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, gcd, isqrt, log, prod
from typing import Any, Sequence

import numpy as np

from .stats import IntegerSequence

ENUMERATION_CAP = 10**7


class CapExceeded(ValueError):
    pass


class UnsatisfiableSpec(ValueError):
    pass


@dataclass(frozen=True)
class GAPDescriptor:
    """{h + sum_j r_j k_j : 0 <= r_j < s_j}."""

    h: int
    k: tuple[int, ...]
    s: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        object.__setattr__(self, "s", tuple(int(x) for x in self.s))
        if len(self.k) != len(self.s) or not self.k:
            raise ValueError("k and s must be non-empty and of equal length")
        if any(x == 0 for x in self.k):
            raise ValueError("generators must be nonzero")
        if any(x < 1 for x in self.s):
            raise ValueError("side lengths must be positive")

    @property
    def d(self) -> int:
        return len(self.k)

    @property
    def size(self) -> int:
        return prod(self.s)

    def value(self, r: Sequence[int]) -> int:
        return self.h + sum(rj * kj for rj, kj in zip(r, self.k))

    @cached_property
    def is_proper(self) -> bool:
        return gap_enumerate(self).proper

    def to_dict(self) -> dict[str, Any]:
        return {"h": self.h, "k": list(self.k), "s": list(self.s)}


@dataclass(frozen=True)
class GAPEnumeration:
    values: list[int]
    proper: bool
    collisions: dict[int, int] = field(default_factory=dict)


def gap_enumerate(P: GAPDescriptor, cap: int = ENUMERATION_CAP) -> GAPEnumeration:
    """All values over the coordinate box, sorted, with multiplicity."""
    if P.size > cap:
        raise CapExceeded(f"GAP size {P.size} exceeds cap {cap}")
    big = max(abs(P.h), 1) + sum((sj - 1) * abs(kj) for sj, kj in zip(P.s, P.k))
    if big < 1 << 62:
        vals = np.full(1, P.h, dtype=np.int64)
        for kj, sj in zip(P.k, P.s):
            vals = (vals[:, None] + kj * np.arange(sj, dtype=np.int64)[None, :]).ravel()
        vals.sort()
        uniq, counts = np.unique(vals, return_counts=True)
        coll = {int(v): int(c) for v, c in zip(uniq[counts > 1], counts[counts > 1])}
        return GAPEnumeration(vals.tolist(), not coll, coll)
    out = [P.h]
    for kj, sj in zip(P.k, P.s):
        out = [v + r * kj for v in out for r in range(sj)]
    out.sort()
    seen: dict[int, int] = {}
    for v in out:
        seen[v] = seen.get(v, 0) + 1
    coll = {v: c for v, c in seen.items() if c > 1}
    return GAPEnumeration(out, not coll, coll)


def _boxes(s: Sequence[int]) -> list[tuple[int, ...]]:
    return [tuple(int(x) for x in r) for r in np.indices(tuple(s)).reshape(len(s), -1).T]


@dataclass(frozen=True)
class GAPRepresentation:
    """Coordinates r (0 <= r_j < s_j) of a set of elements inside a GAP."""

    descriptor: GAPDescriptor
    coords: dict[int, tuple[int, ...]]

    def validate(self) -> None:
        P = self.descriptor
        for b, r in self.coords.items():
            if len(r) != P.d or any(not 0 <= rj < sj for rj, sj in zip(r, P.s)):
                raise ValueError(f"coordinates {r} of {b} outside the box {P.s}")
            if P.value(r) != b:
                raise ValueError(f"coordinates {r} do not reconstruct {b}")

    @property
    def elements(self) -> list[int]:
        return sorted(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    @classmethod
    def of_elements(cls, P: GAPDescriptor, elements: Sequence[int]) -> "GAPRepresentation":
        """Locate each element in a proper GAP."""
        if not P.is_proper:
            raise ValueError("coordinates are ambiguous in an improper GAP")
        table = {P.value(r): r for r in _boxes(P.s)}
        coords = {}
        for b in elements:
            if b not in table:
                raise ValueError(f"{b} is not in the GAP")
            coords[int(b)] = table[b]
        return cls(P, coords)

    def to_dict(self, N: int | None = None) -> dict[str, Any]:
        out: dict[str, Any] = {} if N is None else {"N": N}
        out.update(self.descriptor.to_dict())
        out["coords"] = [[b, list(self.coords[b])] for b in sorted(self.coords)]
        return out

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "GAPRepresentation":
        P = GAPDescriptor(obj["h"], tuple(obj["k"]), tuple(obj["s"]))
        rep = cls(P, {int(b): tuple(int(x) for x in r) for b, r in obj["coords"]})
        rep.validate()
        return rep


# ---------------------------------------------------------------------------
# Quasi-arithmetic sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuasiArithmeticSpec:
    """Parameters of a quasi-arithmetic sequence of degree d.

    The GAP part is a nested family: the first d-1 side lengths (the
    ``row_shape``) are fixed and the last one grows, so the GAP witnessed at
    each checkpoint is an initial segment of the next. Each row of GAP
    elements is followed by a run of fillers drawn from the hole between
    consecutive rows. ``row_shape``, ``k`` and ``gap_width`` are derived
    when left unset.
    """

    d: int
    C: Fraction
    K: Fraction
    checkpoints: tuple[int, ...]
    row_shape: tuple[int, ...] | None = None
    k: tuple[int, ...] | None = None
    gap_width: int | None = None
    h: int = 1
    seed: int = 0
    length: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "C", Fraction(self.C))
        object.__setattr__(self, "K", Fraction(self.K))
        object.__setattr__(self, "checkpoints", tuple(int(n) for n in self.checkpoints))


def default_checkpoints(N1: int, count: int) -> tuple[int, ...]:
    return tuple(N1 << i for i in range(count))


@dataclass(frozen=True)
class QuasiArithmeticInstance:
    sequence: IntegerSequence
    spec: QuasiArithmeticSpec
    witnesses: dict[int, GAPRepresentation]


def _divisors(n: int) -> list[int]:
    small = [x for x in range(1, isqrt(n) + 1) if n % x == 0]
    return sorted(set(small + [n // x for x in small]))


def _auto_row_shape(d: int, checkpoints: Sequence[int]) -> tuple[int, ...]:
    if d == 1:
        return ()
    g = 0
    for n in checkpoints:
        g = gcd(g, n)
    target = checkpoints[0] ** ((d - 1) / d)
    m = min(_divisors(g), key=lambda x: (abs(log(x) - log(target)), x))
    shape = []
    for j in range(d - 1, 0, -1):
        # split the remaining row size into j near-equal divisor factors
        f = min(_divisors(m), key=lambda x: (abs(log(x) - log(m) / j), x))
        shape.append(f)
        m //= f
    shape[-1] *= m
    return tuple(shape)


def _internal_generators(shape: Sequence[int]) -> tuple[list[int], int]:
    """Generators for the fixed dimensions and the span of one row."""
    ks, span = [], 0
    for sj in shape:
        kj = 1 if not ks else 2 * span + 1
        ks.append(kj)
        span += (sj - 1) * kj
    return ks, span


def quasi_arithmetic_sequence(spec: QuasiArithmeticSpec) -> QuasiArithmeticInstance:
    """Build a strictly increasing sequence whose first N_i terms contain
    at least ceil(C N_i) elements of a d-dimensional GAP of size <= K N_i,
    for every checkpoint N_i; returns the per-checkpoint witnesses."""
    d, C, K = spec.d, spec.C, spec.K
    cps = spec.checkpoints
    if d < 1:
        raise UnsatisfiableSpec("degree must be >= 1")
    if not 0 < C <= 1:
        raise UnsatisfiableSpec(f"density C = {C} must lie in (0, 1]")
    if K < 1:
        raise UnsatisfiableSpec(f"size constant K = {K} must be >= 1")
    if not cps or any(b <= a for a, b in zip(cps, cps[1:])) or cps[0] < 1:
        raise UnsatisfiableSpec("checkpoints must be positive and strictly increasing")
    if spec.h < 1:
        raise UnsatisfiableSpec("base point h must be positive")

    shape = tuple(spec.row_shape) if spec.row_shape is not None else _auto_row_shape(d, cps)
    if len(shape) != d - 1 or any(x < 1 for x in shape):
        raise UnsatisfiableSpec(f"row shape {shape} does not fit degree {d}")
    m = prod(shape)
    fillers = (m * (1 - C) / C).__floor__()
    if spec.k is not None:
        ks = list(spec.k)
        if len(ks) != d:
            raise UnsatisfiableSpec("need exactly d generators")
        span = 0
        for j, sj in enumerate(shape):
            if ks[j] <= span:
                raise UnsatisfiableSpec("generators must exceed the span of lower dimensions")
            span += (sj - 1) * ks[j]
        if ks[-1] <= span:
            raise UnsatisfiableSpec("last generator must exceed the row span")
        width = ks[-1] - span - 1
    else:
        ks, span = _internal_generators(shape)
        width = spec.gap_width if spec.gap_width is not None else 2 * fillers
        ks.append(span + 1 + width)
    if width < fillers:
        raise UnsatisfiableSpec(f"gap between rows holds {width} values, need {fillers} fillers")

    length = spec.length or cps[-1]
    if length < cps[-1]:
        raise UnsatisfiableSpec("length shorter than the last checkpoint")
    rng = random.Random(spec.seed)
    row_coords = {spec.h + sum(r * k for r, k in zip(rv, ks)): rv for rv in _boxes(shape)} if shape else {spec.h: ()}
    row = sorted(row_coords)
    terms: list[int] = []
    gap_coords: dict[int, tuple[int, ...]] = {}
    is_gap: list[bool] = []
    r_last = 0
    while len(terms) < length:
        base = r_last * ks[-1]
        for b in row:
            terms.append(b + base)
            is_gap.append(True)
            gap_coords[b + base] = row_coords[b] + (r_last,)
        hole = spec.h + base + span + 1
        for f in sorted(rng.sample(range(hole, hole + width), fillers)):
            terms.append(f)
            is_gap.append(False)
        r_last += 1
    terms, is_gap = terms[:length], is_gap[:length]

    seq = IntegerSequence(
        tuple(terms),
        origin=f"quasi d={d},C={C},K={K},checkpoints={','.join(map(str, cps))},seed={spec.seed}",
    )
    witnesses = {}
    for N in cps:
        members = [b for b, g in zip(terms[:N], is_gap[:N]) if g]
        need = ceil(C * N)
        if len(members) < need:
            raise UnsatisfiableSpec(f"only {len(members)} GAP terms among first {N}, need {need}")
        rows = ceil(len(members) / m)
        P = GAPDescriptor(spec.h, tuple(ks), shape + (rows,))
        if P.size > K * N:
            raise UnsatisfiableSpec(
                f"GAP of size {P.size} exceeds K*N = {K * N} at N = {N}; choose a row shape dividing N"
            )
        witnesses[N] = GAPRepresentation(P, {b: gap_coords[b] for b in members})
    return QuasiArithmeticInstance(seq, spec, witnesses)


def verify_quasi_arithmetic(seq: IntegerSequence, witnesses: dict[int, GAPRepresentation],
                            C: Fraction, K: Fraction) -> bool:
    """Independent recheck: membership count against the enumerated GAP."""
    for N, rep in witnesses.items():
        rep.validate()
        enum = gap_enumerate(rep.descriptor)
        if not enum.proper or rep.descriptor.size > K * N:
            return False
        gap = set(enum.values)
        if sum(1 for a in seq.terms[:N] if a in gap) < ceil(C * N):
            return False
    return True


# ---------------------------------------------------------------------------
# Reference families
# ---------------------------------------------------------------------------


def primes(N: int) -> list[int]:
    if N < 1:
        return []
    bound = 15 if N < 6 else int(N * (log(N) + log(log(N)))) + 3
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return [int(p) for p in np.flatnonzero(sieve)[:N]]


def family(name: str, N: int, *, degree: int = 2, base: int = 2, range_: int | None = None,
           seed: int = 0) -> IntegerSequence:
    """First N terms of primes, n^degree, base^n, random distinct in
    [1, range_], or the plain progression 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if name == "primes":
        return IntegerSequence(tuple(primes(N)), origin="primes")
    if name == "poly":
        if degree < 1:
            raise ValueError("poly degree must be >= 1")
        return IntegerSequence(tuple(n**degree for n in range(1, N + 1)), origin=f"poly degree={degree}")
    if name == "lacunary":
        if base < 2:
            raise ValueError("lacunary base must be >= 2")
        return IntegerSequence(tuple(base**n for n in range(1, N + 1)), origin=f"lacunary base={base}")
    if name in ("random", "random_distinct"):
        R = range_ if range_ is not None else N**3
        if R < N:
            raise ValueError(f"range {R} too small for {N} distinct values")
        rng = random.Random(seed)
        return IntegerSequence(tuple(sorted(rng.sample(range(1, R + 1), N))),
                               origin=f"random_distinct range={R},seed={seed}")
    if name == "ap":
        return IntegerSequence(tuple(range(1, N + 1)), origin="ap")
    raise ValueError(f"unknown family {name!r}")


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

SEQ_HEADER = "# paircorr-seq v1"


def write_sequence(path: str, seq: IntegerSequence) -> None:
    with open(path, "w") as fh:
        fh.write(f"{SEQ_HEADER} origin={seq.origin}\n")
        for t in seq.terms:
            fh.write(f"{t}\n")


def read_sequence(path: str) -> IntegerSequence:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith(SEQ_HEADER):
        raise ValueError(f"{path}: missing '{SEQ_HEADER}' header")
    origin = "file"
    rest = lines[0][len(SEQ_HEADER):].strip()
    if rest.startswith("origin="):
        origin = rest[len("origin="):]
    terms = []
    for no, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line:
            continue
        try:
            terms.append(int(line))
        except ValueError:
            raise ValueError(f"{path}:{no}: not an integer: {line!r}") from None
    return IntegerSequence(tuple(terms), origin=origin)


def write_witness(path: str, witnesses: dict[int, GAPRepresentation]) -> None:
    doc = {"checkpoints": [witnesses[N].to_dict(N) for N in sorted(witnesses)]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def read_witness(path: str) -> dict[int | None, GAPRepresentation]:
    """Witness file: either one GAP object or {"checkpoints": [...]}."""
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc["checkpoints"] if "checkpoints" in doc else [doc]
    return {e.get("N"): GAPRepresentation.from_dict(e) for e in entries}
