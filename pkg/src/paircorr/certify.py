"""Constructive non-Poissonian certificates for quasi-arithmetic sequences.

The pipeline runs the pigeonhole chain explicitly: heavy coordinate
differences, a short arc holding many dilated differences, two heavy
vectors whose pair families overlap a lot, and finally a single integer
difference v that is both frequent and nearly an integer after dilation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from math import ceil, floor, prod
from typing import Any, Sequence

from .exactreal import (
    AlphaValue,
    Real,
    Surd,
    TorusDistance,
    UnitReal,
    approximate,
    exact_frac,
    exact_norm,
    fixed_point,
)
from .gapgen import GAPDescriptor, GAPRepresentation
from .stats import (
    DifferenceSpectrum,
    IntegerSequence,
    count_differences,
    difference_spectrum,
    multiplicity,
    pair_correlation_curve,
)

SAMPLE_PAIRS = 100


class PreconditionError(ValueError):
    pass


class GuaranteeViolation(AssertionError):
    """A pigeonhole guarantee failed although its preconditions held."""


@dataclass(frozen=True)
class ProofConstants:
    """gamma = C^2 / ((1 + 2^d) K), L = ceil((1 + K) / gamma), tau = 1/L^2,
    psi = L / gamma, rho = tau / 3. With K = 1, L = ceil(2 / gamma)."""

    tau: Fraction
    psi: Fraction
    rho: Fraction
    d: int | None = None
    C: Fraction | None = None
    K: Fraction | None = None
    gamma: Fraction | None = None
    L: int | None = None

    @classmethod
    def from_params(cls, d: int, C: Fraction | int | str, K: Fraction | int | str = 1) -> "ProofConstants":
        C, K = Fraction(C), Fraction(K)
        if d < 1 or not 0 < C <= 1 or K < 1:
            raise ValueError(f"need d >= 1, 0 < C <= 1, K >= 1 (got {d}, {C}, {K})")
        gamma = C * C / ((1 + 2**d) * K)
        L = ceil((1 + K) / gamma)
        tau = Fraction(1, L * L)
        return cls(tau, L / gamma, tau / 3, d, C, K, gamma, L)

    @classmethod
    def custom(cls, tau: Fraction | str, psi: Fraction | str) -> "ProofConstants":
        tau, psi = Fraction(tau), Fraction(psi)
        if tau <= 0 or psi <= 0:
            raise ValueError("tau and psi must be positive")
        return cls(tau, psi, tau / 3)

    @property
    def derived(self) -> bool:
        return self.gamma is not None

    def heavy_threshold(self, N: int) -> int:
        return ceil(self._gamma() * N)

    def overlap_threshold(self, N: int) -> int:
        return ceil(Fraction(N, self._L() ** 2))

    def arc_width(self, N: int) -> Fraction:
        return self._L() / (self._gamma() * N)

    def _gamma(self) -> Fraction:
        if self.gamma is None:
            raise PreconditionError("constants were given directly; gamma and L are unknown")
        return self.gamma

    def _L(self) -> int:
        if self.L is None:
            raise PreconditionError("constants were given directly; gamma and L are unknown")
        return self.L


@dataclass(frozen=True)
class NonPoissonianCertificate:
    N: int
    v: int
    multiplicity: int
    dist: TorusDistance
    dist_exact: Real
    constants: ProofConstants
    pair_list_sample: list[tuple[int, int]] = field(default_factory=list)
    method: str = "search"


def _torus_distance(x: Real) -> TorusDistance:
    return TorusDistance(*fixed_point(x))


def _sample_pairs(terms: Sequence[int], v: int, limit: int = SAMPLE_PAIRS) -> list[tuple[int, int]]:
    index = {a: i for i, a in enumerate(terms, start=1)}
    out = []
    for l, a in enumerate(terms, start=1):
        k = index.get(a + v)
        if k is not None:
            out.append((k, l))
            if len(out) >= limit:
                break
    return out


def _make_certificate(terms: Sequence[int], v: int, mult: int, norm: Real,
                      constants: ProofConstants, method: str) -> NonPoissonianCertificate:
    return NonPoissonianCertificate(len(terms), v, mult, _torus_distance(norm), norm, constants,
                                    _sample_pairs(terms, v), method)


# ---------------------------------------------------------------------------
# Spectrum scan
# ---------------------------------------------------------------------------


def certificate_search(seq: IntegerSequence | Sequence[int], alpha: AlphaValue, N: int,
                       constants: ProofConstants,
                       spectrum: DifferenceSpectrum | None = None) -> NonPoissonianCertificate | None:
    """The v != 0 with A_N(v) >= tau N and ||v alpha|| <= psi / N of largest
    multiplicity; ties go to smaller ||v alpha||, then smaller |v|."""
    terms = seq.prefix(N) if isinstance(seq, IntegerSequence) else tuple(seq)[:N]
    if len(terms) < N:
        raise ValueError(f"N = {N} exceeds sequence length")
    if spectrum is None:
        spectrum = difference_spectrum(terms)
    elif spectrum.N != N:
        raise ValueError("spectrum computed at a different N")
    need = constants.tau * N
    bound = constants.psi / N
    best: tuple[Real, int, int] | None = None
    current = None
    for v, c in spectrum.by_multiplicity():
        if c < need:
            break
        if current is not None and c != current and best is not None:
            break
        current = c
        norm = exact_norm(v, alpha)
        if norm <= bound and (best is None or (norm, v) < (best[0], best[1])):
            best = (norm, v, c)
    if best is None:
        return None
    norm, v, c = best
    return _make_certificate(terms, v, c, norm, constants, "search")


# ---------------------------------------------------------------------------
# Pigeonhole pipeline
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeavyVector:
    u: tuple[int, ...]
    count: int


def _radix(s: Sequence[int]) -> list[int]:
    w, out = 1, []
    for sj in s:
        out.append(w)
        w *= 2 * sj - 1
    return out


def _decode(delta: int, s: Sequence[int], weights: Sequence[int]) -> tuple[int, ...]:
    """Inverse of u -> sum u_j w_j on the box |u_j| < s_j (balanced radix)."""
    x = delta + sum((sj - 1) * wj for sj, wj in zip(s, weights))
    out = []
    for sj in s:
        x, digit = divmod(x, 2 * sj - 1)
        out.append(digit - (sj - 1))
    return tuple(out)


def _check_rep(rep: GAPRepresentation, constants: ProofConstants, N: int) -> None:
    if not rep.descriptor.is_proper:
        raise PreconditionError("representation lives in an improper GAP")
    if N < 2:
        raise PreconditionError("N must be at least 2")
    if constants.d is not None and constants.d != rep.descriptor.d:
        raise PreconditionError(f"constants are for d = {constants.d}, GAP has d = {rep.descriptor.d}")


def property1_extract(rep: GAPRepresentation, M: int, constants: ProofConstants, N: int) -> list[HeavyVector]:
    """Every difference vector u = r_k - r_l (k = l allowed) realized by at
    least ceil(gamma N) ordered pairs, most frequent first."""
    _check_rep(rep, constants, N)
    if M != len(rep):
        raise PreconditionError(f"M = {M} but representation holds {len(rep)} elements")
    if constants.C is not None and M < constants.C * N:
        raise PreconditionError(f"M = {M} < C N = {constants.C * N}")
    s = rep.descriptor.s
    if constants.K is not None and prod(s) > constants.K * N:
        raise PreconditionError(f"GAP size {prod(s)} exceeds K N = {constants.K * N}")
    t = constants.heavy_threshold(N)
    weights = _radix(s)
    codes = [sum(r * w for r, w in zip(coord, weights)) for coord in rep.coords.values()]
    deltas, counts = count_differences(codes)
    heavy = [HeavyVector((0,) * len(s), M)] if M >= t else []
    for delta, c in zip(deltas, counts):
        if c >= t:
            u = _decode(int(delta), s, weights)
            heavy.append(HeavyVector(u, int(c)))
            heavy.append(HeavyVector(tuple(-x for x in u), int(c)))
    heavy.sort(key=lambda h: (-h.count, h.u))
    if len(heavy) < t:
        raise GuaranteeViolation(f"only {len(heavy)} heavy vectors, pigeonhole promises {t}")
    return heavy


@dataclass(frozen=True)
class Cluster:
    beta: UnitReal
    beta_exact: Real
    width: Fraction
    members: list[tuple[int, ...]]
    in_window: int


def _exact_cmp(x: tuple[Fraction, Real], y: tuple[Fraction, Real]) -> int:
    if x[0] != y[0]:
        return -1 if x[0] < y[0] else 1
    if x[1] == y[1]:
        return 0
    return -1 if x[1] < y[1] else 1


def property2_cluster(u_vectors: Sequence[tuple[int, ...]], descriptor: GAPDescriptor,
                      alpha: AlphaValue, constants: ProofConstants, N: int) -> Cluster:
    """Half-open arc [beta, beta + L/(gamma N)) of the circle containing at
    least L of the points {(u . k) alpha}. A sliding window started at
    each point finds the fullest arc; averaging over beta shows one holds at
    least ceil(gamma N) * width >= L points."""
    t = constants.heavy_threshold(N)
    L = constants._L()
    n = len(u_vectors)
    if n < t:
        raise PreconditionError(f"{n} vectors supplied, need ceil(gamma N) = {t}")
    width = constants.arc_width(N)
    pos = [exact_frac(descriptor.value(u) - descriptor.h, alpha) for u in u_vectors]
    keyed = [(approximate(p, 128), p) for p in pos]
    order = sorted(range(n), key=cmp_to_key(lambda i, j: _exact_cmp(keyed[i], keyed[j])))
    one = 1 << 128
    fixed = [floor(keyed[i][0] * one) for i in order]
    w_fixed = width * one

    def inside(i: int, j: int) -> bool:
        """Is the j-th sorted point (unwrapped past n) within width of the i-th?"""
        wrap = 1 if j >= n else 0
        gap = fixed[j % n] + wrap * one - fixed[i]
        if gap + 2 < w_fixed:
            return True
        if gap - 2 >= w_fixed:
            return False
        return pos[order[j % n]] + wrap - pos[order[i]] < width

    if width >= 1:
        if n < L:
            raise PreconditionError(f"arc covers the circle but only {n} < L = {L} points exist; N too small")
        start, best = 0, n
    else:
        start, best, j = 0, 0, 0
        for i in range(n):
            j = max(j, i + 1)
            while j < i + n and inside(i, j):
                j += 1
            if j - i > best:
                start, best = i, j - i
    if best < L:
        raise GuaranteeViolation(f"fullest arc holds {best} points, pigeonhole promises {L}")
    members = [tuple(u_vectors[order[(start + x) % n]]) for x in range(L)]
    beta = pos[order[start]]
    return Cluster(UnitReal(*fixed_point(beta)), beta, width, members, best)


@dataclass(frozen=True)
class Overlap:
    x: int
    y: int
    common: frozenset


def rank_intersections(families: Sequence[set]) -> list[Overlap]:
    out = []
    for x in range(len(families)):
        for y in range(x + 1, len(families)):
            out.append(Overlap(x, y, frozenset(families[x] & families[y])))
    out.sort(key=lambda o: (-len(o.common), o.x, o.y))
    return out


def intersection_pair(families: Sequence[set], constants: ProofConstants, N: int) -> Overlap:
    """Exhaustive search over pairs x != y for the largest M_x & M_y; the
    union bound guarantees ceil(N / L^2) common vectors."""
    need = constants.overlap_threshold(N)
    if len(families) < 2:
        raise PreconditionError("need at least two families")
    t = constants.heavy_threshold(N)
    if any(len(f) < t for f in families):
        raise PreconditionError(f"every family must hold ceil(gamma N) = {t} vectors")
    best = rank_intersections(families)[0]
    if len(best.common) < need:
        raise GuaranteeViolation(f"largest overlap {len(best.common)} < ceil(N/L^2) = {need}")
    return best


def pipeline_certify(rep: GAPRepresentation, seq: IntegerSequence | Sequence[int], alpha: AlphaValue,
                     N: int, constants: ProofConstants) -> NonPoissonianCertificate:
    if not constants.derived:
        raise PreconditionError("pipeline needs constants derived from (d, C, K)")
    _check_rep(rep, constants, N)
    terms = seq.prefix(N) if isinstance(seq, IntegerSequence) else tuple(seq)[:N]
    if len(terms) < N:
        raise ValueError(f"N = {N} exceeds sequence length")
    present = set(terms)
    if any(b not in present for b in rep.coords):
        raise PreconditionError("representation contains elements outside the first N terms")

    heavy = property1_extract(rep, len(rep), constants, N)
    cluster = property2_cluster([h.u for h in heavy], rep.descriptor, alpha, constants, N)
    vectors = set(rep.coords.values())
    families = []
    for u in cluster.members:
        families.append({r for r in vectors if tuple(a - b for a, b in zip(r, u)) in vectors})
    need = constants.overlap_threshold(N)
    ranking = rank_intersections(families)
    if not ranking or len(ranking[0].common) < need:
        raise GuaranteeViolation("no pair of families overlaps in ceil(N / L^2) vectors")
    k = rep.descriptor.k
    bound = constants.psi / N
    for ov in ranking:
        if len(ov.common) < need:
            break
        z = tuple(a - b for a, b in zip(cluster.members[ov.x], cluster.members[ov.y]))
        v = sum(zj * kj for zj, kj in zip(z, k))
        if v == 0:
            continue
        norm = exact_norm(v, alpha)
        if not norm <= bound:
            raise GuaranteeViolation(f"||{v} alpha|| exceeds psi/N although both ends share an arc")
        mult = multiplicity(terms, v)
        if mult < need:
            raise GuaranteeViolation(f"A_N({v}) = {mult} < {need}")
        return _make_certificate(terms, v, mult, norm, constants, "pipeline")
    cert = certificate_search(terms, alpha, N, constants)
    if cert is None:
        raise GuaranteeViolation("all overlapping pairs degenerate and the spectrum scan found nothing")
    return cert


# ---------------------------------------------------------------------------
# Dichotomy
# ---------------------------------------------------------------------------

SMALL_GAP = "SMALL_GAP"
WINDOW_JUMP = "WINDOW_JUMP"


@dataclass
class CheckpointEvidence:
    N: int
    v: int | None = None
    psi_i: Real | None = None
    branch: str | None = None
    s1: Fraction | None = None
    s2: Fraction | None = None
    r2_s1: Fraction | None = None
    r2_s2: Fraction | None = None
    holds: bool = False
    selected: bool = False


@dataclass
class DichotomyVerdict:
    branch: str | None
    evidence: list[CheckpointEvidence]
    non_poissonian: bool
    common_window: bool = True
    constants: ProofConstants | None = None
    reason: str = ""


def minimal_gap(spectrum: DifferenceSpectrum, alpha: AlphaValue, tau: Fraction) -> tuple[int, Real] | None:
    """(v, ||v alpha||) minimizing the distance over v with A_N(v) >= tau N."""
    need = tau * spectrum.N
    best: tuple[Real, int] | None = None
    for v, c in zip(spectrum.positive, spectrum.pos_counts):
        if c < need:
            continue
        norm = exact_norm(int(v), alpha)
        if best is None or norm < best[0]:
            best = (norm, int(v))
    return None if best is None else (best[1], best[0])


def _cell(psi_i: Real, rho: Fraction, step: Fraction) -> int:
    """Index j with psi_i in (rho + j step, rho + (j+1) step]."""
    j = floor((psi_i - rho) / step)
    if rho + j * step == psi_i:
        j -= 1
    return j


def dichotomy_test(seq: IntegerSequence | Sequence[int], alpha: AlphaValue, checkpoints: Sequence[int],
                   constants: ProofConstants) -> DichotomyVerdict:
    """Window dichotomy at finite scale.

    psi_i = N_i * min ||v alpha|| over v with A_{N_i}(v) >= tau N_i. If
    psi_i <= rho at half the checkpoints or more, the excess shows up as
    R2(rho) >= tau = 3 rho. Otherwise each psi_i sits in a cell
    (s1, s1 + tau/3] of the grid rho + j tau/3 and the window count
    R2(s2) - R2(s1) must reach tau while Poisson statistics would give
    2 (s2 - s1) = 2 tau / 3.
    """
    if not checkpoints:
        raise ValueError("empty checkpoint list")
    cps = list(checkpoints)
    if any(b <= a for a, b in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    terms_all = seq.terms if isinstance(seq, IntegerSequence) else tuple(seq)
    tau, rho = constants.tau, constants.rho
    step = tau / 3
    rows = []
    for N in cps:
        terms = terms_all[:N]
        if len(terms) < N:
            raise ValueError(f"checkpoint {N} exceeds sequence length")
        found = minimal_gap(difference_spectrum(terms), alpha, tau)
        if found is None:
            return DichotomyVerdict(None, rows + [CheckpointEvidence(N)], False, constants=constants,
                                    reason=f"no v with A_N(v) >= tau N at N = {N}")
        v, norm = found
        psi_i = norm * N
        row = CheckpointEvidence(N, v, psi_i, SMALL_GAP if psi_i <= rho else WINDOW_JUMP)
        if row.branch == SMALL_GAP:
            row.s1 = rho
            row.r2_s1 = pair_correlation_curve(terms, alpha, N, [rho]).samples[0][1]
            row.holds = row.r2_s1 >= tau
        else:
            j = _cell(psi_i, rho, step)
            row.s1, row.s2 = rho + j * step, rho + (j + 1) * step
            curve = pair_correlation_curve(terms, alpha, N, [row.s1, row.s2])
            row.r2_s1, row.r2_s2 = curve.samples[0][1], curve.samples[1][1]
            row.holds = row.r2_s2 - row.r2_s1 >= tau
        rows.append(row)

    small = [r for r in rows if r.branch == SMALL_GAP]
    common = True
    if 2 * len(small) >= len(rows):
        branch, selected = SMALL_GAP, small
    else:
        branch = WINDOW_JUMP
        hits: dict[Fraction, list[CheckpointEvidence]] = {}
        for r in rows:
            if r.branch == WINDOW_JUMP:
                hits.setdefault(r.s1, []).append(r)
        s1, group = min(hits.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        if 2 * len(group) >= len(rows):
            selected = group
        else:
            # no single cell collects half the checkpoints at this scale
            common = False
            selected = [r for r in rows if r.branch == WINDOW_JUMP]
    for r in selected:
        r.selected = True
    return DichotomyVerdict(branch, rows, all(r.holds for r in selected), common, constants)
