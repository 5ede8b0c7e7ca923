"""JSON encodings for exact quantities, certificates and verdicts.

Rationals are written as {"decimal": <12 significant digits>, "exact": "p/q"};
quadratic surds carry "surd": "x + y*sqrt(D)" in place of "exact".
"""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any

from .certify import CheckpointEvidence, DichotomyVerdict, NonPoissonianCertificate, ProofConstants
from .exactreal import Real, Surd, approximate

SIG_DIGITS = 12


def decimal_string(x: Fraction | int) -> str:
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = SIG_DIGITS
        d = Decimal(x.numerator) / Decimal(x.denominator)
    return format(d.normalize(), "f") if abs(d) >= Decimal("1e-6") or d == 0 else format(d.normalize(), "E")


def exact_string(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def real_json(x: Real | None) -> dict[str, str] | None:
    if x is None:
        return None
    if isinstance(x, Surd):
        if x.y == 0:
            return real_json(x.x)
        return {"decimal": decimal_string(approximate(x, 128)), "surd": str(x)}
    return {"decimal": decimal_string(x), "exact": exact_string(x)}


def parse_real_json(obj: dict[str, str]) -> Fraction:
    """Exact value of a rational entry."""
    return Fraction(obj["exact"])


def constants_json(c: ProofConstants) -> dict[str, Any]:
    return {
        "d": c.d,
        "C": real_json(c.C),
        "K": real_json(c.K),
        "gamma": real_json(c.gamma),
        "L": c.L,
        "tau": real_json(c.tau),
        "psi": real_json(c.psi),
        "rho": real_json(c.rho),
    }


def certificate_json(cert: NonPoissonianCertificate) -> dict[str, Any]:
    return {
        "N": cert.N,
        "v": cert.v,
        "multiplicity": cert.multiplicity,
        "dist": real_json(cert.dist_exact),
        "constants": constants_json(cert.constants),
        "sample_pairs": [list(p) for p in cert.pair_list_sample],
        "method": cert.method,
    }


def evidence_json(e: CheckpointEvidence) -> dict[str, Any]:
    return {
        "N": e.N,
        "v": e.v,
        "psi_i": real_json(e.psi_i),
        "branch": e.branch,
        "s1": real_json(e.s1),
        "s2": real_json(e.s2),
        "r2_s1": real_json(e.r2_s1),
        "r2_s2": real_json(e.r2_s2),
        "holds": e.holds,
        "selected": e.selected,
    }


def verdict_json(v: DichotomyVerdict) -> dict[str, Any]:
    return {
        "branch": v.branch,
        "non_poissonian": v.non_poissonian,
        "common_window": v.common_window,
        "reason": v.reason,
        "constants": constants_json(v.constants) if v.constants is not None else None,
        "evidence": [evidence_json(e) for e in v.evidence],
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
