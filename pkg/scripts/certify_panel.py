"""Certificates on quasi-arithmetic sequences across a panel of alphas.

For each (d, C) and alpha, runs the spectrum search and the pigeonhole
pipeline at every checkpoint and prints v, multiplicity and N ||v alpha||.

Usage: python scripts/certify_panel.py [--checkpoints 1000,4000]
"""

import argparse
from fractions import Fraction

from paircorr.certify import ProofConstants, certificate_search, pipeline_certify
from paircorr.exactreal import alpha_parse, approximate
from paircorr.gapgen import QuasiArithmeticSpec, quasi_arithmetic_sequence
from paircorr.stats import difference_spectrum

ALPHAS = ("3/10", "1/7", "355/113", "sqrt:2", "phi")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--checkpoints", default="1000,4000")
    args = ap.parse_args()
    cps = tuple(int(x) for x in args.checkpoints.split(","))
    print("d,C,alpha,N,method,v,multiplicity,N*dist")
    for d, C in [(1, Fraction(1)), (1, Fraction(1, 2)), (2, Fraction(1)), (2, Fraction(1, 2))]:
        constants = ProofConstants.from_params(d, C)
        inst = quasi_arithmetic_sequence(QuasiArithmeticSpec(d, C, 1, cps, seed=d))
        for name in ALPHAS:
            alpha = alpha_parse(name)
            for N in cps:
                spec = difference_spectrum(inst.sequence, N)
                found = [certificate_search(inst.sequence, alpha, N, constants, spec),
                         pipeline_certify(inst.witnesses[N], inst.sequence, alpha, N, constants)]
                for cert in found:
                    if cert is None:
                        print(f"{d},{C},{name},{N},search,none,,")
                        continue
                    scaled = float(approximate(cert.dist_exact, 64)) * N
                    print(f"{d},{C},{name},{N},{cert.method},{cert.v},{cert.multiplicity},{scaled:.4f}")


if __name__ == "__main__":
    main()
