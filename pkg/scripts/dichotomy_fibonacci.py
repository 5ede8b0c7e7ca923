"""Window dichotomy for a_n = n and alpha = phi.

Compares geometric checkpoints with Fibonacci checkpoints, where N ||F alpha||
settles and the psi_i share one window cell.

Usage: python scripts/dichotomy_fibonacci.py
"""

import argparse

from paircorr.certify import ProofConstants, dichotomy_test
from paircorr.exactreal import alpha_parse, approximate
from paircorr.gapgen import family


def report(label, seq, alpha, cps, constants) -> None:
    verdict = dichotomy_test(seq, alpha, cps, constants)
    print(f"{label}: branch={verdict.branch} non_poissonian={verdict.non_poissonian} "
          f"common_window={verdict.common_window}")
    for e in verdict.evidence:
        s1 = float(approximate(e.s1, 64)) if e.s1 is not None else float("nan")
        print(f"  N={e.N} v={e.v} psi_i={float(approximate(e.psi_i, 64)):.4f} s1={s1:.4f} holds={e.holds}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", default="phi")
    args = ap.parse_args()
    alpha = alpha_parse(args.alpha)
    constants = ProofConstants.from_params(1, 1)
    seq = family("ap", 12000)
    report("geometric", seq, alpha, (1000, 4000, 10000), constants)
    report("fibonacci", seq, alpha, (987, 1597, 2584, 4181, 6765, 10946), constants)


if __name__ == "__main__":
    main()
