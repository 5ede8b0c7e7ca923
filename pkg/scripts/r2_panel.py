"""R2(s) against the Poissonian value 2s for a few sequence families.

Usage: python scripts/r2_panel.py [--n 2000] [--alpha phi]
"""

import argparse
from fractions import Fraction

from paircorr.exactreal import alpha_parse
from paircorr.gapgen import family
from paircorr.stats import pair_correlation_curve

FAMILIES = ("ap", "poly", "primes", "lacunary", "random")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--alpha", default="phi")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    alpha = alpha_parse(args.alpha)
    grid = [Fraction(1, 4), Fraction(1, 2), Fraction(1), Fraction(2)]
    print("family," + ",".join(f"s={float(s):g}" for s in grid))
    for name in FAMILIES:
        n = min(args.n, 40) if name == "lacunary" else args.n
        kwargs = {"range_": n**3, "seed": args.seed} if name == "random" else {}
        seq = family(name, n, **kwargs)
        curve = pair_correlation_curve(seq, alpha, n, grid)
        print(name + "," + ",".join(f"{float(r):.4f}" for _, r in curve.samples))
    print("poisson," + ",".join(f"{2 * float(s):.4f}" for s in grid))


if __name__ == "__main__":
    main()
