"""Numerical checks of the localized-width identities on small random instances.

Prints the slicing identity gaps, the statistical dimension of the monotone
cone against log(e n) and the exact harmonic number, Lipschitz ratios and
the sub-Gaussian maximum exceedance rate.

    python scripts/geometry_checks.py --seed 1
"""

import argparse
import math

import numpy as np

from unireg.geometry import (lipschitz_check, random_unimodal, slicing_check,
                             statistical_dimension_mc, subgaussian_max_check)
from unireg.rng import stream


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--instances", type=int, default=20)
    args = ap.parse_args()

    print("slicing identity (gap relative to 1 + ||z||^2)")
    for i in range(args.instances):
        rng = stream(args.seed, 0, i)
        n = int(rng.integers(2, 7))
        theta = random_unimodal(n, rng)
        z = rng.standard_normal(n)
        rep = slicing_check(theta + z, theta)
        print(f"  n={n} |theta_hat - theta*|={rep.achieved_radius:.4f} "
              f"signed gap={rep.signed_gap / (1 + z @ z):+.2e} "
              f"termination={'ok' if rep.termination_holds else 'FAILED'}")

    print("\nstatistical dimension of the monotone cone")
    for n in (2, 8, 64, 512):
        est = statistical_dimension_mc(n, 10_000, seed=args.seed)
        harmonic = sum(1.0 / k for k in range(1, n + 1))
        print(f"  n={n:4d} estimate {est.estimate:.4f} +- {est.std_err:.4f}  "
              f"H_n {harmonic:.4f}  log(en) {math.log(math.e * n):.4f}")

    print("\nLipschitz ratio / t")
    theta = random_unimodal(6, stream(args.seed, 1))
    for t in (0.5, 1.0, 2.0):
        print(f"  t={t}: {lipschitz_check(theta, t, pairs=50, seed=args.seed) / t:.4f}")

    sub = subgaussian_max_check(n=100, trials=200, seed=args.seed)
    print(f"\nmax over 100 mode cones: mean {sub.max_mean:.3f}, threshold "
          f"{sub.threshold:.3f}, exceedance {sub.exceed_fraction:.3f}")


if __name__ == "__main__":
    np.set_printoptions(precision=4)
    main()
