"""Risk study from a config file: per-n risk table plus the log-log slope.

    python scripts/rate_study.py scripts/configs/smooth_bump.conf --threads 4
"""

import argparse
import math

from unireg.cli import parse_config
from unireg.risklab import run_experiment, scaling_slope


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    with open(args.config) as fh:
        cfg = parse_config(fh.read())
    report = run_experiment(cfg, workers=args.threads)

    print(f"{'n':>6} {'mse':>10} {'se':>9} {'mse/scale':>10} {'mse*n/log n':>12} "
          f"{'coverage':>9} {'oracle':>9}")
    for r in report.rows:
        orc = f"{r.oracle_rhs:9.5f}" if r.oracle_rhs is not None else f"{'-':>9}"
        print(f"{r.n:6d} {r.mse_mean:10.6f} {r.mse_std_err:9.2e} {r.thm1_ratio:10.4f} "
              f"{r.mse_mean * r.n / math.log(r.n):12.4f} {r.coverage_thm2:9.4f} {orc}")
    if len(report.rows) >= 3:
        slope, err = scaling_slope(report)
        print(f"\nlog-log slope {slope:.4f} +- {err:.4f}  (n^(-2/3) would give -0.6667)")


if __name__ == "__main__":
    main()
