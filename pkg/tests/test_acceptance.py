"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` or
``python tests/test_acceptance.py``.
"""

import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from unireg import oracle
from unireg.geometry import (concavity_check, distance, ModeCone, lipschitz_check,
                             random_unimodal, slicing_check, statistical_dimension_mc,
                             subgaussian_max_check)
from unireg.isotonic import Direction, pava
from unireg.risklab import (ExperimentConfig, NoiseSpec, PiecewiseConstantUnimodal,
                            SmoothBump, run_experiment, scaling_slope)
from unireg.rng import stream
from unireg.unimodal import unimodal_lse

SEED = 20240611
WORKERS = os.cpu_count() or 1
FOUR_PIECES = PiecewiseConstantUnimodal((1 / 3, 2 / 3), (0.0, 2.0, 0.0))


@pytest.fixture
def report(capsys):
    start = time.perf_counter()

    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'} "
                  f"({time.perf_counter() - start:.1f}s) {detail}")
        return ok

    return emit


def test_criterion_1_oracle_equivalence(report):
    worst_mono, worst_uni, mode_mismatch = 0.0, 0.0, 0
    for n in range(2, 13):
        for i in range(1000):
            rng = stream(SEED, 1, n, i)
            # half the draws are integer-valued so ties and equal levels are common
            y = rng.standard_normal(n) if i % 2 else rng.integers(-3, 4, n).astype(float)
            direction = Direction.NONDECREASING if i % 4 < 2 else Direction.NONINCREASING
            diff = np.abs(pava(y, direction).fitted
                          - oracle.brute_monotone_projection(y, direction))
            worst_mono = max(worst_mono, float(diff.max()))
    for n in range(2, 11):
        for i in range(500):
            rng = stream(SEED, 2, n, i)
            y = rng.standard_normal(n) if i % 2 else rng.integers(-3, 4, n).astype(float)
            fit = unimodal_lse(y, per_mode=False)
            fitted, mode, _ = oracle.brute_unimodal_projection(y)
            worst_uni = max(worst_uni, float(np.abs(fit.fitted - fitted).max()))
            mode_mismatch += fit.mode != mode
    ok = worst_mono <= 1e-9 and worst_uni <= 1e-9 and mode_mismatch == 0
    assert report(1, ok, f"max |pava - brute| = {worst_mono:.2e}, "
                         f"max |unimodal - brute| = {worst_uni:.2e}, "
                         f"mode mismatches = {mode_mismatch}")


def test_criterion_2_kkt(report):
    worst_ortho, worst_gen, worst_mean = 0.0, 0.0, 0.0
    for i in range(10_000):
        rng = stream(SEED, 3, i)
        n = int(rng.integers(1, 65))
        y = rng.standard_normal(n) * 10.0 ** rng.uniform(-3, 3)
        f = pava(y).fitted
        r = y - f
        norm2 = float(y @ y)
        tails = np.cumsum(r[::-1])[::-1]  # <r, e_{>=k}>, k = 1..n
        worst_ortho = max(worst_ortho, abs(r @ f) / norm2)
        worst_gen = max(worst_gen, max(abs(tails[0]), tails[1:].max(initial=0.0))
                        / math.sqrt(norm2))
        worst_mean = max(worst_mean, abs(f.sum() - y.sum()))
    ok = worst_ortho <= 1e-9 and worst_gen <= 1e-9 and worst_mean <= 1e-9
    assert report(2, ok, f"orthogonality {worst_ortho:.2e}, generators {worst_gen:.2e}, "
                         f"mean shift {worst_mean:.2e} (limits 1e-9)")


def test_criterion_3_slicing_identity(report):
    failures, worst = 0, -math.inf
    for i in range(50):
        rng = stream(SEED, 4, i)
        n = int(rng.integers(1, 7))
        theta = random_unimodal(n, rng)
        z = rng.standard_normal(n)
        rep = slicing_check(theta + z, theta, grid_points=200)
        tol = 1e-3 * (1 + z @ z)
        worst = max(worst, rep.identity_gap / tol)
        failures += not (rep.identity_gap <= tol and rep.termination_holds)
    assert report(3, failures == 0, f"{failures}/50 failures, "
                                    f"worst gap / tolerance = {worst:.2e}")


def test_criterion_4_worst_case_rate(report):
    cfg = ExperimentConfig(n_grid=[2 ** k for k in range(7, 14)], replications=200,
                           seed=SEED, signal=SmoothBump(1.0), oracle=False)
    rep = run_experiment(cfg, workers=WORKERS)
    slope, err = scaling_slope(rep)
    ratio = np.array([r.thm1_ratio for r in rep.rows])
    spread = ratio.max() / ratio.min()
    ok = -0.80 <= slope <= -0.55 and spread <= 3
    assert report(4, ok, f"slope {slope:.3f} +- {err:.3f} (want [-0.80, -0.55]); "
                         f"scaled-risk max/min {spread:.2f} (want <= 3)")


def coverage_and_scaling(kind):
    cov = run_experiment(ExperimentConfig(n_grid=[512], replications=400, seed=SEED,
                                          signal=FOUR_PIECES, noise=NoiseSpec(kind, 1.0),
                                          oracle=False), workers=WORKERS).rows[0]
    assert cov.s1 + cov.s2 == 4
    p = 1 - 4 / 512
    se = math.sqrt(p * (1 - p) / 400)
    threshold = p - 3 * se
    scan = run_experiment(ExperimentConfig(n_grid=[2 ** k for k in range(8, 13)],
                                           replications=400, seed=SEED, signal=FOUR_PIECES,
                                           noise=NoiseSpec(kind, 1.0), oracle=False),
                          workers=WORKERS)
    scaled = np.array([r.mse_mean * r.n / math.log(r.n) for r in scan.rows])
    spread = scaled.max() / scaled.min()
    ok = cov.coverage_thm2 >= threshold and spread <= 3
    detail = (f"{kind}: coverage {cov.coverage_thm2:.4f} (want >= {threshold:.4f}); "
              f"mse n/log n max/min {spread:.2f} (want <= 3)")
    return ok, detail


def test_criterion_5_adaptive_coverage(report):
    ok, detail = coverage_and_scaling("gaussian")
    assert report(5, ok, detail)


def test_criterion_6_bounded_noise(report):
    results = [coverage_and_scaling(kind) for kind in ("uniform_bounded", "rademacher")]
    ok = all(r[0] for r in results)
    assert report(6, ok, "; ".join(r[1] for r in results))


def test_criterion_7_statistical_dimension(report):
    two = statistical_dimension_mc(2, 20_000, seed=SEED, pointwise=100)
    lines = [f"n=2: {two.estimate:.4f} +- {two.std_err:.4f} vs 1.5"]
    ok = abs(two.estimate - 1.5) <= 3 * two.std_err and two.pointwise_max_error <= 1e-6
    for n, reps in ((8, 20_000), (64, 10_000), (512, 4_000)):
        est = statistical_dimension_mc(n, reps, seed=SEED, pointwise=100 if n == 64 else 0)
        ok &= est.estimate <= est.bound + 3 * est.std_err
        if n == 64:
            ok &= est.pointwise_max_error <= 1e-6
        lines.append(f"n={n}: {est.estimate:.4f} +- {est.std_err:.4f} <= {est.bound:.4f}")
    lines.append(f"pointwise identity error {two.pointwise_max_error:.1e}")
    assert report(7, ok, "; ".join(lines))


def test_criterion_8_property_suite(report):
    lip_worst = 0.0
    for j, t in enumerate((0.5, 1.0, 2.0, 4.0)):
        theta = random_unimodal(6, stream(SEED, 5, j))
        ratio = lipschitz_check(theta, t, pairs=50, seed=SEED + j)
        lip_worst = max(lip_worst, ratio / t)
    conc_worst = 0.0
    for i in range(20):
        rng = stream(SEED, 6, i)
        n = int(rng.integers(2, 9))
        theta = random_unimodal(n, rng)
        z = rng.standard_normal(n)
        m = int(rng.integers(1, n + 1))
        d = distance(theta, ModeCone(m))
        grid = d + np.linspace(0.0, 3.0, 25)
        conc_worst = max(conc_worst,
                         concavity_check(z, theta, m, grid) / (1 + np.linalg.norm(z)))
    sub = subgaussian_max_check(n=100, trials=400, seed=SEED)
    ok = lip_worst <= 1 + 1e-6 and conc_worst <= 1e-6 and sub.exceed_fraction <= 0.05
    assert report(8, ok, f"Lipschitz ratio / t {lip_worst:.4f} (200 pairs); "
                         f"concavity shortfall {conc_worst:.1e} (20 curves); "
                         f"sub-Gaussian max exceedance {sub.exceed_fraction:.4f}")


def test_criterion_9_determinism(report, tmp_path):
    config = tmp_path / "study.conf"
    config.write_text("n_grid = 64, 128, 256\nreps = 60\nseed = 5\n"
                      "signal.kind = piecewise_constant_unimodal\n"
                      "signal.breakpoints = 0.25, 0.5\nsignal.levels = 0, 1, 0.5\n")
    outputs = []
    for name, threads in (("a", 1), ("b", 1), ("c", 8)):
        out = tmp_path / f"{name}.csv"
        subprocess.run([sys.executable, "-m", "unireg.cli", "simulate", str(config),
                        "--out", str(out), "--threads", str(threads)], check=True)
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    assert report(9, ok, "repeat run and --threads 8 run byte-identical" if ok
                  else "CSV outputs differ")


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-v", "-s"]))
