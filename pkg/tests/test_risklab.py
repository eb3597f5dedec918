import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from unireg.risklab import (Constant, Custom, ExperimentConfig, Indicator,
                            MonotoneStaircase, NoiseSpec, PiecewiseConstantUnimodal,
                            SmoothBump, generate_signal, oracle_rhs, run_experiment,
                            scaling_slope, segment_errors, thm1_rhs, thm1_scale, thm2_rhs,
                            unimodal_oracle_rhs)
from unireg.rng import stream


def test_signal_pieces():
    sig = generate_signal(PiecewiseConstantUnimodal((3, 6), (0.0, 2.0, 0.0)), 9)
    np.testing.assert_array_equal(sig.theta, [0, 0, 0, 2, 2, 2, 0, 0, 0])
    assert (sig.mode, sig.s1, sig.s2, sig.V) == (4, 2, 2, 2.0)


def test_signal_fractional_breakpoints():
    sig = generate_signal(PiecewiseConstantUnimodal((1 / 3, 2 / 3), (0, 2, 0)), 12)
    np.testing.assert_array_equal(sig.theta, [0] * 4 + [2] * 4 + [0] * 4)


def test_signal_errors():
    with pytest.raises(ValueError, match="do not fit"):
        generate_signal(PiecewiseConstantUnimodal((1, 2, 3), (0, 1, 2, 3)), 3)
    with pytest.raises(ValueError):
        PiecewiseConstantUnimodal((2,), (1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        PiecewiseConstantUnimodal((2, 4), (1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        generate_signal(Custom((1.0, 0.0, 1.0)), 3)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 101])
def test_smooth_bump(n):
    sig = generate_signal(SmoothBump(2.5), n)
    assert sig.theta.min() == 0.0
    assert sig.V == pytest.approx(2.5 if n > 2 else 0.0)
    np.testing.assert_array_equal(sig.theta, sig.theta[::-1])


def test_other_signals():
    np.testing.assert_array_equal(Indicator().values(6), [0, 0, 1, 1, 0, 0])
    np.testing.assert_array_equal(MonotoneStaircase(3, 2.0).values(6), [0, 0, 1, 1, 2, 2])
    assert generate_signal(Constant(4.0), 5).mode == 1


@pytest.mark.parametrize("kind", ["gaussian", "uniform_bounded", "rademacher"])
def test_noise(kind):
    z = NoiseSpec(kind, 2.0).draw(20_000, stream(0, 1))
    assert abs(z.mean()) < 0.05
    if kind != "gaussian":
        assert np.abs(z).max() <= 2.0
    if kind == "rademacher":
        assert set(np.unique(z)) == {-2.0, 2.0}


def test_noise_errors():
    with pytest.raises(ValueError):
        NoiseSpec("cauchy")
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", 0.0)


def test_thm2_example():
    value = 12 * 0.02 * math.log(50 * math.e) + 48 * 3 * 2 * math.log(100) / 100
    assert thm2_rhs(100, 1, 1, 1.0, 1.0) == pytest.approx(value, rel=1e-14)
    assert thm2_rhs(100, 1, 1, 1.0, 1.0) == pytest.approx(14.441776, abs=1e-6)


def test_thm2_degenerate_and_errors():
    n = 50
    assert thm2_rhs(n, 25, 25, 1.0, 1.0) == pytest.approx(12 + 48 * 3 * math.log(n))
    with pytest.raises(ValueError):
        thm2_rhs(10, 6, 6, 1.0, 1.0)
    with pytest.raises(ValueError):
        thm2_rhs(10, 1, 1, 0.0, 1.0)


@given(st.integers(4, 10_000), st.integers(1, 4))
def test_thm2_decreases_with_n(n, s):
    assert thm2_rhs(2 * n, s, 0, 1.0, 1.0) < thm2_rhs(n, s, 0, 1.0, 1.0)


def test_thm1():
    assert thm1_scale(8, 0.0, 1.0) == pytest.approx(0.25)
    assert thm1_rhs(3, 0.0, 1.0, 1.0, 1.0) == pytest.approx(
        3 ** (-2 / 3) + 25 * math.log(3) / 3)
    with pytest.raises(ValueError):
        thm1_rhs(1, 1.0, 1.0, 1.0, 1.0)


def test_oracle_rhs_examples():
    assert oracle_rhs(np.zeros(10), 1.0) == pytest.approx(0.1 * math.log(10 * math.e))
    assert oracle_rhs([0, 0, 1, 1, 2], 0.0) == 0.0
    with pytest.raises(ValueError):
        oracle_rhs([0, 1, 0], 1.0)


def test_oracle_rhs_ramp_by_full_scan():
    x = np.linspace(0, 1, 16)
    errs = segment_errors(x)
    ks = np.arange(1, 17)
    full = np.min(errs / 16 + (ks / 16) * np.log(math.e * 16 / ks))
    assert oracle_rhs(x, 1.0) == pytest.approx(full, rel=1e-12)


def test_unimodal_oracle_rhs_splits_halves():
    theta = np.array([0.0, 1.0, 1.0, 0.0])
    expected = (2 * oracle_rhs([0.0, 1.0], 1.0) + 2 * oracle_rhs([1.0, 0.0], 1.0)) / 4
    assert unimodal_oracle_rhs(theta, 1.0) == pytest.approx(expected)


def test_scaling_slope():
    n = np.array([128, 256, 512, 1024.0])
    slope, err = scaling_slope(n, n ** (-2 / 3))
    assert slope == pytest.approx(-2 / 3, abs=1e-12)
    assert slope == pytest.approx(-2 / 3, abs=1e-12) and err < 1e-12
    assert scaling_slope(n, 3.0 / n)[0] == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        scaling_slope([1, 2], [1, 2])


def small_config(**kw):
    base = dict(n_grid=[16, 32, 64], replications=20, seed=11, signal=SmoothBump(1.0))
    base.update(kw)
    return ExperimentConfig(**base)


def test_noiseless_recovery():
    rep = run_experiment(small_config(noise=NoiseSpec("gaussian", 1e-8), replications=1))
    assert np.all(rep.mse_mean <= 1e-12)


def test_reproducible_and_parallel_safe():
    a = run_experiment(small_config())
    b = run_experiment(small_config(), workers=3, chunk=7)
    for ra, rb in zip(a.rows, b.rows):
        np.testing.assert_array_equal(ra.losses, rb.losses)
        assert ra.mse_mean == rb.mse_mean


def test_replications_do_not_depend_on_grid():
    a = run_experiment(small_config(n_grid=[32]))
    b = run_experiment(small_config())
    np.testing.assert_array_equal(a.rows[0].losses, b.rows[1].losses)


def test_isotonic_risk_below_oracle_value():
    cfg = ExperimentConfig(n_grid=[64, 256], replications=200, seed=5,
                           signal=MonotoneStaircase(4, 2.0), estimator="isotonic")
    for row in run_experiment(cfg).rows:
        assert row.mse_mean <= row.oracle_rhs + 3 * row.mse_std_err


def test_config_validation():
    with pytest.raises(ValueError):
        small_config(n_grid=[32, 16])
    with pytest.raises(ValueError):
        small_config(estimator="spline")
    with pytest.raises(ValueError):
        small_config(replications=0)
