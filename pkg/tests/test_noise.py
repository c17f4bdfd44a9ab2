import math

import numpy as np
import pytest

from ramanphoton.noise import (
    NoiseChannel,
    Trap,
    TrapEnsemble,
    estimate_autocovariance,
    make_rng,
    ou_step_coefficients,
    sample_ou_path,
    sample_ou_paths,
    sample_trap_path,
    sample_trap_paths,
)


def test_step_coefficients_exact():
    a, s = ou_step_coefficients(beta=1.0, dt=0.1)
    assert a == pytest.approx(math.exp(-0.1), rel=1e-15)
    assert s == pytest.approx(math.sqrt(1 - math.exp(-0.2)), rel=1e-15)


def test_path_reproduces_recurrence_and_stationary_start():
    ch = NoiseChannel(sigma=1.5, beta=2.0)
    t = np.linspace(0.0, 1.0, 11)
    path = sample_ou_path(ch, t, seed=7, stream=3)
    z = make_rng(7, 3).standard_normal(11)
    a, srel = ou_step_coefficients(2.0, 0.1)
    x = np.empty(11)
    x[0] = 1.5 * z[0]
    for n in range(1, 11):
        x[n] = a * x[n - 1] + 1.5 * srel * z[n]
    assert np.allclose(path.values, x, rtol=1e-12, atol=1e-14)


def test_identical_seed_identical_path():
    ch = NoiseChannel(sigma=1.0, beta=5.0)
    t = np.linspace(0.0, 2.0, 101)
    p1 = sample_ou_path(ch, t, seed=42, stream=9)
    p2 = sample_ou_path(ch, t, seed=42, stream=9)
    p3 = sample_ou_path(ch, t, seed=42, stream=10)
    assert np.array_equal(p1.values, p2.values)
    assert not np.array_equal(p1.values, p3.values)


def test_zero_sigma_is_silent():
    t = np.linspace(0.0, 1.0, 5)
    path = sample_ou_path(NoiseChannel(sigma=0.0, beta=0.0), t, seed=1)
    assert np.all(path.values == 0.0)


def test_channel_validation():
    with pytest.raises(ValueError):
        NoiseChannel(sigma=-1.0, beta=1.0)
    with pytest.raises(ValueError):
        NoiseChannel(sigma=1.0, beta=0.0)
    with pytest.raises(ValueError):
        NoiseChannel(sigma=1.0, beta=1.0, target="x")
    # zero-sigma channel may leave beta unset
    NoiseChannel(sigma=0.0, beta=0.0)


def test_integrated_covariance_white_noise_limit():
    # 2 sigma^2 / beta is the only combination surviving the fast-noise limit
    base = NoiseChannel(sigma=1.0, beta=10.0).integrated_covariance
    for scale in (10.0, 100.0):
        ch = NoiseChannel(sigma=math.sqrt(scale), beta=10.0 * scale)
        assert ch.integrated_covariance == pytest.approx(base, rel=1e-12)


def test_ou_autocovariance_matches_exponential():
    sigma, beta = 1.0, 2.0
    ch = NoiseChannel(sigma=sigma, beta=beta)
    dt = 1.0 / (8 * beta)
    t = np.arange(256) * dt
    paths = sample_ou_paths(ch, t, n_paths=10_000, master_seed=11)
    lags = [0.0, 1.0 / beta, 3.0 / beta]
    est, se = estimate_autocovariance(paths, dt, lags)
    for lag, e, s in zip(lags, est, se):
        expected = sigma ** 2 * math.exp(-beta * lag)
        assert abs(e - expected) < 3 * s, (lag, e, expected, s)
    assert abs(est[0] - 1.0) < 0.05


def test_trap_occupancy_and_equivalent_channel():
    ens = TrapEnsemble(traps=(Trap(coupling=2.0, rate_01=1.0, rate_10=1.0),))
    assert ens.traps[0].occupancy == pytest.approx(0.5)
    ch = ens.equivalent_channel()
    assert ch.sigma == pytest.approx(1.0, rel=1e-12)
    assert ch.beta == pytest.approx(2.0, rel=1e-12)
    mixed = TrapEnsemble(traps=(Trap(1.0, 1.0, 1.0), Trap(1.0, 2.0, 3.0)))
    with pytest.raises(ValueError):
        mixed.equivalent_channel()


def test_trap_paths_match_equivalent_gaussian_statistics():
    ens = TrapEnsemble(traps=(Trap(coupling=2.0, rate_01=1.0, rate_10=1.0),))
    ch = ens.equivalent_channel()
    dt = 1.0 / (8 * ch.beta)
    t = np.arange(256) * dt
    trap = sample_trap_paths(ens, t, n_paths=10_000, master_seed=5)
    ou = sample_ou_paths(ch, t, n_paths=10_000, master_seed=6)
    lags = [0.0, 1.0 / ch.beta, 3.0 / ch.beta]
    et, st = estimate_autocovariance(trap, dt, lags)
    eo, so = estimate_autocovariance(ou, dt, lags)
    for lag, a, sa, b, sb in zip(lags, et, st, eo, so):
        expected = ch.sigma ** 2 * math.exp(-ch.beta * lag)
        # lag 0 of a +-1 chain is exactly 1 with zero jackknife spread
        assert abs(a - expected) <= 3 * sa + 1e-12
        assert abs(a - b) < 3 * math.hypot(sa, sb)
    # single-path sampler agrees in law: just check range and mean removal
    single = sample_trap_path(ens, t, seed=3)
    assert set(np.round(np.unique(single.values), 12)) <= {-1.0, 1.0}


def test_autocovariance_mean_handling():
    paths = np.full((8, 64), 3.0)
    est, _ = estimate_autocovariance(paths, 0.1, [0.0, 0.5])
    assert np.allclose(est, 9.0)
    est_dm, _ = estimate_autocovariance(paths, 0.1, [0.0, 0.5], demean=True)
    assert np.allclose(est_dm, 0.0)


def test_autocovariance_lag_validation():
    paths = np.zeros((4, 16))
    with pytest.raises(ValueError, match="multiple"):
        estimate_autocovariance(paths, 0.1, [0.05])
    with pytest.raises(ValueError, match="length"):
        estimate_autocovariance(paths, 0.1, [2.0])
