"""Level-shift noise processes: exponentially correlated Gaussian paths and
two-state trap ensembles, plus the autocovariance estimator used to validate
them.

Both processes are stationary and zero-mean with autocovariance
``sigma^2 * exp(-beta * |tau|)``.  All sampling is driven by numpy's
counter-based Philox generator keyed by ``(master_seed, stream)`` so a path
is a pure function of its seed, independent of platform and batching.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "NoiseChannel",
    "Trap",
    "TrapEnsemble",
    "NoisePath",
    "make_rng",
    "sample_ou_path",
    "sample_ou_paths",
    "sample_trap_path",
    "sample_trap_paths",
    "estimate_autocovariance",
    "TARGETS",
]

TARGETS = ("r", "e", "g")  # amplitude the shift acts on; slot order is fixed

RNG_NAME = "philox4x64+ziggurat/numpy"


@dataclass(frozen=True)
class NoiseChannel:
    sigma: float          # RMS frequency shift
    beta: float           # inverse correlation time
    target: str = "r"     # which amplitude picks up the shift

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.sigma > 0 and self.beta <= 0:
            raise ValueError("beta must be positive for a non-trivial channel")
        if self.target not in TARGETS:
            raise ValueError(f"target must be one of {TARGETS}")

    def autocovariance(self, tau):
        return self.sigma ** 2 * np.exp(-self.beta * np.abs(tau))

    @property
    def integrated_covariance(self) -> float:
        """Area under the autocovariance; the white-noise dephasing rate."""
        if self.sigma == 0:
            return 0.0
        return 2.0 * self.sigma ** 2 / self.beta


@dataclass(frozen=True)
class Trap:
    coupling: float   # shift contributed while the trap is occupied
    rate_01: float    # empty -> occupied rate
    rate_10: float    # occupied -> empty rate

    def __post_init__(self):
        if self.rate_01 <= 0 or self.rate_10 <= 0:
            raise ValueError("trap rates must be positive")

    @property
    def occupancy(self) -> float:
        return self.rate_01 / (self.rate_01 + self.rate_10)

    @property
    def switching_rate(self) -> float:
        return self.rate_01 + self.rate_10


@dataclass(frozen=True)
class TrapEnsemble:
    traps: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "traps", tuple(self.traps))
        if not self.traps:
            raise ValueError("ensemble needs at least one trap")

    @property
    def mean_shift(self) -> float:
        return sum(t.coupling * t.occupancy for t in self.traps)

    @property
    def variance(self) -> float:
        return sum(t.coupling ** 2 * t.occupancy * (1 - t.occupancy)
                   for t in self.traps)

    def equivalent_channel(self, target: str = "r") -> NoiseChannel:
        """Single-exponential (sigma, beta) equivalent; requires one common
        switching rate across traps."""
        rates = {t.switching_rate for t in self.traps}
        if max(rates) - min(rates) > 1e-12 * max(rates):
            raise ValueError("traps with distinct switching rates have no "
                             "single-exponential equivalent")
        return NoiseChannel(sigma=math.sqrt(self.variance),
                            beta=next(iter(rates)), target=target)


@dataclass(frozen=True)
class NoisePath:
    t: np.ndarray
    values: np.ndarray
    meta: dict

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


def make_rng(master_seed: int, stream: int = 0, substream: int = 0):
    """Generator keyed by (master_seed, stream); substreams jump the counter."""
    if master_seed < 0 or stream < 0:
        raise ValueError("seeds and streams must be non-negative")
    bg = np.random.Philox(key=np.array([master_seed, stream], dtype=np.uint64))
    if substream:
        bg = bg.jumped(substream)
    return np.random.Generator(bg)


def _check_grid(t):
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("grid must be a 1-d array with at least two samples")
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0) or dt[0] <= 0:
        raise ValueError("grid must be uniform and increasing")
    return t, float(dt[0])


def _ou_from_normals(z, a, s, sigma):
    """x[0] = sigma*z[0]; x[n] = a*x[n-1] + s*z[n].  Vectorized over rows."""
    z = np.atleast_2d(z)
    x = np.empty_like(z)
    x[:, 0] = sigma * z[:, 0]
    if z.shape[1] > 1:
        zi = (a * x[:, 0])[:, None]
        x[:, 1:] = lfilter([s], [1.0, -a], z[:, 1:], axis=1, zi=zi)[0]
    return x


def ou_step_coefficients(beta: float, dt: float) -> tuple:
    """Exact one-step coefficients (a, s): x' = a*x + s*z with stationary
    marginals preserved."""
    a = math.exp(-beta * dt)
    return a, math.sqrt(max(0.0, 1.0 - a * a))


def sample_ou_path(channel: NoiseChannel, grid, seed, stream: int = 0,
                   rng=None) -> NoisePath:
    """One exponentially correlated Gaussian path on a uniform grid.

    The recurrence is exact for any step: with ``a = exp(-beta*dt)``,
    ``x[n+1] = a*x[n] + sigma*sqrt(1-a^2)*z[n+1]``, started from the
    stationary law ``x[0] = sigma*z[0]``.  A zero-sigma channel returns zeros
    and consumes no randomness.
    """
    t, dt = _check_grid(grid)
    meta = {"kind": "ou", "sigma": channel.sigma, "beta": channel.beta,
            "seed": seed, "stream": stream, "rng": RNG_NAME}
    if channel.sigma == 0.0:
        return NoisePath(t, np.zeros_like(t), meta)
    if rng is None:
        rng = make_rng(seed, stream)
    a, srel = ou_step_coefficients(channel.beta, dt)
    z = rng.standard_normal(t.size)
    x = _ou_from_normals(z, a, channel.sigma * srel, channel.sigma)[0]
    return NoisePath(t, x, meta)


def sample_ou_paths(channel: NoiseChannel, grid, n_paths: int,
                    master_seed: int) -> np.ndarray:
    """(n_paths, n_samples) batch from a single generator; for statistics."""
    t, dt = _check_grid(grid)
    if channel.sigma == 0.0:
        return np.zeros((n_paths, t.size))
    rng = make_rng(master_seed)
    a, srel = ou_step_coefficients(channel.beta, dt)
    z = rng.standard_normal((n_paths, t.size))
    return _ou_from_normals(z, a, channel.sigma * srel, channel.sigma)


def _trap_step_matrix(ens: TrapEnsemble, dt: float):
    # exact per-step transition probabilities of each two-state chain
    p1 = np.array([t.occupancy for t in ens.traps])
    decay = np.array([math.exp(-t.switching_rate * dt) for t in ens.traps])
    p_up = p1 * (1.0 - decay)          # P(next=1 | now=0)
    p_down = (1.0 - p1) * (1.0 - decay)  # P(next=0 | now=1)
    c = np.array([t.coupling for t in ens.traps])
    return p1, p_up, p_down, c


def sample_trap_paths(ens: TrapEnsemble, grid, n_paths: int,
                      master_seed: int) -> np.ndarray:
    """(n_paths, n_samples) of the mean-removed trap shift, exact chain."""
    t, dt = _check_grid(grid)
    p1, p_up, p_down, c = _trap_step_matrix(ens, dt)
    rng = make_rng(master_seed)
    occ = rng.random((n_paths, len(ens.traps))) < p1
    out = np.empty((n_paths, t.size))
    out[:, 0] = occ @ c
    for n in range(1, t.size):
        u = rng.random(occ.shape)
        occ = np.where(occ, u >= p_down, u < p_up)
        out[:, n] = occ @ c
    return out - ens.mean_shift


def sample_trap_path(ens: TrapEnsemble, grid, seed, stream: int = 0) -> NoisePath:
    t, _ = _check_grid(grid)
    rng = make_rng(seed, stream)
    # same chain as the batch sampler, one row
    values = _trap_single(ens, t, rng)
    meta = {"kind": "trap", "n_traps": len(ens.traps), "seed": seed,
            "stream": stream, "rng": RNG_NAME}
    return NoisePath(t, values, meta)


def _trap_single(ens, t, rng):
    dt = float(t[1] - t[0])
    p1, p_up, p_down, c = _trap_step_matrix(ens, dt)
    occ = rng.random(len(ens.traps)) < p1
    values = np.empty(t.size)
    values[0] = occ @ c
    for n in range(1, t.size):
        u = rng.random(occ.shape)
        occ = np.where(occ, u >= p_down, u < p_up)
        values[n] = occ @ c
    return values - ens.mean_shift


def estimate_autocovariance(paths, dt: float, lags, demean: bool = False):
    """Ensemble autocovariance at the requested time lags.

    Parameters
    ----------
    paths : (n_paths, n_samples) array
    dt : grid spacing of the paths
    lags : time lags; each must sit on the grid within 1e-6 relative
    demean : subtract the per-ensemble mean first

    Returns
    -------
    (estimates, standard_errors) : arrays, one entry per lag; errors are
    delete-one jackknife over paths.
    """
    x = np.asarray(paths, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("need a (n_paths, n_samples) batch with >= 2 paths")
    if demean:
        x = x - x.mean()
    est = np.empty(len(lags))
    se = np.empty(len(lags))
    n_paths = x.shape[0]
    for i, lag in enumerate(lags):
        k = int(round(lag / dt))
        if abs(k * dt - lag) > 1e-6 * max(dt, abs(lag)):
            raise ValueError(f"lag {lag} is not a multiple of dt={dt}")
        if k >= x.shape[1]:
            raise ValueError(f"lag {lag} exceeds the path length")
        prod = x[:, : x.shape[1] - k] * x[:, k:] if k else x * x
        per_path = prod.mean(axis=1)
        m = per_path.mean()
        # delete-one jackknife of the ensemble mean
        loo = (per_path.sum() - per_path) / (n_paths - 1)
        est[i] = m
        se[i] = math.sqrt((n_paths - 1) / n_paths * ((loo - loo.mean()) ** 2).sum())
    return est, se
