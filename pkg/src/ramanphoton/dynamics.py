"""Simulation drivers: grid planning, batched runs, dense single trajectories.

The stochastic amplitude equations for the driven three-level system are

    de/dt = -i(omega/2) r - i x_e(t) e
    dr/dt = -(i delta + gamma/2 + i x_r(t)) r - i(omega/2) e - i g0 c
    dc/dt = -i g0 r - (i delta_c + kappa/2 + i x_g(t)) c

with the system starting in the upper state (e = 1) and x_* independent
Ornstein-Uhlenbeck level shifts.  The emitted waveguide envelope is
alpha = sqrt(kappa_wg) * c and the emission probability is the time integral
of |alpha|^2.  The two-level variant reuses the same stepper with the drive
and detunings zeroed and the population starting in r.

Grids: a requested step is snapped down so the fine grid splits exactly into
the output bins (see hom.bin_envelope); a co-integrated spectral filter may
extend the grid past the source window to capture its ring-down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from . import _backend
from .hom import bin_nodes, bin_weights
from .model import SystemParams, derive_rates
from .noise import TARGETS, NoiseChannel

RATE_MARGIN = 20          # default step resolves the fastest rate 20-fold
DECAY_SPANS = 10          # default window covers ten slow power e-foldings
DEFAULT_BINS = 512
DEFAULT_CHUNK = 4096
_SLOT = {t: i for i, t in enumerate(TARGETS)}


class IntegrationError(RuntimeError):
    """A trajectory left the physical region; the step is too coarse."""


@dataclass(frozen=True)
class GridPlan:
    dt: float
    t_max: float
    n_bins: int
    m_sys: int
    n_sys: int
    m_fil: int
    n_tot: int
    t_total: float


@dataclass
class Trajectory:
    t: np.ndarray
    e: np.ndarray
    r: np.ndarray
    g: np.ndarray
    alpha: np.ndarray
    efficiency: float
    balance: float | None
    noise: dict[str, np.ndarray] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])


@dataclass
class BatchResult:
    plan: GridPlan
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    eta: np.ndarray
    balance: np.ndarray
    indices: np.ndarray
    f_nodes: np.ndarray | None = None
    f_weights: np.ndarray | None = None
    f_values: np.ndarray | None = None
    f_eta: np.ndarray | None = None
    raw: dict | None = None


def slow_decay_rate(params: SystemParams, two_level: bool = False) -> float:
    """Power decay rate of the slowest emitting mode."""
    if two_level:
        quarter = 0.25 * (params.kappa - params.gamma)
        disc = quarter * quarter - params.g0 ** 2
        rate = 0.5 * (params.gamma + params.kappa)
        if disc > 0.0:
            rate -= 2.0 * math.sqrt(disc)
        return rate
    rates = derive_rates(params)
    if rates.xi:
        return rates.xi
    return rates.gamma_p


def default_t_max(params: SystemParams, two_level: bool = False) -> float:
    rate = slow_decay_rate(params, two_level)
    if rate <= 0.0:
        raise ValueError("system has no decay channel; set t_max explicitly")
    return DECAY_SPANS / rate


def default_dt(params: SystemParams,
               channels: Sequence[NoiseChannel] = (),
               two_level: bool = False) -> float:
    scales = [params.kappa, params.gamma, 2.0 * params.g0]
    if not two_level:
        rates = derive_rates(params)
        scales += [abs(rates.delta_prime), params.omega, abs(params.delta_c)]
    scales += [ch.beta for ch in channels if ch.sigma > 0.0]
    return 1.0 / (RATE_MARGIN * max(scales))


def plan_grid(params: SystemParams,
              channels: Sequence[NoiseChannel] = (),
              filt=None,
              n_bins: int = DEFAULT_BINS,
              two_level: bool = False) -> GridPlan:
    if n_bins < 2:
        raise ValueError("need at least two bins")
    t_max = params.t_max if params.t_max is not None else \
        default_t_max(params, two_level)
    dt_req = params.dt if params.dt is not None else \
        default_dt(params, channels, two_level)
    span = 2 * (n_bins - 1)
    m_sys = max(1, math.ceil(t_max / (span * dt_req)))
    n_sys = span * m_sys
    dt = t_max / n_sys
    if filt is not None:
        m_fil = max(1, math.ceil((t_max + filt.extension) / (span * dt)))
        n_tot = span * m_fil
    else:
        m_fil = 0
        n_tot = n_sys
    return GridPlan(dt=dt, t_max=t_max, n_bins=n_bins, m_sys=m_sys,
                    n_sys=n_sys, m_fil=m_fil, n_tot=n_tot,
                    t_total=n_tot * dt)


def _channel_slots(channels: Sequence[NoiseChannel], two_level: bool):
    sigma = [0.0, 0.0, 0.0]
    beta = [0.0, 0.0, 0.0]
    seen = set()
    for ch in channels:
        if ch.target in seen:
            raise ValueError(f"duplicate noise channel for target {ch.target!r}")
        seen.add(ch.target)
        if two_level and ch.target == "e":
            raise ValueError("the two-level variant has no e level to dephase")
        slot = _SLOT[ch.target]
        sigma[slot] = ch.sigma
        beta[slot] = ch.beta
    return sigma, beta


def run_batch_binned(params: SystemParams,
                     channels: Sequence[NoiseChannel] = (),
                     *,
                     master_seed: int = 0,
                     point_index: int = 0,
                     start_index: int = 0,
                     n_traj: int = 1,
                     filt=None,
                     n_bins: int = DEFAULT_BINS,
                     two_level: bool = False,
                     dense: bool = False,
                     chunk: int = DEFAULT_CHUNK,
                     kernel=None) -> BatchResult:
    """Integrate a batch of trajectories, reduced on the fly to bins.

    Trajectory k of this call gets the reproducible stream id
    (point_index << 32) | (start_index + k); batches with disjoint index
    ranges are statistically independent and their accumulators merge into
    the same result regardless of how the work was split.
    """
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    if point_index < 0 or start_index < 0 or master_seed < 0:
        raise ValueError("seeds and indices must be nonnegative")
    if start_index + n_traj > (1 << 32):
        raise ValueError("trajectory index space exhausted")
    plan = plan_grid(params, channels, filt, n_bins, two_level)
    sigma, beta = _channel_slots(channels, two_level)
    if two_level:
        omega = delta = delta_c = 0.0
        e0, r0 = 0.0 + 0.0j, 1.0 + 0.0j
    else:
        omega, delta, delta_c = params.omega, params.delta, params.delta_c
        e0, r0 = 1.0 + 0.0j, 0.0 + 0.0j
    indices = start_index + np.arange(n_traj, dtype=np.int64)
    streams = (np.uint64(point_index) << np.uint64(32)) | indices.astype(np.uint64)
    impl = kernel if kernel is not None else _backend
    raw = impl.run_batch(
        plan.dt, plan.n_sys, plan.n_tot, omega, delta, delta_c,
        params.gamma, params.kappa, params.g0, params.kappa_wg_eff,
        e0, r0, 0.0 + 0.0j, sigma, beta, plan.n_bins, plan.m_sys,
        plan.m_fil, filt.fpole if filt is not None else 0.0 + 0.0j,
        master_seed, streams, chunk, dense)
    bad = np.flatnonzero(raw["fail_step"] >= 0)
    if bad.size:
        k = int(bad[0])
        step = int(raw["fail_step"][k])
        raise IntegrationError(
            f"amplitude norm left the unit ball at t={step * plan.dt:.6g} "
            f"(step {step}, trajectory index {int(indices[k])}); "
            f"reduce dt below {plan.dt:.3g}")
    out = BatchResult(
        plan=plan,
        nodes=bin_nodes(plan.t_max, plan.n_bins),
        weights=bin_weights(plan.t_max, plan.n_bins),
        values=raw["alpha_bins"] / bin_weights(plan.t_max, plan.n_bins),
        eta=raw["eta"],
        balance=raw["balance"],
        indices=indices,
        raw=raw if dense else None,
    )
    if plan.m_fil > 0:
        out.f_nodes = bin_nodes(plan.t_total, plan.n_bins)
        out.f_weights = bin_weights(plan.t_total, plan.n_bins)
        out.f_values = raw["alphaf_bins"] / out.f_weights
        out.f_eta = raw["eta_f"]
    return out


def _single(params, channels, master_seed, point_index, traj_index,
            n_bins, two_level, kernel, kind) -> Trajectory:
    res = run_batch_binned(
        params, channels, master_seed=master_seed, point_index=point_index,
        start_index=traj_index, n_traj=1, n_bins=n_bins,
        two_level=two_level, dense=True, kernel=kernel)
    raw = res.raw
    plan = res.plan
    t = np.arange(plan.n_sys + 1) * plan.dt
    noise = {}
    for ch in channels:
        key = "noise_" + ch.target
        if key in raw:
            noise[ch.target] = raw[key][0]
    return Trajectory(
        t=t, e=raw["e"][0], r=raw["r"][0], g=raw["g"][0],
        alpha=raw["alpha"][0],
        efficiency=float(res.eta[0]),
        balance=float(res.balance[0]),
        noise=noise,
        meta={"kind": kind, "master_seed": master_seed,
              "point_index": point_index, "traj_index": traj_index,
              "backend": (kernel or _backend).backend_name(),
              "plan": plan,
              "binned_nodes": res.nodes, "binned_weights": res.weights,
              "binned_values": res.values[0]},
    )


def simulate_deterministic(params: SystemParams, n_bins: int = DEFAULT_BINS,
                           kernel=None) -> Trajectory:
    """Noise-free run; the repeatable single-emitter reference."""
    return _single(params, (), 0, 0, 0, n_bins, False, kernel,
                   "deterministic")


def simulate_stochastic(params: SystemParams,
                        channels: Sequence[NoiseChannel],
                        master_seed: int = 0,
                        point_index: int = 0,
                        traj_index: int = 0,
                        n_bins: int = DEFAULT_BINS,
                        kernel=None) -> Trajectory:
    return _single(params, tuple(channels), master_seed, point_index,
                   traj_index, n_bins, False, kernel, "stochastic")


def simulate_two_level(params: SystemParams,
                       channels: Sequence[NoiseChannel] = (),
                       master_seed: int = 0,
                       point_index: int = 0,
                       traj_index: int = 0,
                       n_bins: int = DEFAULT_BINS,
                       kernel=None) -> Trajectory:
    """Purcell-decay reference: population starts in r, no drive."""
    return _single(params, tuple(channels), master_seed, point_index,
                   traj_index, n_bins, True, kernel, "two_level")


def adiabatic_solution(params: SystemParams,
                       n_bins: int = DEFAULT_BINS) -> Trajectory:
    """Closed-form slow-drive limit on the default grid.

    e follows exp(i omega^2 t / (4 dp)) with dp = delta - i gamma_p/2; r and
    the cavity amplitude track e quasi-statically.
    """
    rates = derive_rates(params)
    if params.delta == 0.0:
        raise ValueError("adiabatic form needs a nonzero detuning")
    plan = plan_grid(params)
    t = np.arange(plan.n_sys + 1) * plan.dt
    dp = rates.delta_prime
    e = np.exp(1j * params.omega ** 2 / (4.0 * dp) * t)
    r = -(params.omega / (2.0 * dp)) * e
    g = -1j * params.g0 * r / (1j * params.delta_c + 0.5 * params.kappa)
    alpha = math.sqrt(params.kappa_wg_eff) * g
    eta = float(np.trapezoid(np.abs(alpha) ** 2, t))
    return Trajectory(t=t, e=e, r=r, g=g, alpha=alpha, efficiency=eta,
                      balance=None, meta={"kind": "adiabatic", "plan": plan})


def drift_matrix(params: SystemParams, two_level: bool = False) -> np.ndarray:
    """Deterministic generator of d/dt (e, r, c)."""
    if two_level:
        omega = delta = delta_c = 0.0
    else:
        omega, delta, delta_c = params.omega, params.delta, params.delta_c
    cw = -0.5j * omega
    return np.array([
        [0.0, cw, 0.0],
        [cw, -(1j * delta + 0.5 * params.gamma), -1j * params.g0],
        [0.0, -1j * params.g0, -(1j * delta_c + 0.5 * params.kappa)],
    ])


def propagated_state(params: SystemParams, t: float,
                     two_level: bool = False) -> np.ndarray:
    """Matrix-exponential oracle for the noise-free amplitudes at time t."""
    y0 = np.array([0.0, 1.0, 0.0]) if two_level else np.array([1.0, 0.0, 0.0])
    return scipy.linalg.expm(drift_matrix(params, two_level) * t) @ y0
