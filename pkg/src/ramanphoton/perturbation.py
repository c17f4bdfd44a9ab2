"""Linearized small-noise theory of the emitted photon's phase.

A fluctuating level shift delta_r(t) perturbs the amplitudes as
x_i -> x_i exp(-i phi_i).  To first order the phase errors obey
d phi/dt - delta = M phi with a constant matrix M built from the
quasi-steady amplitude ratios, which yields closed-form phase paths in the
fast-cavity limit and, in the frequency domain, an exact transfer function
H(omega, eta) = |([M + (i omega - eta/2) I]^-1)_32|^2 that multiplies the
exponentially weighted noise spectrum S_r(omega, eta).  The
indistinguishability follows either from ensemble averages of the phase
paths (time domain, second order) or from a single spectral integral.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.integrate
import scipy.signal

from .model import SystemParams, derive_rates
from .noise import NoiseChannel, NoisePath


@dataclass(frozen=True)
class PhasePath:
    """Linearized phase errors along one noise record (or a stack of them).

    All arrays share the trailing time axis; ``phi_g`` is what multiplies
    the emitted envelope as exp(-i phi_g).  In the fast-cavity solution the
    output phase equals the r-level phase, so phi_g is phi_r.
    """
    grid: np.ndarray
    delta_bar: np.ndarray
    phi_e: np.ndarray
    phi_r: np.ndarray
    phi_g: np.ndarray

    @property
    def n_paths(self) -> int:
        return int(np.prod(self.phi_g.shape[:-1], dtype=np.int64))


def _filtered_noise(pole: complex, t: np.ndarray,
                    values: np.ndarray) -> np.ndarray:
    """delta_bar: the level shift low-passed by the fast pole.

    Exact one-step update for piecewise-linear input: with E = exp(-p dt),
    delta_bar[n+1] = E delta_bar[n] + J1 x[n+1] + (J0 - J1) x[n], where
    J0, J1 are the exact step integrals of the exponential kernel against
    the linear interpolant.  delta_bar(0) = 0.
    """
    dt = float(t[1] - t[0])
    p = pole
    decay = np.exp(-p * dt)
    j0 = 1.0 - decay
    j1 = 1.0 - j0 / (p * dt)
    b = np.array([j1, j0 - j1])
    a = np.array([1.0, -decay])
    x = np.asarray(values, dtype=complex)
    # initial condition cancels the b[0] x[0] tap so the path starts at zero
    zi = np.broadcast_to((-j1 * x[..., :1]), x[..., :1].shape)
    y, _ = scipy.signal.lfilter(b, a, x, axis=-1, zi=zi)
    return y


def linearized_phase_path(params: SystemParams, noise) -> PhasePath:
    """Closed-form fast-cavity phase errors for one or many noise records.

    ``noise`` is a NoisePath, or a (grid, values) pair where values may
    carry leading batch axes over the shared time grid.
    """
    if isinstance(noise, NoisePath):
        t, values = noise.t, noise.values
    else:
        t, values = noise
    t = np.asarray(t, dtype=float)
    values = np.asarray(values)
    if t.ndim != 1 or t.size < 2 or values.shape[-1] != t.size:
        raise ValueError("need a 1-d grid and values ending in its axis")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("time grid must be uniform")
    if params.delta == 0.0:
        raise ValueError("the fast-cavity phase solution needs a nonzero "
                         "detuning")
    rates = derive_rates(params)
    if params.kappa < 4.0 * max(params.g0, abs(params.delta)):
        warnings.warn("fast-cavity phase paths assume kappa well above g0 "
                      "and the detuning; results are approximate here",
                      stacklevel=2)
    pole = 1j * rates.delta_prime
    dbar = _filtered_noise(pole, t, values)
    rate = params.omega ** 2 / (4.0 * rates.delta_prime ** 2)
    phi_e = rate * scipy.integrate.cumulative_trapezoid(
        dbar, t, axis=-1, initial=0.0)
    phi_r = phi_e + dbar / pole
    return PhasePath(grid=t, delta_bar=dbar, phi_e=phi_e, phi_r=phi_r,
                     phi_g=phi_r)


def _stack_paths(paths) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(paths, PhasePath):
        paths = [paths]
    grids = [p.grid for p in paths]
    for g in grids[1:]:
        if not np.array_equal(g, grids[0]):
            raise ValueError("phase paths use different time grids")
    phis = np.concatenate([np.atleast_2d(p.phi_g) for p in paths], axis=0)
    return grids[0], phis


def indist_smallphi(paths, xi: float) -> float:
    """Second-order indistinguishability from an ensemble of phase paths.

    F = 1 + 2 xi^2 <|integral e^{-xi t} phi|^2>
          - 2 xi <integral e^{-xi t} |phi|^2>,
    trapezoid quadrature over the paths' grid.  Assumes a zero-mean phase
    ensemble; many paths are needed for converged averages.
    """
    if not xi > 0.0:
        raise ValueError("xi must be positive")
    t, phis = _stack_paths(paths)
    w = np.full(t.size, t[1] - t[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    wexp = w * np.exp(-xi * t)
    overlap = phis @ wexp
    power = (phis.real ** 2 + phis.imag ** 2) @ wexp
    term_cross = 2.0 * xi ** 2 * float(np.mean(np.abs(overlap) ** 2))
    term_auto = -2.0 * xi * float(np.mean(power))
    return 1.0 + term_cross + term_auto


def quasi_steady_ratios(params: SystemParams) -> tuple[complex, complex]:
    """(r/e, g/r) with the excited amplitude treated as frozen.

    Exact for finite kappa; collapses to the fast-cavity ratios
    -Omega/(2 delta') and -2i g0/kappa when kappa dominates.
    """
    if params.omega == 0.0:
        raise ValueError("linearization needs a driven system (omega != 0)")
    cav = 1j * params.delta_c + 0.5 * params.kappa
    g_over_r = -1j * params.g0 / cav
    denom = 1j * params.delta + 0.5 * params.gamma + params.g0 ** 2 / cav
    r_over_e = -0.5j * params.omega / denom
    return r_over_e, g_over_r


def transfer_matrix(params: SystemParams) -> np.ndarray:
    """Constant linearization matrix for the phase errors."""
    roe, gor = quasi_steady_ratios(params)
    hw = 0.5j * params.omega
    cg = 1j * params.g0
    return np.array([
        [hw * roe, -hw * roe, 0.0],
        [-hw / roe, hw / roe + cg * gor, -cg * gor],
        [0.0, -cg / gor, cg / gor],
    ])


def transfer_H(params: SystemParams, omega, eta: float,
               method: str = "matrix"):
    """Noise-to-photon power transfer at frequency omega, weight eta.

    ``method="matrix"`` inverts the full 3x3 linearization;
    ``method="poles"`` uses the named three-pole approximation valid for
    xi << gamma_p << |delta|.
    """
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    if method == "poles":
        out = _transfer_three_poles(params, omega_arr, eta)
    elif method == "matrix":
        m = transfer_matrix(params)
        a = np.broadcast_to(m, (omega_arr.size, 3, 3)).copy()
        shift = 1j * omega_arr - 0.5 * eta
        a[:, 0, 0] += shift
        a[:, 1, 1] += shift
        a[:, 2, 2] += shift
        rhs = np.zeros((omega_arr.size, 3), dtype=complex)
        rhs[:, 1] = 1.0
        try:
            sol = np.linalg.solve(a, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            bad = omega_arr[np.abs(np.linalg.det(a)) == 0.0]
            raise ValueError(
                f"transfer function pole at omega={bad[:1]}, eta={eta}")
        # a numerically singular shift slips past LAPACK with a huge
        # solution instead of an error; catch it by solution size
        blowup = np.linalg.norm(a, axis=(-2, -1)) \
            * np.abs(sol).max(axis=-1) > 1e10
        if blowup.any():
            bad = omega_arr[blowup]
            raise ValueError(
                f"transfer function pole at omega={bad[:1]}, eta={eta}")
        out = np.abs(sol[:, 2]) ** 2
    else:
        raise ValueError("method must be 'matrix' or 'poles'")
    if not np.isfinite(out).all():
        raise ValueError(f"transfer function pole encountered at eta={eta}")
    return out if np.ndim(omega) else float(out[0])


def _transfer_three_poles(params, omega, eta):
    rates = derive_rates(params)
    if rates.xi is None:
        raise ValueError("three-pole approximation needs a driven, "
                         "detuned system")
    s = 1j * omega - 0.5 * eta
    delta, kappa = params.delta, params.kappa
    cav = 2.0 * delta + 1j * kappa
    amp = (rates.xi / (rates.gamma_p * s)
           + 1j * kappa / (cav * (s - 1j * delta - 0.5 * rates.gamma_eff))
           - 1j * kappa / (cav * (s - 0.5 * kappa)))
    return np.abs(amp) ** 2


def noise_psd(channel: NoiseChannel, omega, eta: float):
    """Exponentially weighted power spectrum of the level-shift noise."""
    omega = np.asarray(omega, dtype=float)
    if channel.sigma == 0.0:
        return np.zeros_like(omega) if omega.ndim else 0.0
    num = channel.sigma ** 2 * (eta + 2.0 * channel.beta)
    out = num / (omega ** 2 + (0.5 * eta + channel.beta) ** 2)
    return out if omega.ndim else float(out)


def indist_freq_domain(params: SystemParams, channel: NoiseChannel,
                       method: str = "matrix",
                       psd: Callable | None = None) -> float:
    """Small-noise indistinguishability from the spectral-overlap integral.

    F = 1 + xi H(0, 2 xi) S_r(0, 2 xi)
          - 2 integral dw/2pi H(w, xi) S_r(w, xi).
    ``psd(omega, eta)`` may replace the built-in Lorentzian noise spectrum.
    """
    rates = derive_rates(params)
    if rates.xi is None or rates.xi == 0.0:
        raise ValueError("spectral overlap needs a driven, detuned system")
    if channel.sigma == 0.0:
        return 1.0
    xi = rates.xi
    s_r = psd if psd is not None else \
        (lambda w, eta: noise_psd(channel, w, eta))

    def integrand(w):
        return transfer_H(params, w, xi, method=method) * s_r(w, xi)

    window = max(10.0 * channel.beta, 4.0 * abs(params.delta),
                 4.0 * params.kappa)
    tol = 1e-6 * channel.sigma ** 2 / rates.gamma_p ** 2
    for attempt in range(2):
        breaks = {0.0, abs(params.delta), -abs(params.delta),
                  0.5 * params.kappa, -0.5 * params.kappa, window, -window}
        edges = sorted(b for b in breaks if abs(b) <= window)
        total, err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, e = scipy.integrate.quad(
                integrand, lo, hi, epsabs=tol / (len(edges) + 1),
                epsrel=1e-9, limit=400)
            total += val
            err += e
        # S_r falls off as 1/w^2 past the window; bounding H there by its
        # window-edge value caps the discarded tail
        h_edge = max(transfer_H(params, window, xi, method=method),
                     transfer_H(params, -window, xi, method=method))
        tail = h_edge * channel.sigma ** 2 * (xi + 2.0 * channel.beta) \
            / window
        if err + tail <= 10.0 * tol:
            break
        window *= 4.0
    else:
        raise ValueError(
            f"spectral integral did not converge: error estimate {err:.3g}"
            f" + tail bound {tail:.3g} exceeds {10.0 * tol:.3g}")
    first = xi * transfer_H(params, 0.0, 2.0 * xi, method=method) \
        * s_r(0.0, 2.0 * xi)
    return 1.0 + first - 2.0 * total / (2.0 * math.pi)
