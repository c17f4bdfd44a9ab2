"""Numpy fallback time stepper for the driven Lambda-system amplitude equations.

Vectorized over a batch of trajectories that share parameters and grid but
own independent noise streams.  Semantics are mirrored by the compiled twin
in ``_kernel.pyx``; any change here must be made there as well.

Conventions shared by both kernels:

* classical 4th-order Runge-Kutta with the level-shift noise held at the
  step midpoint; the noise state advances by two exact half-steps per step
  (a 2x refined grid), so sample-time values exist at every output sample;
* channel slots are ordered (r, e, g); inactive channels (sigma == 0)
  consume no randomness; active ones draw from Philox substreams jumped by
  their slot index;
* the output envelope alpha = sqrt(kappa_wg) * g is reduced on the fly to
  per-cell trapezoid integrals around ``n_bins`` uniform nodes, so long runs
  never materialize full-resolution arrays;
* a one-pole filter (pole ``fpole = fwhm/2 - i*center``) can be co-integrated
  with a zero-order hold on the left sample; after the source window closes
  the filter input is zero and only the ring-down is tracked.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .noise import make_rng

OVERFLOW_SQ = 1.002001  # (1 + 1e-3)^2 amplitude-norm guard


def backend_name() -> str:
    return "numpy"


def _channel_rngs(master_seed, stream, active):
    return {c: make_rng(master_seed, stream, substream=c) for c in active}


def run_batch(dt, n_sys, n_tot, omega, delta, delta_c, gamma, kappa, g0,
              kappa_wg, e0, r0, c0, sigma, beta, n_bins, m_sys, m_fil,
              fpole, master_seed, streams, chunk, dense):
    B = len(streams)
    use_filter = m_fil > 0
    active = [c for c in range(3) if sigma[c] > 0.0]

    cw = -0.5j * omega
    cg = -1.0j * g0
    cr0 = -(0.5 * gamma) - 1.0j * delta
    ck0 = -(0.5 * kappa) - 1.0j * delta_c
    sqrt_kwg = math.sqrt(kappa_wg)
    h2 = 0.5 * dt
    h6 = dt / 6.0

    a_half = np.array([math.exp(-beta[c] * 0.5 * dt) for c in range(3)])
    s_half = np.array([sigma[c] * math.sqrt(max(0.0, 1.0 - a_half[c] ** 2))
                       for c in range(3)])
    if use_filter:
        ef = cmath.exp(-fpole * dt)
        wf = fpole.real * (1.0 - ef) / fpole

    rngs = [_channel_rngs(master_seed, int(s), active) for s in streams]

    e = np.full(B, e0, dtype=complex)
    r = np.full(B, r0, dtype=complex)
    g = np.full(B, c0, dtype=complex)
    x = np.zeros((3, B))
    for c in active:
        x[c] = sigma[c] * np.array([rngs[b][c].standard_normal(1)[0]
                                    for b in range(B)])

    eta = np.zeros(B)
    gint = np.zeros(B)
    kint = np.zeros(B)
    fail = np.full(B, -1, dtype=np.int64)
    binsum = np.zeros((B, n_bins), dtype=complex)
    alpha_prev = sqrt_kwg * g
    r2_prev = r.real ** 2 + r.imag ** 2
    g2_prev = g.real ** 2 + g.imag ** 2
    cell, left = 0, m_sys

    if use_filter:
        y = np.zeros(B, dtype=complex)
        etaf = np.zeros(B)
        binsum_f = np.zeros((B, n_bins), dtype=complex)
        af_prev = np.zeros(B, dtype=complex)
        af2_prev = np.zeros(B)
        cell_f, left_f = 0, m_fil

    if dense:
        n_keep = n_sys + 1
        dense_out = {k: np.empty((B, n_keep), dtype=complex)
                     for k in ("e", "r", "g", "alpha")}
        noise_out = {c: np.empty((B, n_keep)) for c in active}
        for k, arr in (("e", e), ("r", r), ("g", g), ("alpha", alpha_prev)):
            dense_out[k][:, 0] = arr
        for c in active:
            noise_out[c][:, 0] = x[c]

    step = 0
    for start in range(0, n_sys, chunk):
        ns = min(chunk, n_sys - start)
        z = {c: np.stack([rngs[b][c].standard_normal(2 * ns)
                          for b in range(B)]) for c in active}
        for s in range(ns):
            for c in active:
                x[c] = a_half[c] * x[c] + s_half[c] * z[c][:, 2 * s]
            crr = cr0 - 1j * x[0] if sigma[0] > 0 else cr0
            cee = -1j * x[1] if sigma[1] > 0 else 0.0
            ckk = ck0 - 1j * x[2] if sigma[2] > 0 else ck0

            k1e = cw * r + cee * e
            k1r = crr * r + cw * e + cg * g
            k1g = cg * r + ckk * g
            te, tr, tg = e + h2 * k1e, r + h2 * k1r, g + h2 * k1g
            k2e = cw * tr + cee * te
            k2r = crr * tr + cw * te + cg * tg
            k2g = cg * tr + ckk * tg
            te, tr, tg = e + h2 * k2e, r + h2 * k2r, g + h2 * k2g
            k3e = cw * tr + cee * te
            k3r = crr * tr + cw * te + cg * tg
            k3g = cg * tr + ckk * tg
            te, tr, tg = e + dt * k3e, r + dt * k3r, g + dt * k3g
            k4e = cw * tr + cee * te
            k4r = crr * tr + cw * te + cg * tg
            k4g = cg * tr + ckk * tg
            e = e + h6 * (k1e + 2.0 * (k2e + k3e) + k4e)
            r = r + h6 * (k1r + 2.0 * (k2r + k3r) + k4r)
            g = g + h6 * (k1g + 2.0 * (k2g + k3g) + k4g)

            for c in active:
                x[c] = a_half[c] * x[c] + s_half[c] * z[c][:, 2 * s + 1]

            alpha = sqrt_kwg * g
            r2 = r.real ** 2 + r.imag ** 2
            g2 = g.real ** 2 + g.imag ** 2
            eta += h2 * kappa_wg * (g2_prev + g2)
            gint += h2 * gamma * (r2_prev + r2)
            kint += h2 * kappa * (g2_prev + g2)
            binsum[:, cell] += h2 * (alpha_prev + alpha)

            if use_filter:
                ynew = ef * y + wf * alpha_prev
                af2 = ynew.real ** 2 + ynew.imag ** 2
                etaf += h2 * (af2_prev + af2)
                binsum_f[:, cell_f] += h2 * (af_prev + ynew)
                y, af_prev, af2_prev = ynew, ynew, af2
                left_f -= 1
                if left_f == 0:
                    cell_f += 1
                    left_f = m_fil if cell_f == n_bins - 1 else 2 * m_fil

            n2 = e.real ** 2 + e.imag ** 2 + r2 + g2
            bad = n2 > OVERFLOW_SQ
            if bad.any():
                newly = bad & (fail < 0)
                fail[newly] = step
                e[bad] = 0.0
                r[bad] = 0.0
                g[bad] = 0.0
                alpha = sqrt_kwg * g
                r2 = r2.copy()
                g2 = g2.copy()
                r2[bad] = 0.0
                g2[bad] = 0.0

            step += 1
            if dense:
                dense_out["e"][:, step] = e
                dense_out["r"][:, step] = r
                dense_out["g"][:, step] = g
                dense_out["alpha"][:, step] = alpha
                for c in active:
                    noise_out[c][:, step] = x[c]

            alpha_prev, r2_prev, g2_prev = alpha, r2, g2
            left -= 1
            if left == 0:
                cell += 1
                left = m_sys if cell == n_bins - 1 else 2 * m_sys

    balance = (e.real ** 2 + e.imag ** 2 + r2_prev + g2_prev
               + gint + kint - 1.0)

    if use_filter:
        # source window closed: the left-held input keeps the final sample
        # for one step, then the pole rings down freely
        for n in range(n_sys, n_tot):
            ynew = ef * y + wf * alpha_prev if n == n_sys else ef * y
            af2 = ynew.real ** 2 + ynew.imag ** 2
            etaf += h2 * (af2_prev + af2)
            binsum_f[:, cell_f] += h2 * (af_prev + ynew)
            y, af_prev, af2_prev = ynew, ynew, af2
            left_f -= 1
            if left_f == 0:
                cell_f += 1
                left_f = m_fil if cell_f == n_bins - 1 else 2 * m_fil

    out = {
        "alpha_bins": binsum,
        "eta": eta,
        "balance": balance,
        "final": np.stack([e, r, g], axis=1),
        "fail_step": fail,
    }
    if use_filter:
        out["alphaf_bins"] = binsum_f
        out["eta_f"] = etaf
    if dense:
        out.update(dense_out)
        for c, arr in noise_out.items():
            out["noise_" + "reg"[c]] = arr
    return out
