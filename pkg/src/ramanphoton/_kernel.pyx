# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled time stepper; semantic twin of _pykernel.run_batch.

Same contract, same RNG consumption, same operation order inside a step, so
the two backends agree to round-off (FMA contraction aside).  The one
deliberate divergence: a trajectory that trips the amplitude-norm guard is
abandoned on the spot here, while the numpy kernel zeroes it and keeps
marching the batch in lockstep.  Outputs of failed trajectories are
undefined either way; callers raise before using them.
"""

import cmath
import math

import numpy as np

from .noise import make_rng

cdef double OVERFLOW_SQ = 1.002001  # (1 + 1e-3)^2


def backend_name():
    return "compiled"


def run_batch(double dt, Py_ssize_t n_sys, Py_ssize_t n_tot, double omega,
              double delta, double delta_c, double gamma, double kappa,
              double g0, double kappa_wg, double complex e0,
              double complex r0, double complex c0, sigma, beta,
              Py_ssize_t n_bins, Py_ssize_t m_sys, Py_ssize_t m_fil,
              double complex fpole, master_seed, streams, Py_ssize_t chunk,
              bint dense):
    streams_arr = np.ascontiguousarray(streams, dtype=np.uint64)
    cdef Py_ssize_t B = streams_arr.shape[0]
    cdef bint use_filter = m_fil > 0

    cdef double sig_r = float(sigma[0]), sig_e = float(sigma[1]), sig_g = float(sigma[2])
    cdef double bet_r = float(beta[0]), bet_e = float(beta[1]), bet_g = float(beta[2])
    cdef bint act_r = sig_r > 0.0, act_e = sig_e > 0.0, act_g = sig_g > 0.0

    cdef double complex cw = -0.5j * omega
    cdef double complex cg = -1.0j * g0
    cdef double complex cr0 = -(0.5 * gamma) - 1.0j * delta
    cdef double complex ck0 = -(0.5 * kappa) - 1.0j * delta_c
    cdef double complex I = 1.0j
    cdef double sqrt_kwg = math.sqrt(kappa_wg)
    cdef double h2 = 0.5 * dt
    cdef double h6 = dt / 6.0

    cdef double ar = math.exp(-bet_r * 0.5 * dt)
    cdef double ae = math.exp(-bet_e * 0.5 * dt)
    cdef double ag = math.exp(-bet_g * 0.5 * dt)
    cdef double qr = sig_r * math.sqrt(max(0.0, 1.0 - ar * ar))
    cdef double qe = sig_e * math.sqrt(max(0.0, 1.0 - ae * ae))
    cdef double qg = sig_g * math.sqrt(max(0.0, 1.0 - ag * ag))

    cdef double complex ef = 0.0
    cdef double complex wf = 0.0
    if use_filter:
        ef = cmath.exp(-fpole * dt)
        wf = fpole.real * (1.0 - ef) / fpole

    binsum_arr = np.zeros((B, n_bins), dtype=np.complex128)
    eta_arr = np.zeros(B)
    bal_arr = np.zeros(B)
    fin_arr = np.zeros((B, 3), dtype=np.complex128)
    fail_arr = np.full(B, -1, dtype=np.int64)
    cdef double complex[:, ::1] binsum = binsum_arr
    cdef double[::1] eta_v = eta_arr
    cdef double[::1] bal_v = bal_arr
    cdef double complex[:, ::1] fin_v = fin_arr
    cdef long long[::1] fail_v = fail_arr

    cdef double complex[:, ::1] binsum_f = None
    cdef double[::1] etaf_v = None
    binsumf_arr = etaf_arr = None
    if use_filter:
        binsumf_arr = np.zeros((B, n_bins), dtype=np.complex128)
        etaf_arr = np.zeros(B)
        binsum_f = binsumf_arr
        etaf_v = etaf_arr

    cdef double complex[:, ::1] de_v = None, dr_v = None, dg_v = None, da_v = None
    cdef double[:, ::1] nr_v = None, ne_v = None, ng_v = None
    dense_arrs = {}
    if dense:
        for k in ("e", "r", "g", "alpha"):
            dense_arrs[k] = np.empty((B, n_sys + 1), dtype=np.complex128)
        de_v = dense_arrs["e"]
        dr_v = dense_arrs["r"]
        dg_v = dense_arrs["g"]
        da_v = dense_arrs["alpha"]
        if act_r:
            dense_arrs["noise_r"] = np.empty((B, n_sys + 1))
            nr_v = dense_arrs["noise_r"]
        if act_e:
            dense_arrs["noise_e"] = np.empty((B, n_sys + 1))
            ne_v = dense_arrs["noise_e"]
        if act_g:
            dense_arrs["noise_g"] = np.empty((B, n_sys + 1))
            ng_v = dense_arrs["noise_g"]

    cdef double[::1] zr = None, ze = None, zg = None
    cdef double complex e, r, g, te, tr, tg, alpha, alpha_prev, y, af_prev, ynew
    cdef double complex crr, ckk, cee
    cdef double complex k1e, k1r, k1g, k2e, k2r, k2g, k3e, k3r, k3g, k4e, k4r, k4g
    cdef double xr, xe, xg, r2, g2, e2, r2_prev, g2_prev, af2, af2_prev
    cdef double eta_acc, gint, kint, n2
    cdef Py_ssize_t b, start, ns, s, i, cell, left, cellf, leftf
    cdef bint failed

    for b in range(B):
        stream = int(streams_arr[b])
        rng_r = make_rng(master_seed, stream, 0) if act_r else None
        rng_e = make_rng(master_seed, stream, 1) if act_e else None
        rng_g = make_rng(master_seed, stream, 2) if act_g else None

        e = e0
        r = r0
        g = c0
        xr = sig_r * (<double> rng_r.standard_normal(1)[0]) if act_r else 0.0
        xe = sig_e * (<double> rng_e.standard_normal(1)[0]) if act_e else 0.0
        xg = sig_g * (<double> rng_g.standard_normal(1)[0]) if act_g else 0.0

        eta_acc = 0.0
        gint = 0.0
        kint = 0.0
        alpha_prev = sqrt_kwg * g
        r2_prev = r.real * r.real + r.imag * r.imag
        g2_prev = g.real * g.real + g.imag * g.imag
        cell = 0
        left = m_sys
        y = 0.0
        af_prev = 0.0
        af2_prev = 0.0
        cellf = 0
        leftf = m_fil
        failed = False

        if dense:
            de_v[b, 0] = e
            dr_v[b, 0] = r
            dg_v[b, 0] = g
            da_v[b, 0] = alpha_prev
            if act_r:
                nr_v[b, 0] = xr
            if act_e:
                ne_v[b, 0] = xe
            if act_g:
                ng_v[b, 0] = xg

        crr = cr0
        cee = 0.0
        ckk = ck0
        for start in range(0, n_sys, chunk):
            ns = min(chunk, n_sys - start)
            if act_r:
                zr = rng_r.standard_normal(2 * ns)
            if act_e:
                ze = rng_e.standard_normal(2 * ns)
            if act_g:
                zg = rng_g.standard_normal(2 * ns)
            for s in range(ns):
                i = start + s
                if act_r:
                    xr = ar * xr + qr * zr[2 * s]
                    crr = cr0 - I * xr
                if act_e:
                    xe = ae * xe + qe * ze[2 * s]
                    cee = -I * xe
                if act_g:
                    xg = ag * xg + qg * zg[2 * s]
                    ckk = ck0 - I * xg

                k1e = cw * r + cee * e
                k1r = crr * r + cw * e + cg * g
                k1g = cg * r + ckk * g
                te = e + h2 * k1e
                tr = r + h2 * k1r
                tg = g + h2 * k1g
                k2e = cw * tr + cee * te
                k2r = crr * tr + cw * te + cg * tg
                k2g = cg * tr + ckk * tg
                te = e + h2 * k2e
                tr = r + h2 * k2r
                tg = g + h2 * k2g
                k3e = cw * tr + cee * te
                k3r = crr * tr + cw * te + cg * tg
                k3g = cg * tr + ckk * tg
                te = e + dt * k3e
                tr = r + dt * k3r
                tg = g + dt * k3g
                k4e = cw * tr + cee * te
                k4r = crr * tr + cw * te + cg * tg
                k4g = cg * tr + ckk * tg
                e = e + h6 * (k1e + 2.0 * (k2e + k3e) + k4e)
                r = r + h6 * (k1r + 2.0 * (k2r + k3r) + k4r)
                g = g + h6 * (k1g + 2.0 * (k2g + k3g) + k4g)

                if act_r:
                    xr = ar * xr + qr * zr[2 * s + 1]
                if act_e:
                    xe = ae * xe + qe * ze[2 * s + 1]
                if act_g:
                    xg = ag * xg + qg * zg[2 * s + 1]

                alpha = sqrt_kwg * g
                r2 = r.real * r.real + r.imag * r.imag
                g2 = g.real * g.real + g.imag * g.imag
                eta_acc += h2 * kappa_wg * (g2_prev + g2)
                gint += h2 * gamma * (r2_prev + r2)
                kint += h2 * kappa * (g2_prev + g2)
                binsum[b, cell] += h2 * (alpha_prev + alpha)

                if use_filter:
                    ynew = ef * y + wf * alpha_prev
                    af2 = ynew.real * ynew.real + ynew.imag * ynew.imag
                    etaf_v[b] += h2 * (af2_prev + af2)
                    binsum_f[b, cellf] += h2 * (af_prev + ynew)
                    y = ynew
                    af_prev = ynew
                    af2_prev = af2
                    leftf -= 1
                    if leftf == 0:
                        cellf += 1
                        leftf = m_fil if cellf == n_bins - 1 else 2 * m_fil

                e2 = e.real * e.real + e.imag * e.imag
                n2 = e2 + r2 + g2
                if n2 > OVERFLOW_SQ:
                    fail_v[b] = i
                    e = 0.0
                    r = 0.0
                    g = 0.0
                    alpha = 0.0
                    r2 = 0.0
                    g2 = 0.0
                    failed = True

                if dense:
                    de_v[b, i + 1] = e
                    dr_v[b, i + 1] = r
                    dg_v[b, i + 1] = g
                    da_v[b, i + 1] = alpha
                    if act_r:
                        nr_v[b, i + 1] = xr
                    if act_e:
                        ne_v[b, i + 1] = xe
                    if act_g:
                        ng_v[b, i + 1] = xg

                alpha_prev = alpha
                r2_prev = r2
                g2_prev = g2
                left -= 1
                if left == 0:
                    cell += 1
                    left = m_sys if cell == n_bins - 1 else 2 * m_sys
                if failed:
                    break
            if failed:
                break

        bal_v[b] = (e.real * e.real + e.imag * e.imag + r2_prev + g2_prev
                    + gint + kint - 1.0)
        eta_v[b] = eta_acc
        fin_v[b, 0] = e
        fin_v[b, 1] = r
        fin_v[b, 2] = g

        if use_filter and not failed:
            # left-held input keeps the final sample for one step, then
            # the pole rings down freely
            for i in range(n_sys, n_tot):
                ynew = ef * y + wf * alpha_prev if i == n_sys else ef * y
                af2 = ynew.real * ynew.real + ynew.imag * ynew.imag
                etaf_v[b] += h2 * (af2_prev + af2)
                binsum_f[b, cellf] += h2 * (af_prev + ynew)
                y = ynew
                af_prev = ynew
                af2_prev = af2
                leftf -= 1
                if leftf == 0:
                    cellf += 1
                    leftf = m_fil if cellf == n_bins - 1 else 2 * m_fil

    out = {
        "alpha_bins": binsum_arr,
        "eta": eta_arr,
        "balance": bal_arr,
        "final": fin_arr,
        "fail_step": fail_arr,
    }
    if use_filter:
        out["alphaf_bins"] = binsumf_arr
        out["eta_f"] = etaf_arr
    if dense:
        out.update(dense_arrs)
    return out
