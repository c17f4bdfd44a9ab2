"""Binned output envelopes and two-photon interference estimation.

A fine-grid envelope alpha(t) is reduced to per-cell trapezoid integrals
around ``n_bins`` uniform nodes t_j = j*h, h = T/(n_bins-1).  Each node owns
the cell [t_j - h/2, t_j + h/2] clipped to [0, T]; the stored value is the
cell integral divided by the trapezoid weight w_j (h at interior nodes, h/2
at the ends), so sum(w * binned) reproduces the fine trapezoid integral of
alpha exactly and binned quadratic forms approximate double time integrals.

Interference of a photon pair from two independent emission records a, b is
scored by the squared envelope overlap |integral a conj(b)|^2.  Averaging
over all ordered pairs drawn from one ensemble, including the diagonal,
gives the indistinguishability estimate

    F_hat = sum_ij |S_ij|^2 / (sum_i P_i)^2,

which equals the quadratic form w^T |G|^2 w / (w . diag G)^2 of the summed
coherence matrix G = sum_i outer(a_i, conj(a_i)).  The accumulator keeps G
split across a fixed number of jackknife slots (trajectory index modulo
n_slots) so independent batches merge by addition in any order and the
delete-one-slot jackknife gives a standard error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SLOTS = 20


def bin_nodes(t_max: float, n_bins: int) -> np.ndarray:
    if n_bins < 2:
        raise ValueError("need at least two bins")
    return np.linspace(0.0, t_max, n_bins)


def bin_weights(t_max: float, n_bins: int) -> np.ndarray:
    if n_bins < 2:
        raise ValueError("need at least two bins")
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    h = t_max / (n_bins - 1)
    w = np.full(n_bins, h)
    w[0] = w[-1] = 0.5 * h
    return w


def bin_envelope(t: np.ndarray, values: np.ndarray, n_bins: int) -> np.ndarray:
    """Reduce a uniform fine-grid envelope to per-cell trapezoid averages.

    The fine grid must split evenly into half-cells: len(t) - 1 must be a
    multiple of 2*(n_bins - 1).
    """
    t = np.asarray(t, dtype=float)
    values = np.asarray(values)
    if t.ndim != 1 or t.size < 2 or values.shape != t.shape:
        raise ValueError("need matching 1-d time and value arrays")
    n_seg = t.size - 1
    span = 2 * (n_bins - 1)
    if n_seg % span:
        raise ValueError(
            f"{n_seg} segments do not split into {n_bins} bins: "
            f"need a multiple of {span}")
    m = n_seg // span
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("time grid must be uniform")
    seg = 0.5 * dt[0] * (values[:-1] + values[1:])
    cells = (np.arange(n_seg) + m) // (2 * m)
    sums = np.bincount(cells, weights=seg.real, minlength=n_bins)
    if np.iscomplexobj(seg):
        sums = sums + 1j * np.bincount(cells, weights=seg.imag,
                                       minlength=n_bins)
    return sums / bin_weights(t[-1], n_bins)


@dataclass(frozen=True)
class HomResult:
    f: float
    se: float
    n_traj: int
    n_slots: int


def _f_of(g: np.ndarray, w: np.ndarray) -> float:
    num = w @ (g.real ** 2 + g.imag ** 2) @ w
    den = w @ g.real.diagonal()
    return float(num / den ** 2)


class CoherenceAccumulator:
    """Streaming mean-coherence matrix with slot-wise jackknife bookkeeping."""

    def __init__(self, weights, n_slots: int = DEFAULT_SLOTS):
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 2 or (weights <= 0).any():
            raise ValueError("weights must be a 1-d positive array")
        if n_slots < 1:
            raise ValueError("need at least one jackknife slot")
        self.weights = weights
        self.n_slots = n_slots
        nb = weights.size
        self._g = np.zeros((n_slots, nb, nb), dtype=complex)
        self._counts = np.zeros(n_slots, dtype=np.int64)

    @property
    def n_traj(self) -> int:
        return int(self._counts.sum())

    def add(self, values, indices) -> None:
        values = np.asarray(values)
        if values.ndim == 1:
            values = values[None, :]
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        if values.shape != (indices.size, self.weights.size):
            raise ValueError("values must be (n_traj, n_bins) matching "
                             "weights and indices")
        if (indices < 0).any():
            raise ValueError("trajectory indices must be nonnegative")
        slots = indices % self.n_slots
        for k in np.unique(slots):
            block = values[slots == k]
            self._g[k] += block.T @ block.conj()
            self._counts[k] += block.shape[0]

    def merge(self, other: "CoherenceAccumulator") -> None:
        if not isinstance(other, CoherenceAccumulator):
            raise TypeError("can only merge another accumulator")
        if other.n_slots != self.n_slots or not np.array_equal(
                other.weights, self.weights):
            raise ValueError("accumulators use different binning")
        self._g += other._g
        self._counts += other._counts

    def mean_coherence(self) -> np.ndarray:
        n = self.n_traj
        if n == 0:
            raise ValueError("no trajectories accumulated")
        return self._g.sum(axis=0) / n

    def estimate(self) -> HomResult:
        n = self.n_traj
        if n == 0:
            raise ValueError("no trajectories accumulated")
        total = self._g.sum(axis=0)
        f = _f_of(total, self.weights)
        live = np.flatnonzero(self._counts)
        if live.size >= 2:
            fk = np.array([_f_of(total - self._g[k], self.weights)
                           for k in live])
            kk = live.size
            se = math.sqrt((kk - 1) / kk * ((fk - fk.mean()) ** 2).sum())
        else:
            se = float("nan")
        return HomResult(f=f, se=se, n_traj=n, n_slots=self.n_slots)


def spectrum_from_coherence(g: np.ndarray, nodes: np.ndarray,
                            weights: np.ndarray, omegas) -> np.ndarray:
    """Mean emission power density from a coherence matrix.

    S(w) = sum_jl w_j w_l G_jl exp(i w (t_j - t_l)) is the ensemble mean of
    |integral alpha(t) exp(i w t) dt|^2 under the exp(-i w t) frequency
    convention; integrated over w/(2 pi) it recovers the mean emission
    probability up to binning resolution.
    """
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    u = weights * np.exp(-1j * np.outer(omegas, nodes))
    return np.einsum("wj,jl,wl->w", u.conj(), g, u).real


def pairwise_f(values, weights) -> float:
    """Direct ordered-pair average of |overlap|^2, diagonal included.

    Quadratic in the trajectory count; meant as a cross-check for the
    accumulator on small ensembles.
    """
    a = np.asarray(values)
    if a.ndim != 2:
        raise ValueError("values must be (n_traj, n_bins)")
    w = np.asarray(weights, dtype=float)
    if w.shape != (a.shape[1],):
        raise ValueError("weights do not match values")
    s = (a * w) @ a.conj().T
    p = s.real.diagonal()
    return float((s.real ** 2 + s.imag ** 2).sum() / p.sum() ** 2)
