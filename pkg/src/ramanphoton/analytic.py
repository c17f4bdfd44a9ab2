"""Closed-form indistinguishability estimates for the dephased emitter.

Every function returns an :class:`AnalyticPrediction` whose ``terms`` add up
to the quoted infidelity exactly.  The formulas take already-derived rates so
they work unchanged in scaled units and in physical (GHz) units; the
:func:`predict` wrapper composes them with :func:`~ramanphoton.derive_rates`.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

from .model import SystemParams, derive_rates, regime_check
from .noise import NoiseChannel

__all__ = [
    "AnalyticPrediction",
    "ground_state",
    "predict",
    "raman_filtered",
    "raman_good_cavity",
    "raman_large_kappa",
    "time_jitter",
    "two_level",
]

# past this the second-order expansion behind every formula is suspect
_SMALL_INFIDELITY = 0.1
# detuning must dominate the broadened line for the Raman closed forms
_DETUNING_FACTOR = 4.0


@dataclass(frozen=True)
class AnalyticPrediction:
    """A closed-form 1 - F with its additive mechanism decomposition."""

    one_minus_F: float
    terms: Mapping[str, float]
    regime_ok: bool

    def __post_init__(self):
        object.__setattr__(self, "terms", MappingProxyType(dict(self.terms)))


def _build(terms: dict, regime_ok: bool) -> AnalyticPrediction:
    if any(v < 0.0 for v in terms.values()):
        raise ValueError("infidelity terms must be nonnegative")
    total = sum(terms.values())
    return AnalyticPrediction(total, terms,
                              bool(regime_ok) and total <= _SMALL_INFIDELITY)


def _check_noise(sigma: float, beta: float) -> None:
    if sigma < 0.0:
        raise ValueError("noise amplitude sigma must be nonnegative")
    if beta < 0.0:
        raise ValueError("fluctuation rate beta must be nonnegative")


def _accumulated_phase_term(sigma: float, beta: float, gamma_p: float,
                            xi: float) -> float:
    # low-passed detuning noise integrated into the emitted-photon phase
    return 2.0 * sigma**2 / (gamma_p**2 * (1.0 + beta / xi))


def raman_large_kappa(sigma: float, beta: float, gamma_p: float, xi: float,
                      delta: float) -> AnalyticPrediction:
    """Fast-cavity Raman emission under intermediate-level dephasing."""
    _check_noise(sigma, beta)
    if xi <= 0.0 or gamma_p <= 0.0:
        raise ValueError("xi and gamma_p must be positive")
    if delta == 0.0 and beta == 0.0:
        raise ValueError("static noise on resonance is outside this form")
    direct = (2.0 * sigma**2 / (delta**2 + beta**2)) \
        * (gamma_p + 2.0 * beta) / gamma_p
    return _build(
        {"accumulated-phase": _accumulated_phase_term(sigma, beta,
                                                      gamma_p, xi),
         "direct-spontaneous": direct},
        abs(delta) >= _DETUNING_FACTOR * gamma_p
        and sigma <= 0.3 * gamma_p)


def raman_filtered(sigma: float, beta: float, gamma_p: float,
                   xi: float) -> AnalyticPrediction:
    """Raman emission behind a filter that keeps only the narrow line."""
    _check_noise(sigma, beta)
    if xi <= 0.0 or gamma_p <= 0.0:
        raise ValueError("xi and gamma_p must be positive")
    return _build(
        {"accumulated-phase": _accumulated_phase_term(sigma, beta,
                                                      gamma_p, xi)},
        sigma <= 0.3 * gamma_p)


def two_level(sigma: float, beta: float,
              gamma_p: float) -> AnalyticPrediction:
    """Directly excited two-level emitter with the same dephasing."""
    _check_noise(sigma, beta)
    if gamma_p <= 0.0:
        raise ValueError("gamma_p must be positive")
    return _build(
        {"direct-spontaneous": 2.0 * sigma**2 / (gamma_p * (gamma_p + beta))},
        sigma <= 0.3 * gamma_p)


def raman_good_cavity(sigma: float, beta: float, gamma_p: float,
                      gamma_eff: float, xi: float, delta: float,
                      kappa: float) -> AnalyticPrediction:
    """Finite-cavity Raman emission: the narrow cavity also filters."""
    _check_noise(sigma, beta)
    if xi <= 0.0 or gamma_p <= 0.0 or gamma_eff <= 0.0:
        raise ValueError("xi, gamma_p and gamma_eff must be positive")
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    if delta == 0.0 and beta == 0.0:
        raise ValueError("static noise on resonance is outside this form")
    band = kappa**2 / (kappa**2 + 4.0 * delta**2)
    direct = (2.0 * sigma**2 / (delta**2 + beta**2)) \
        * (gamma_eff + 2.0 * beta) / gamma_eff * band
    resonant = 8.0 * sigma**2 * kappa \
        / ((kappa**2 + 4.0 * delta**2) * (kappa + 2.0 * beta))
    return _build(
        {"accumulated-phase": _accumulated_phase_term(sigma, beta,
                                                      gamma_p, xi),
         "direct-spontaneous": direct,
         "cavity-resonant": resonant},
        abs(delta) >= _DETUNING_FACTOR * gamma_p
        and sigma <= 0.3 * gamma_p)


def ground_state(sigma_g: float, beta_g: float,
                 xi: float) -> AnalyticPrediction:
    """Ground-level energy fluctuations dephasing the emitted photon."""
    _check_noise(sigma_g, beta_g)
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    return _build(
        {"accumulated-phase": 2.0 * sigma_g**2 / (xi * (xi + beta_g))},
        sigma_g <= 0.3 * xi or beta_g >= xi)


def time_jitter(omega: float, delta: float, gamma_e: float,
                xi: float) -> AnalyticPrediction:
    """Infidelity from random restarts of the transfer via initial-level decay.

    The off-resonant drive returns population to the initial level at
    xi_e = (|omega|^2 / 4 delta^2) gamma_e; each event re-times the photon.
    """
    if xi <= 0.0:
        raise ValueError("xi must be positive")
    if gamma_e < 0.0:
        raise ValueError("gamma_e must be nonnegative")
    if delta == 0.0:
        raise ValueError("time-jitter estimate needs a detuned drive")
    xi_e = (omega**2 / (4.0 * delta**2)) * gamma_e
    value = xi_e / (xi_e + xi)
    return _build({"time-jitter": value}, value <= 0.5)


_KINDS = {
    "raman": raman_large_kappa,
    "raman_filtered": raman_filtered,
    "two_level": two_level,
    "good_cavity": raman_good_cavity,
    "ground_state": ground_state,
}


def predict(params: SystemParams, channel: NoiseChannel,
            kind: str = "raman") -> AnalyticPrediction:
    """Closed-form prediction for a parameter set and noise channel.

    ``kind`` selects the emission scheme; the channel supplies sigma and
    beta.  The regime flag folds in the adiabatic validity of ``params``.
    """
    if kind not in _KINDS:
        raise ValueError(
            f"unknown prediction kind {kind!r}; choose from "
            f"{sorted(_KINDS)}")
    rates = derive_rates(params)
    if rates.xi is None:
        raise ValueError("closed forms need a detuned drive (delta != 0)")
    sigma, beta = channel.sigma, channel.beta
    if kind == "raman":
        pred = raman_large_kappa(sigma, beta, rates.gamma_p, rates.xi,
                                 params.delta)
    elif kind == "raman_filtered":
        pred = raman_filtered(sigma, beta, rates.gamma_p, rates.xi)
    elif kind == "two_level":
        pred = two_level(sigma, beta, rates.gamma_p)
    elif kind == "good_cavity":
        pred = raman_good_cavity(sigma, beta, rates.gamma_p,
                                 rates.gamma_eff, rates.xi, params.delta,
                                 params.kappa)
    else:
        pred = ground_state(sigma, beta, rates.xi)
    ok = pred.regime_ok and regime_check(params).adiabatic_ok
    return AnalyticPrediction(pred.one_minus_F, dict(pred.terms), ok)
