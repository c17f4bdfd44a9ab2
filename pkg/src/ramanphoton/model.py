"""Parameters and derived rates for a driven three-level emitter in a one-sided cavity.

The emitter has a metastable initial level, an excited level, and a final
level; a classical drive (real Rabi frequency ``omega``) couples initial to
excited, the cavity (coupling ``g0``) couples excited to final, and the
emitted photon leaves through the waveguide fraction ``kappa_wg`` of the
cavity linewidth ``kappa``.  All rates share one inverse-time unit; angles
are radians.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, fields

__all__ = [
    "SystemParams",
    "DerivedRates",
    "RegimeReport",
    "derive_rates",
    "regime_check",
    "params_to_dict",
    "params_from_dict",
    "params_to_json",
    "params_from_json",
    "params_hash",
    "REGIME_THRESHOLD",
]

REGIME_THRESHOLD = 0.2


@dataclass(frozen=True)
class SystemParams:
    g0: float                      # emitter-cavity coupling
    kappa: float                   # total cavity energy decay rate
    gamma: float                   # excited-state decay into non-cavity modes
    omega: float                   # drive Rabi frequency (taken real)
    delta: float                   # common one-photon detuning of drive and cavity
    delta_c: float = 0.0           # two-photon detuning of the cavity line
    kappa_wg: float | None = None  # waveguide share of kappa; None means all of it
    t_max: float | None = None     # integration horizon; None derives one
    dt: float | None = None        # requested step; None derives one

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.g0 < 0 or self.gamma < 0:
            raise ValueError("g0 and gamma must be non-negative")
        kwg = self.kappa if self.kappa_wg is None else self.kappa_wg
        if not 0 <= kwg <= self.kappa:
            raise ValueError("kappa_wg must lie in [0, kappa]")
        if self.t_max is not None and self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def kappa_wg_eff(self) -> float:
        return self.kappa if self.kappa_wg is None else self.kappa_wg


@dataclass(frozen=True)
class DerivedRates:
    gamma_p: float          # cavity-enhanced excited-state decay
    delta_prime: complex    # complex detuning delta - i*gamma_p/2
    xi: float | None        # photon emission rate of the driven transfer; None on resonance
    zeta: float | None      # drive-induced line shift; None on resonance
    gamma_eff: float        # effective emitter linewidth seen outside the cavity band
    branching: float        # fraction of decays that end as a waveguide photon


def derive_rates(p: SystemParams) -> DerivedRates:
    """Closed-form rates used throughout; exact in the stated limits."""
    gamma_p = p.gamma + 4.0 * p.g0 ** 2 / p.kappa
    delta_prime = p.delta - 0.5j * gamma_p
    if p.delta != 0.0:
        xi = p.omega ** 2 * gamma_p / (4.0 * p.delta ** 2)
        zeta = -p.omega ** 2 / (4.0 * p.delta)
    else:
        xi = None
        zeta = None
    k2, d2 = p.kappa ** 2, 4.0 * p.delta ** 2
    gamma_eff = (k2 * gamma_p + d2 * p.gamma) / (k2 + d2)
    if gamma_p > 0:
        branching = (p.kappa_wg_eff / p.kappa) * (4.0 * p.g0 ** 2 / p.kappa) / gamma_p
    else:
        branching = 0.0
    return DerivedRates(gamma_p, delta_prime, xi, zeta, gamma_eff, branching)


@dataclass(frozen=True)
class RegimeReport:
    ratios: dict            # condition name -> dimensionless smallness ratio
    ok: dict                # condition name -> ratio < threshold
    threshold: float
    adiabatic_ok: bool      # all conditions pass


def _ratio_over_delta(numerator: float, delta: float) -> float:
    # numerator/|delta| with the 0/0 corner resolved to 0 (vacuously satisfied)
    if numerator == 0.0:
        return 0.0
    if delta == 0.0:
        return math.inf
    return numerator / abs(delta)


def regime_check(p: SystemParams) -> RegimeReport:
    """Validity ratios for the adiabatic single-photon picture.

    Each condition is reported as a ratio that must stay below
    ``REGIME_THRESHOLD``.  The drive/linewidth-versus-detuning condition uses
    half the detuning since the expansion parameters are omega/(2 delta) and
    gamma_p/(2 delta).
    """
    r = derive_rates(p)
    ratios = {
        "drive_and_linewidth_vs_detuning": _ratio_over_delta(
            max(abs(p.omega), r.gamma_p), 2.0 * p.delta),
        "cavity_loading": _ratio_over_delta(
            abs(p.omega) * p.g0, p.delta) / p.kappa,
        "transfer_slow_vs_spontaneous": (
            0.0 if p.omega == 0.0
            else math.inf if p.delta == 0.0 or p.gamma == 0.0
            else (p.omega ** 2 / (4.0 * p.delta ** 2)) * r.gamma_p / p.gamma),
        "shifted_line_inside_cavity": (
            abs(p.delta_c) / p.kappa if p.omega == 0.0
            else math.inf if p.delta == 0.0
            else abs(p.omega ** 2 / (4.0 * p.delta) + p.delta_c) / p.kappa),
    }
    ok = {k: v < REGIME_THRESHOLD for k, v in ratios.items()}
    return RegimeReport(ratios, ok, REGIME_THRESHOLD, all(ok.values()))


_PARAM_FIELDS = None


def params_to_dict(p: SystemParams) -> dict:
    return asdict(p)


def params_from_dict(d: dict) -> SystemParams:
    """Strict constructor: unknown keys are rejected, not ignored."""
    global _PARAM_FIELDS
    if _PARAM_FIELDS is None:
        _PARAM_FIELDS = {f.name for f in fields(SystemParams)}
    unknown = sorted(set(d) - _PARAM_FIELDS)
    if unknown:
        raise ValueError(f"unknown parameter fields: {', '.join(unknown)}")
    return SystemParams(**d)


def params_to_json(p: SystemParams) -> str:
    return json.dumps(params_to_dict(p), sort_keys=True)


def params_from_json(text: str) -> SystemParams:
    d = json.loads(text)
    if not isinstance(d, dict):
        raise ValueError("parameter document must be a JSON object")
    return params_from_dict(d)


def params_hash(p: SystemParams) -> str:
    """Short stable digest of the parameter set, for run provenance."""
    return hashlib.sha256(params_to_json(p).encode()).hexdigest()[:16]
