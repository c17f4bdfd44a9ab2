import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ramanphoton.model import (
    SystemParams,
    derive_rates,
    params_from_dict,
    params_from_json,
    params_hash,
    params_to_json,
    regime_check,
)

# Reference point used across the suite: strong drive far off resonance,
# heavily overdamped cavity.
REF = SystemParams(g0=50.0, kappa=1000.0, gamma=1.0, omega=10.0, delta=40.0)


def test_cavity_enhanced_decay_rate():
    r = derive_rates(REF)
    assert r.gamma_p == pytest.approx(11.0, rel=1e-12)
    assert r.delta_prime == pytest.approx(40.0 - 5.5j, rel=1e-12)


def test_transfer_rate_and_line_shift():
    r = derive_rates(REF)
    assert r.xi == pytest.approx(0.171875, rel=1e-12)
    assert r.zeta == pytest.approx(-0.625, rel=1e-12)


def test_effective_linewidth_interpolates_cavity_band():
    p = SystemParams(g0=5.0, kappa=10.0, gamma=1.0, omega=10.0, delta=40.0)
    r = derive_rates(p)
    assert r.gamma_p == pytest.approx(11.0, rel=1e-12)
    assert r.gamma_eff == pytest.approx(7500.0 / 6500.0, rel=1e-12)


def test_branching_fraction():
    r = derive_rates(REF)
    assert r.branching == pytest.approx(10.0 / 11.0, rel=1e-12)
    half = SystemParams(g0=50.0, kappa=1000.0, kappa_wg=500.0, gamma=1.0,
                        omega=10.0, delta=40.0)
    assert derive_rates(half).branching == pytest.approx(5.0 / 11.0, rel=1e-12)


def test_on_resonance_rates_undefined_not_zero():
    p = SystemParams(g0=50.0, kappa=1000.0, gamma=1.0, omega=10.0, delta=0.0)
    r = derive_rates(p)
    assert r.xi is None and r.zeta is None
    assert r.delta_prime == pytest.approx(-5.5j, rel=1e-12)
    assert r.gamma_p == pytest.approx(11.0)


def test_regime_check_reference_point_passes():
    rep = regime_check(REF)
    assert all(v < 0.2 for v in rep.ratios.values()), rep.ratios
    assert rep.adiabatic_ok
    # the known tightest ratio: slow-transfer versus spontaneous decay
    assert rep.ratios["transfer_slow_vs_spontaneous"] == pytest.approx(0.171875)
    assert rep.ratios["drive_and_linewidth_vs_detuning"] == pytest.approx(0.1375)


def test_regime_check_undriven_trivially_satisfied():
    p = SystemParams(g0=50.0, kappa=1000.0, gamma=1.0, omega=0.0, delta=40.0)
    rep = regime_check(p)
    assert rep.ratios["cavity_loading"] == 0.0
    assert rep.ratios["transfer_slow_vs_spontaneous"] == 0.0
    assert rep.ratios["shifted_line_inside_cavity"] == 0.0


def test_regime_check_resonant_drive_fails_with_infinite_ratio():
    p = SystemParams(g0=50.0, kappa=1000.0, gamma=1.0, omega=10.0, delta=0.0)
    rep = regime_check(p)
    assert math.isinf(rep.ratios["drive_and_linewidth_vs_detuning"])
    assert not rep.adiabatic_ok


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(g0=1.0, kappa=0.0, gamma=1.0, omega=1.0, delta=1.0)
    with pytest.raises(ValueError):
        SystemParams(g0=1.0, kappa=10.0, kappa_wg=11.0, gamma=1.0,
                     omega=1.0, delta=1.0)
    with pytest.raises(ValueError):
        SystemParams(g0=-1.0, kappa=10.0, gamma=1.0, omega=1.0, delta=1.0)


def test_params_json_roundtrip_and_strictness():
    text = params_to_json(REF)
    assert params_from_json(text) == REF
    assert params_hash(params_from_json(text)) == params_hash(REF)
    with pytest.raises(ValueError, match="unknown parameter"):
        params_from_dict({"g0": 1.0, "kappa": 5.0, "gamma": 1.0,
                          "omega": 1.0, "delta": 1.0, "sigma": 2.0})


rate_floats = st.floats(min_value=0.01, max_value=1e3, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(g0=rate_floats, kappa=rate_floats, gamma=rate_floats,
       omega=rate_floats, delta=rate_floats, s=st.sampled_from([0.25, 4.0]))
def test_derived_rates_scale_covariance(g0, kappa, gamma, omega, delta, s):
    # scaling every rate by s scales every derived rate by s
    a = derive_rates(SystemParams(g0=g0, kappa=kappa, gamma=gamma,
                                  omega=omega, delta=delta))
    b = derive_rates(SystemParams(g0=g0 * s, kappa=kappa * s, gamma=gamma * s,
                                  omega=omega * s, delta=delta * s))
    assert b.gamma_p == pytest.approx(s * a.gamma_p, rel=1e-12)
    assert b.xi == pytest.approx(s * a.xi, rel=1e-12)
    assert b.zeta == pytest.approx(s * a.zeta, rel=1e-12)
    assert b.gamma_eff == pytest.approx(s * a.gamma_eff, rel=1e-12)
    assert b.branching == pytest.approx(a.branching, rel=1e-12)
