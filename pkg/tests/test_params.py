import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambda_engine.errors import DomainError
from lambda_engine.params import (HBAR, K_B, RB87_D1_OMEGA, EngineParams, ReservoirSpec,
                                  bose_occupation, dephasing_rates,
                                  occupation_to_temperature, rabi_at,
                                  relaxation_rate_floor)

D1_RAD_S = RB87_D1_OMEGA * 1e6


def test_defaults_match_caption_values(defaults):
    assert defaults.gamma_eg == defaults.gamma_egp == 5.7
    assert defaults.omega_rabi == 10.0
    assert defaults.omega_m == 2.0
    assert defaults.probe_amplitude == 1 + 0j
    assert defaults.omega_eg > defaults.omega_egp > 0


@pytest.mark.parametrize("name", ["gamma_eg", "omega_rabi", "eta", "kappa", "n_h", "n_c"])
def test_negative_rates_rejected(name):
    with pytest.raises(DomainError):
        EngineParams(**{name: -0.1})


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_non_finite_rejected(bad):
    with pytest.raises(DomainError):
        EngineParams(omega_m=bad)


def test_lambda_ordering_enforced():
    with pytest.raises(DomainError):
        EngineParams(omega_eg=1.0, omega_egp=2.0)
    with pytest.raises(DomainError):
        EngineParams(omega_eg=1.0, omega_egp=0.0)


def test_unknown_modulation_rejected():
    with pytest.raises(DomainError):
        EngineParams(modulation="quadratic")


def test_weak_modulation_flag():
    assert EngineParams(eta=1.0).weak_modulation_ok
    assert not EngineParams(eta=1.5).weak_modulation_ok


def test_pumping_rates(defaults):
    assert defaults.r_h == pytest.approx(5.7 * 0.1)
    assert defaults.r_c == pytest.approx(5.7 * 0.05)
    assert EngineParams(omega_m=0).mirror_period == math.inf


# --- occupations ------------------------------------------------------------

def test_zero_temperature_occupation():
    assert bose_occupation(ReservoirSpec(0.0, D1_RAD_S)) == 0.0


def test_ln2_gives_unit_occupation():
    omega = 1e13
    T = HBAR * omega / (K_B * math.log(2.0))
    assert bose_occupation(ReservoirSpec(T, omega)) == pytest.approx(1.0, rel=1e-13)


def test_d1_temperature_for_n005():
    T = occupation_to_temperature(0.05, D1_RAD_S)
    assert T == pytest.approx(HBAR * D1_RAD_S / (K_B * math.log(21.0)), rel=1e-13)
    # frozen: h * 377.107463 THz / (k_B ln 21), exact SI constants, mpmath 30 digits
    assert T == pytest.approx(5944.546038789519, rel=1e-12)
    assert bose_occupation(ReservoirSpec(T, D1_RAD_S)) == pytest.approx(0.05, rel=1e-12)


@pytest.mark.parametrize("n", [0.01, 0.05, 0.5, 1.0, 30.0])
def test_occupation_roundtrip(n):
    T = occupation_to_temperature(n, D1_RAD_S)
    assert bose_occupation(ReservoirSpec(T, D1_RAD_S)) == pytest.approx(n, rel=1e-12)


def test_temperature_grows_without_bound():
    ns = [1e-3, 1e-1, 1.0, 10.0, 1e3, 1e6]
    Ts = [occupation_to_temperature(n, D1_RAD_S) for n in ns]
    assert all(b > a for a, b in zip(Ts, Ts[1:]))
    assert Ts[-1] > 1e9


@pytest.mark.parametrize("n", [0.0, -1.0])
def test_occupation_to_temperature_domain(n):
    with pytest.raises(DomainError):
        occupation_to_temperature(n, D1_RAD_S)


def test_negative_temperature_rejected():
    with pytest.raises(DomainError):
        ReservoirSpec(-1.0, D1_RAD_S)
    with pytest.raises(DomainError):
        ReservoirSpec(300.0, 0.0)


def test_occupation_monotone_in_temperature_and_frequency():
    Ts = np.linspace(100, 20000, 40)
    n_T = [bose_occupation(ReservoirSpec(T, D1_RAD_S)) for T in Ts]
    assert np.all(np.diff(n_T) > 0)
    ws = np.linspace(0.5, 2.0, 40) * D1_RAD_S
    n_w = [bose_occupation(ReservoirSpec(6000.0, w)) for w in ws]
    assert np.all(np.diff(n_w) < 0)


def test_deep_cold_underflows_to_zero():
    assert bose_occupation(ReservoirSpec(1e-3, D1_RAD_S)) == 0.0


# --- dephasing --------------------------------------------------------------

def test_dephasing_zero_temperature():
    d = dephasing_rates(EngineParams(n_h=0, n_c=0))
    assert d.gamma_eg == pytest.approx(5.7)
    assert d.gamma_egp == pytest.approx(5.7)
    assert d.gamma_ggp == 0.0


def test_dephasing_ggp_value():
    d = dephasing_rates(EngineParams(n_h=0.05, n_c=0.05))
    assert d.gamma_ggp == pytest.approx(0.285, rel=1e-14)


def test_dephasing_vanishes_without_decay():
    assert dephasing_rates(EngineParams(gamma_eg=0, gamma_egp=0)) == (0.0, 0.0, 0.0)


@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, 1), st.floats(0, 1))
def test_dephasing_monotone(nh, nc, dh, dc):
    lo = dephasing_rates(EngineParams(n_h=nh, n_c=nc))
    hi = dephasing_rates(EngineParams(n_h=nh + dh, n_c=nc + dc))
    assert all(b >= a for a, b in zip(lo, hi))


# --- modulated drive --------------------------------------------------------

def test_rabi_unmodulated():
    p = EngineParams(eta=0.0)
    assert np.all(rabi_at(np.linspace(0, 10, 7), p) == 10.0)


def test_rabi_at_quarter_period():
    p = EngineParams(eta=0.3)
    assert rabi_at(math.pi / (2 * p.omega_m), p) == pytest.approx(10.0, abs=1e-14)


def test_rabi_at_origin():
    assert rabi_at(0.0, EngineParams(eta=0.1)) == pytest.approx(10 + 1j, abs=1e-14)


def test_rabi_exact_mode_unit_modulus():
    p = EngineParams(eta=0.7, modulation="exact")
    t = np.linspace(0, 5, 50)
    assert np.allclose(np.abs(rabi_at(t, p)), p.omega_rabi, rtol=1e-14)


@given(st.floats(0, 1), st.floats(0.1, 10), st.floats(0, 100))
def test_rabi_modulus_and_period(eta, wm, t):
    p = EngineParams(eta=eta, omega_m=wm)
    w = rabi_at(t, p)
    expect = p.omega_rabi ** 2 * (1 + eta ** 2 * math.cos(wm * t) ** 2)
    assert abs(w) ** 2 == pytest.approx(expect, rel=1e-12)
    assert abs(rabi_at(t + math.pi / wm, p)) ** 2 == pytest.approx(abs(w) ** 2, rel=1e-9)


@pytest.mark.parametrize("eta", [0.01, 0.1, 0.5])
def test_rabi_modulus_period_average(eta):
    p = EngineParams(eta=eta)
    t = p.mirror_period * np.arange(256) / 256
    avg = np.mean(np.abs(rabi_at(t, p)) ** 2)
    assert avg == pytest.approx(100.0 * (1 + eta ** 2 / 2), rel=1e-13)


def test_relaxation_floor_positive(defaults):
    assert relaxation_rate_floor(defaults) > 0
    assert relaxation_rate_floor(EngineParams(gamma_eg=0, gamma_egp=0, omega_rabi=0,
                                              n_h=0, n_c=0)) == 1.0
