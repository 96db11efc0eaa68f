"""Energy fluxes, first-law bookkeeping and engine efficiency.

Units: hbar = 1, so powers come out in rad/us * 1/us. ``ThermoFluxes.to_watts``
multiplies by hbar * 1e12 for SI.

Sign convention. With E = Tr(rho H0) and level energies 0, w_eg - w_eg',
w_eg for (g, g', e)::

    dE/dt = P_c - Qdot_out + Qdot_h - Qdot_c

where P_c is power absorbed from the control field, Qdot_c power dumped into
the cold bath, Qdot_out power emitted into the probe and Qdot_h power drawn
from the hot bath. Stationarity of rho_gg gives Qdot_out = Qdot_h and
stationarity of rho_g'g' gives P_c = Qdot_c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import DensityState, Trajectory, bloch_rhs
from .errors import UndefinedEfficiencyError
from .floquet import FloquetComponents, coherence_closed_form, populations_closed_form
from .params import HBAR, EngineParams, rabi_at

G, GP, E = 0, 1, 2

CSV_COLUMNS = ("n_h", "n_c", "eta", "omega_rabi", "omega_m", "kappa",
               "P_c", "Qdot_c", "Qdot_out", "Qdot_h", "residual", "efficiency")


def _probe(s, p):
    return p.probe_amplitude if s.probe is None else s.probe


def control_power(s: DensityState, p: EngineParams, t: float = 0.0) -> float:
    """P_c = i w_eg' (W rho_eg' - W* rho_g'e), W the instantaneous Rabi
    frequency."""
    w = rabi_at(t, p)
    val = 1j * p.omega_egp * (w * s.rho[E, GP] - np.conj(w) * s.rho[GP, E])
    return float(val.real)


def cold_flux(s: DensityState, p: EngineParams) -> float:
    """Qdot_c = w_eg' Gamma_eg' [(n_c + 1) rho_ee - n_c rho_g'g']."""
    r = s.rho.real
    return float(p.omega_egp * p.gamma_egp
                 * ((p.n_c + 1.0) * r[E, E] - p.n_c * r[GP, GP]))


def output_power(s: DensityState, p: EngineParams) -> float:
    """Qdot_out = i w_eg g_pr (rho_ge a* - rho_eg a); positive when the probe
    is amplified."""
    a = _probe(s, p)
    val = 1j * p.omega_eg * p.g_pr * (s.rho[G, E] * np.conj(a) - s.rho[E, G] * a)
    return float(val.real)


def hot_flux(s: DensityState, p: EngineParams) -> float:
    """Qdot_h = w_eg Gamma_eg [n_h rho_gg - (n_h + 1) rho_ee]."""
    r = s.rho.real
    return float(p.omega_eg * p.gamma_eg
                 * (p.n_h * r[G, G] - (p.n_h + 1.0) * r[E, E]))


def bare_hamiltonian(p: EngineParams) -> np.ndarray:
    return np.diag([0.0, p.omega_eg - p.omega_egp, p.omega_eg])


def energy_rate(s: DensityState, p: EngineParams, t: float = 0.0,
                mode: str = "fixed") -> float:
    """Tr(drho/dt H0) straight from the equations of motion."""
    rho_dot = bloch_rhs(s, t, p, mode).rho_dot
    return float(np.trace(rho_dot @ bare_hamiltonian(p)).real)


def flux_balance(s: DensityState, p: EngineParams, t: float = 0.0) -> float:
    """P_c - Qdot_out + Qdot_h - Qdot_c."""
    return (control_power(s, p, t) - output_power(s, p) + hot_flux(s, p)
            - cold_flux(s, p))


def first_law_residual(s: DensityState, p: EngineParams, t: float = 0.0,
                       mode: str = "fixed") -> float:
    """dE/dt evaluated directly; zero at a stationary state.

    Also evaluates the flux combination and raises if the two disagree,
    which would mean a flux formula is out of step with the dynamics.
    """
    direct = energy_rate(s, p, t, mode)
    combined = flux_balance(s, p, t)
    scale = max(abs(control_power(s, p, t)), abs(hot_flux(s, p)),
                abs(cold_flux(s, p)), abs(output_power(s, p)), 1e-300)
    if abs(direct - combined) > 1e-9 * scale:
        raise RuntimeError(f"energy balance mismatch: direct {direct!r} vs "
                           f"fluxes {combined!r}")
    return direct


@dataclass(frozen=True)
class ThermoFluxes:
    P_c: float
    Qdot_c: float
    Qdot_out: float
    Qdot_h: float
    Edot_residual: float

    @property
    def efficiency(self) -> float:
        """Qdot_out / (Qdot_h + P_c), NaN where undefined."""
        try:
            return efficiency(self)
        except UndefinedEfficiencyError:
            return math.nan

    @property
    def scale(self) -> float:
        return max(abs(self.Qdot_h), abs(self.P_c), 1e-300)

    @property
    def output_gap(self) -> float:
        return self.Qdot_out - self.Qdot_h

    @property
    def control_gap(self) -> float:
        return self.P_c - self.Qdot_c

    def identities_hold(self, rtol: float = 1e-8) -> bool:
        s = self.scale
        return (abs(self.output_gap) <= rtol * s and abs(self.control_gap) <= rtol * s
                and abs(self.Edot_residual) <= rtol * s)

    def to_watts(self) -> ThermoFluxes:
        k = HBAR * 1e12
        return ThermoFluxes(self.P_c * k, self.Qdot_c * k, self.Qdot_out * k,
                            self.Qdot_h * k, self.Edot_residual * k)

    def csv_row(self, p: EngineParams) -> list[float]:
        return [p.n_h, p.n_c, p.eta, p.omega_rabi, p.omega_m, p.kappa,
                self.P_c, self.Qdot_c, self.Qdot_out, self.Qdot_h,
                self.Edot_residual, self.efficiency]


def efficiency(f: ThermoFluxes) -> float:
    """e = Qdot_out / (Qdot_h + P_c)."""
    den = f.Qdot_h + f.P_c
    if den == 0 or abs(den) <= 1e-13 * (abs(f.Qdot_h) + abs(f.P_c)):
        raise UndefinedEfficiencyError("Qdot_h + P_c vanishes")
    return f.Qdot_out / den


def state_fluxes(s: DensityState, p: EngineParams, t: float = 0.0,
                 mode: str = "fixed") -> ThermoFluxes:
    """Instantaneous fluxes of a single state."""
    return ThermoFluxes(control_power(s, p, t), cold_flux(s, p),
                        output_power(s, p), hot_flux(s, p),
                        energy_rate(s, p, t, mode))


def _averaged(states, times, p, probes=None):
    acc = np.zeros(5)
    for i, t in enumerate(times):
        s = DensityState(states[i], None if probes is None else probes[i])
        f = state_fluxes(s, p, t, "fixed" if probes is None else "coupled")
        acc += (f.P_c, f.Qdot_c, f.Qdot_out, f.Qdot_h, f.Edot_residual)
    return ThermoFluxes(*(acc / len(times)))


def orbit_fluxes(orbit: Trajectory, p: EngineParams) -> ThermoFluxes:
    """One-period averages over a uniformly sampled periodic orbit.

    A static orbit (``period is None``) is reduced to its final state.
    """
    if orbit.period is None:
        last = orbit.final
        mode = "fixed" if last.probe is None else "coupled"
        return state_fluxes(last, p, orbit.times[-1], mode)
    times, states = orbit.times, orbit.states
    probes = orbit.probe
    if math.isclose(times[-1] - times[0], orbit.period, rel_tol=1e-9):
        times, states = times[:-1], states[:-1]
        probes = None if probes is None else probes[:-1]
    return _averaged(states, times, p, probes)


def floquet_fluxes(comps: FloquetComponents, p: EngineParams,
                   samples: int | None = None) -> ThermoFluxes:
    """One-period averages of the fluxes of a harmonic-balance solution."""
    if samples is None:
        samples = 256 if p.modulation == "exact" else max(64, 8 * (comps.l_max + 2))
    period = 2.0 * math.pi / comps.omega_m
    times = period * np.arange(samples) / samples
    return _averaged(comps.evaluate(times), times, p)


def static_fluxes(rho: np.ndarray, p: EngineParams) -> ThermoFluxes:
    return state_fluxes(DensityState(rho), p, 0.0)


def closed_form_fluxes(p: EngineParams, branch="+") -> ThermoFluxes:
    """Fluxes assembled from the closed-form populations and coherence.

    The closed forms give no control coherence, so P_c is taken equal to
    Qdot_c. Qdot_out uses the closed-form probe coherence; Qdot_h uses the
    probe-free populations and therefore vanishes, so the reported residual
    measures how far the closed forms are from a consistent steady state.
    """
    pops = populations_closed_form(p)
    rho_ge = coherence_closed_form(p, pops, branch)
    rho = np.diag([pops.gg, pops.gpgp, pops.ee]).astype(complex)
    rho[G, E] = rho_ge
    rho[E, G] = np.conj(rho_ge)
    s = DensityState(rho)
    q_c = cold_flux(s, p)
    q_out = output_power(s, p)
    q_h = hot_flux(s, p)
    p_c = q_c
    return ThermoFluxes(p_c, q_c, q_out, q_h, p_c - q_out + q_h - q_c)
