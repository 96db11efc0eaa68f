"""Engine parameters, reservoir occupations, dephasing and the modulated drive.

Rates (decays, Rabi frequencies, mirror frequency, leakage) are carried in
the MHz convention with time in microseconds and are treated as mutually
consistent angular rates. Optical transition frequencies ``omega_eg`` and
``omega_egp`` use the same rad/us units; they only enter energy fluxes.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

import numpy as np
from scipy import constants

from .errors import DomainError

HBAR = constants.hbar
K_B = constants.k

#: Rb D1 line, 377.107 THz, expressed in rad/us.
RB87_D1_OMEGA = 2.0 * math.pi * 377.107463e6
#: 87Rb ground-state hyperfine splitting, 6.834682 GHz, in rad/us.
RB87_HFS_OMEGA = 2.0 * math.pi * 6834.682611
#: Natural decay rate on both Lambda legs (MHz).
RB87_D1_GAMMA = 5.7

MODULATION_MODES = ("linear", "exact")


@dataclass(frozen=True)
class EngineParams:
    """One engine configuration.

    Attributes
    ----------
    gamma_eg, gamma_egp : float
        Spontaneous decay rates on |e> -> |g> (hot leg) and |e> -> |g'>
        (cold leg), MHz.
    omega_rabi : float
        Control-field Rabi frequency, MHz, real and non-negative.
    omega_m : float
        Nanomirror vibration frequency, MHz.
    eta : float
        Atom-mirror coupling ``k_c * z0`` (dimensionless modulation depth).
    kappa : float
        Probe leakage rate, MHz.
    g_pr : float
        Vacuum Rabi frequency of the probe transition, MHz.
    n_h, n_c : float
        Hot and cold reservoir photon occupations.
    omega_eg, omega_egp : float
        Optical transition frequencies (rad/us); only used by energy fluxes.
    probe_amplitude : complex
        Semiclassical probe amplitude.
    modulation : {"linear", "exact"}
        ``"linear"`` uses Omega*(1 + i*eta*cos(w_m t)); ``"exact"`` uses
        Omega*exp(i*eta*cos(w_m t)) for convergence studies.
    """

    gamma_eg: float = RB87_D1_GAMMA
    gamma_egp: float = RB87_D1_GAMMA
    omega_rabi: float = 10.0
    omega_m: float = 2.0
    eta: float = 0.1
    kappa: float = 0.0
    g_pr: float = 0.1
    n_h: float = 0.1
    n_c: float = 0.05
    omega_eg: float = RB87_D1_OMEGA
    omega_egp: float = RB87_D1_OMEGA - RB87_HFS_OMEGA
    probe_amplitude: complex = 1.0 + 0.0j
    modulation: str = "linear"

    def __post_init__(self):
        for name in ("gamma_eg", "gamma_egp", "omega_rabi", "omega_m", "eta",
                     "kappa", "g_pr", "n_h", "n_c", "omega_eg", "omega_egp"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TypeError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            if value < 0:
                raise DomainError(f"{name} must be >= 0, got {value!r}")
            object.__setattr__(self, name, float(value))
        a = complex(self.probe_amplitude)
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise DomainError(f"probe_amplitude must be finite, got {a!r}")
        object.__setattr__(self, "probe_amplitude", a)
        if not self.omega_eg > self.omega_egp > 0:
            raise DomainError(
                "Lambda ordering requires omega_eg > omega_egp > 0, got "
                f"{self.omega_eg!r}, {self.omega_egp!r}")
        if self.modulation not in MODULATION_MODES:
            raise DomainError(f"modulation must be one of {MODULATION_MODES}, "
                              f"got {self.modulation!r}")

    @property
    def weak_modulation_ok(self) -> bool:
        """False when eta > 1, outside the small k_c*z_m regime."""
        return self.eta <= 1.0

    @property
    def r_h(self) -> float:
        """Hot pumping rate Gamma_eg * n_h."""
        return self.gamma_eg * self.n_h

    @property
    def r_c(self) -> float:
        """Cold pumping rate Gamma_eg' * n_c."""
        return self.gamma_egp * self.n_c

    @property
    def mirror_period(self) -> float:
        if self.omega_m == 0:
            return math.inf
        return 2.0 * math.pi / self.omega_m

    def replace(self, **changes) -> EngineParams:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class ReservoirSpec:
    """A blackbody reservoir: temperature (K) and transition frequency (rad/s)."""

    temperature: float
    transition_frequency: float

    def __post_init__(self):
        if self.temperature < 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature!r}")
        if self.transition_frequency <= 0:
            raise DomainError("transition_frequency must be > 0, got "
                              f"{self.transition_frequency!r}")


def bose_occupation(r: ReservoirSpec) -> float:
    """Mean thermal photon number 1/(exp(hbar*w/(k_B*T)) - 1).

    Returns exactly 0 at T = 0.
    """
    if r.temperature < 0:
        raise DomainError("negative temperature")
    if r.transition_frequency <= 0:
        raise DomainError("transition frequency must be positive")
    if r.temperature == 0:
        return 0.0
    x = HBAR * r.transition_frequency / (K_B * r.temperature)
    # expm1 keeps precision for x << 1; large x underflows cleanly to 0
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def occupation_to_temperature(n: float, omega: float) -> float:
    """Temperature (K) at which a mode of angular frequency ``omega`` (rad/s)
    holds ``n`` thermal photons."""
    if not n > 0:
        raise DomainError(f"occupation must be > 0, got {n!r}")
    if not omega > 0:
        raise DomainError(f"frequency must be > 0, got {omega!r}")
    return HBAR * omega / (K_B * math.log1p(1.0 / n))


class DephasingRates(NamedTuple):
    gamma_eg: float
    gamma_egp: float
    gamma_ggp: float


def dephasing_rates(p: EngineParams) -> DephasingRates:
    """Coherence decay rates (gamma_eg, gamma_eg', gamma_gg') of the Lindblad
    dissipators."""
    hot_down = p.gamma_eg * (p.n_h + 1.0)
    hot_up = p.gamma_eg * p.n_h
    cold_down = p.gamma_egp * (p.n_c + 1.0)
    cold_up = p.gamma_egp * p.n_c
    return DephasingRates(
        (hot_down + hot_up + cold_down) / 2.0,
        (cold_down + cold_up + hot_down) / 2.0,
        (hot_up + cold_up) / 2.0,
    )


def rabi_at(t, p: EngineParams):
    """Mirror-modulated control Rabi frequency at time ``t``.

    Works elementwise on arrays.
    """
    phase = p.eta * np.cos(p.omega_m * np.asarray(t, dtype=float))
    if p.modulation == "exact":
        out = p.omega_rabi * np.exp(1j * phase)
    else:
        out = p.omega_rabi * (1.0 + 1j * phase)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def relaxation_rate_floor(p: EngineParams) -> float:
    """Smallest nonzero relaxation-type rate; sets default integration horizons."""
    gam = dephasing_rates(p)
    candidates = [p.gamma_eg, p.gamma_egp, p.r_h, p.r_c, gam.gamma_ggp]
    if gam.gamma_egp > 0:
        candidates.append(2.0 * p.omega_rabi ** 2 / gam.gamma_egp)
    nonzero = [c for c in candidates if c > 0]
    if not nonzero:
        return 1.0
    return min(nonzero)
