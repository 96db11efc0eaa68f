"""Closed-form steady state, gain, and a general harmonic-balance solver.

The closed forms (``x_factor``, ``populations_closed_form``,
``coherence_closed_form``, ``gain``) are first-harmonic expressions evaluated
exactly as written, with both sideband branches available. They are
deliberately not corrected; ``harmonic_balance_solve`` and the time-domain
integrator in :mod:`lambda_engine.dynamics` provide the exact numerics they
are compared against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special

from .errors import DegenerateParametersError, DomainError, SingularParametersError
from .params import EngineParams, dephasing_rates, rabi_at

G, GP, E = 0, 1, 2
_LEVEL_INDEX = {"g": G, "gp": GP, "g'": GP, "e": E}


def _idx(j):
    return _LEVEL_INDEX[j] if isinstance(j, str) else int(j)


def normalize_branch(branch) -> tuple[str, ...]:
    """Map user spellings to a tuple drawn from ("+", "-")."""
    table = {"+": ("+",), "plus": ("+",), "-": ("-",), "minus": ("-",),
             "both": ("+", "-"), "+-": ("+", "-"), "±": ("+", "-")}
    try:
        return table[branch]
    except KeyError:
        raise DomainError(f"unknown branch {branch!r}") from None


def _sign(branch) -> int:
    b = normalize_branch(branch)
    if len(b) != 1:
        raise DomainError("a single branch is required here")
    return 1 if b[0] == "+" else -1


@dataclass(frozen=True)
class FloquetComponents:
    """Harmonic amplitudes rho_{jk,l}, |l| <= l_max, with
    rho(t) = sum_l rho_l exp(-i l omega_m t)."""

    harmonics: np.ndarray          # (2*l_max+1, 3, 3), index l + l_max
    l_max: int
    omega_m: float
    reconstruction_error: float | None = None
    residual: float | None = None

    def __post_init__(self):
        h = np.array(self.harmonics, dtype=complex)
        if h.shape != (2 * self.l_max + 1, 3, 3):
            raise DomainError(f"harmonics shape {h.shape} does not match "
                              f"l_max={self.l_max}")
        h.setflags(write=False)
        object.__setattr__(self, "harmonics", h)

    def __getitem__(self, key) -> complex:
        j, k, l = key
        if abs(l) > self.l_max:
            return 0j
        return complex(self.harmonics[l + self.l_max, _idx(j), _idx(k)])

    def harmonic(self, l: int) -> np.ndarray:
        if abs(l) > self.l_max:
            return np.zeros((3, 3), dtype=complex)
        return self.harmonics[l + self.l_max]

    def as_dict(self) -> dict:
        names = ("g", "gp", "e")
        return {(names[j], names[k], l): self[j, k, l]
                for l in range(-self.l_max, self.l_max + 1)
                for j in range(3) for k in range(3)}

    @property
    def mean(self) -> np.ndarray:
        """Period-averaged density matrix (the l = 0 block)."""
        return self.harmonic(0)

    def populations0(self) -> tuple[float, float, float]:
        d = self.mean.diagonal().real
        return float(d[G]), float(d[GP]), float(d[E])

    def trace0(self) -> complex:
        return complex(np.trace(self.mean))

    def conjugate_symmetry_error(self) -> float:
        """max |rho_{jk,l} - conj(rho_{kj,-l})|."""
        h = self.harmonics
        mirrored = np.conj(np.swapaxes(h[::-1], 1, 2))
        return float(np.abs(h - mirrored).max())

    def evaluate(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ls = np.arange(-self.l_max, self.l_max + 1)
        phase = np.exp(-1j * np.outer(self.omega_m * t, ls))
        return np.einsum("nl,ljk->njk", phase, self.harmonics)

    def truncated(self, l_max: int) -> FloquetComponents:
        if l_max > self.l_max:
            raise DomainError("cannot extend truncation")
        c = self.l_max
        return FloquetComponents(self.harmonics[c - l_max:c + l_max + 1], l_max,
                                 self.omega_m)

    def max_delta(self, other: FloquetComponents, l_max: int | None = None) -> float:
        """Largest componentwise |difference| over |l| <= l_max."""
        if l_max is None:
            l_max = min(self.l_max, other.l_max)
        return float(max(np.abs(self.harmonic(l) - other.harmonic(l)).max()
                         for l in range(-l_max, l_max + 1)))


@dataclass(frozen=True)
class GainResult:
    """Complex gain per sideband branch; ``None`` where not computed."""

    plus: complex | None = None
    minus: complex | None = None

    def value(self, branch="+") -> complex:
        v = self.plus if _sign(branch) > 0 else self.minus
        if v is None:
            raise KeyError(f"branch {branch!r} not computed")
        return v

    def rate(self, branch="+") -> float:
        """Re G: amplification rate of the probe."""
        return self.value(branch).real

    def pull(self, branch="+") -> float:
        """Im G: frequency pull."""
        return self.value(branch).imag


class PopulationTriple(NamedTuple):
    gg: float
    ee: float
    gpgp: float

    @property
    def total(self) -> float:
        return self.gg + self.ee + self.gpgp


# --- closed forms -----------------------------------------------------------

def x_factor(p: EngineParams) -> float:
    """X = R_c + gamma_eg' (1 + eta/2) Omega^2 / (gamma_eg'^2 + 4 omega_m^2)."""
    gam = dephasing_rates(p)
    denom = gam.gamma_egp ** 2 + 4.0 * p.omega_m ** 2
    if denom == 0:
        if p.omega_rabi == 0:
            return p.r_c
        raise SingularParametersError("gamma_eg' and omega_m both vanish", p)
    return p.r_c + gam.gamma_egp * (1.0 + p.eta / 2.0) * p.omega_rabi ** 2 / denom


def populations_closed_form(p: EngineParams) -> PopulationTriple:
    """Probe-free rate-equation populations built on ``x_factor``."""
    x = x_factor(p)
    r_h = p.r_h
    denom = 3.0 * x * r_h + x * p.gamma_eg + r_h * p.gamma_egp
    if not denom > 0:
        raise DegenerateParametersError(
            "population denominator 3 X R_h + X Gamma_eg + R_h Gamma_eg' vanishes "
            "(no pumping)")
    return PopulationTriple(
        x * (p.gamma_eg + r_h) / denom,
        r_h * x / denom,
        (x * r_h + r_h * p.gamma_egp) / denom,
    )


NUMERATOR_READINGS = ("printed", "factored")


def _numerator_factor(p, pops, reading):
    diff = pops.ee - pops.gpgp
    if reading == "printed":
        return 1.0 + (p.eta / 2.0) * diff
    if reading == "factored":
        return (1.0 + p.eta / 2.0) * diff
    raise DomainError(f"numerator reading must be one of {NUMERATOR_READINGS}")


def _closed_form_parts(p, pops, sign, reading):
    gam = dephasing_rates(p)
    wm = sign * p.omega_m
    ggp_term = gam.gamma_ggp / 2.0 + 1j * wm
    egp_term = 4.0 * (gam.gamma_egp + 2j * wm)
    denom = -gam.gamma_eg / 2.0 * ggp_term - 0.25 * (1.0 + p.eta / 2.0) * p.omega_rabi ** 2
    if egp_term == 0 or denom == 0:
        raise SingularParametersError(
            f"closed-form denominator vanishes at {p!r}", p)
    factor = _numerator_factor(p, pops, reading)
    return ggp_term, egp_term, denom, factor


def coherence_closed_form(p: EngineParams, pops: PopulationTriple | None = None,
                          branch="+", numerator: str = "printed") -> complex:
    """Steady-state probe coherence rho~_eg for one sideband branch.

    ``numerator`` selects how the eta factor multiplying Omega^2 in the
    numerator is read: ``"printed"`` is 1 + (eta/2)(rho_ee - rho_g'g'),
    ``"factored"`` is (1 + eta/2)(rho_ee - rho_g'g').
    """
    if pops is None:
        pops = populations_closed_form(p)
    ggp_term, egp_term, denom, factor = _closed_form_parts(
        p, pops, _sign(branch), numerator)
    ga = p.g_pr * p.probe_amplitude
    num = (-0.5j * (pops.ee - pops.gg) * ggp_term * ga
           + 1j * factor * ga * p.omega_rabi ** 2 / egp_term)
    return -num / denom


def gain(p: EngineParams, branch="both", numerator: str = "printed") -> GainResult:
    """Closed-form complex gain G with da/dt = G a, per branch."""
    pops = populations_closed_form(p)
    out = {}
    g2 = p.g_pr ** 2
    for b in normalize_branch(branch):
        ggp_term, egp_term, denom, factor = _closed_form_parts(
            p, pops, 1 if b == "+" else -1, numerator)
        num = (0.5 * (pops.ee - pops.gg) * ggp_term * g2
               + (-factor * g2 * p.omega_rabi ** 2) / egp_term)
        out["plus" if b == "+" else "minus"] = -p.kappa / 2.0 - num / denom
    return GainResult(**out)


# --- harmonic balance -------------------------------------------------------

_I3 = np.eye(3)


def _sigma(j, k):
    m = np.zeros((3, 3), dtype=complex)
    m[j, k] = 1.0
    return m


def _commutator_super(v):
    # vec row-major: vec(A X B) = kron(A, B.T) vec(X)
    return -1j * (np.kron(v, _I3) - np.kron(_I3, v.T))


def _dissipator_super(jump, rate):
    jdj = jump.conj().T @ jump
    return rate * (np.kron(jump, jump.conj())
                   - 0.5 * np.kron(jdj, _I3) - 0.5 * np.kron(_I3, jdj.T))


def dissipator_superoperator(p: EngineParams) -> np.ndarray:
    """9x9 Lindblad dissipator of both thermal reservoirs."""
    return (_dissipator_super(_sigma(G, E), p.gamma_eg * (p.n_h + 1.0))
            + _dissipator_super(_sigma(E, G), p.gamma_eg * p.n_h)
            + _dissipator_super(_sigma(GP, E), p.gamma_egp * (p.n_c + 1.0))
            + _dissipator_super(_sigma(E, GP), p.gamma_egp * p.n_c))


def _hamiltonian(p, w, w_conj, with_probe):
    # Generator -i[V, rho]; W couples |g'><e|, W* couples |e><g'|
    v = w_conj * _sigma(E, GP) + w * _sigma(GP, E)
    if with_probe:
        a = p.probe_amplitude
        v = v + p.g_pr * a.conjugate() * _sigma(E, G) + p.g_pr * a * _sigma(G, E)
    return v


def drive_harmonics(p: EngineParams, cutoff: float = 1e-18) -> dict[int, complex]:
    """Fourier coefficients c_n of Omega_c(t) = sum_n c_n exp(-i n omega_m t)."""
    om, eta = p.omega_rabi, p.eta
    if eta == 0 or om == 0:
        return {0: complex(om)}
    if p.modulation == "linear":
        return {0: complex(om), 1: 0.5j * eta * om, -1: 0.5j * eta * om}
    out = {0: complex(om * special.jv(0, eta))}
    n = 1
    while n <= 60:
        jn = special.jv(n, eta)
        if abs(jn) < cutoff:
            break
        out[n] = om * (1j ** n) * jn
        out[-n] = om * (1j ** n) * jn
        n += 1
    return out


def generator_harmonics(p: EngineParams) -> dict[int, np.ndarray]:
    """Superoperator Fourier blocks L_n with L(t) = sum_n L_n exp(-i n w t)."""
    c = drive_harmonics(p)
    out = {}
    for n in c:
        w_n = c[n]
        wc_n = np.conj(c[-n]) if -n in c else 0j
        out[n] = _commutator_super(_hamiltonian(p, w_n, wc_n, n == 0))
    out[0] = out[0] + dissipator_superoperator(p)
    return out


def generator_at(p: EngineParams, t: float) -> np.ndarray:
    """Instantaneous 9x9 Lindblad generator at time ``t``."""
    w = rabi_at(t, p)
    return (_commutator_super(_hamiltonian(p, w, np.conj(w), True))
            + dissipator_superoperator(p))


_TRACE_ROWS = (0, 4, 8)


def _solve_with_trace(m, l0_offset):
    n = m.shape[0]
    full = m.copy()
    b = np.zeros(n, dtype=complex)
    row = l0_offset  # rho_gg equation of the l = 0 block
    m = m.copy()
    m[row, :] = 0.0
    for d in _TRACE_ROWS:
        m[row, l0_offset + d] = 1.0
    b[row] = 1.0
    try:
        x = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise DegenerateParametersError(f"singular steady-state system: {exc}") from None
    if not np.all(np.isfinite(x)):
        raise DegenerateParametersError("non-finite steady-state solution")
    scale = max(1.0, float(np.abs(full).max()))
    residual = max(float(np.abs(full @ x).max()),
                   abs(sum(x[l0_offset + d] for d in _TRACE_ROWS) - 1.0))
    # rank-deficient systems can slip through solve() with garbage output
    if residual > 1e-6 * scale:
        raise DegenerateParametersError(
            f"steady-state system is numerically singular (residual {residual:.2e})")
    return x, residual


def harmonic_balance_solve(p: EngineParams, l_max: int = 3) -> FloquetComponents:
    """Periodic steady state by harmonic balance truncated at |l| <= l_max.

    Substituting rho(t) = sum_l rho_l exp(-i l w t) into drho/dt = L(t) rho
    gives (L_0 + i l w) rho_l + sum_{n != 0} L_n rho_{l-n} = 0. Harmonics
    beyond l_max are dropped and the rho_gg row of the l = 0 block is
    replaced by Tr rho_0 = 1.
    """
    if l_max < 1:
        raise DomainError("l_max must be >= 1")
    if not p.omega_m > 0:
        raise DomainError("harmonic balance needs omega_m > 0; "
                          "use static_steady_state for a constant drive")
    gens = generator_harmonics(p)
    nb = 2 * l_max + 1
    m = np.zeros((9 * nb, 9 * nb), dtype=complex)
    for i, l in enumerate(range(-l_max, l_max + 1)):
        m[9 * i:9 * i + 9, 9 * i:9 * i + 9] += 1j * l * p.omega_m * np.eye(9)
        for n, block in gens.items():
            src = l - n
            if abs(src) <= l_max:
                jj = src + l_max
                m[9 * i:9 * i + 9, 9 * jj:9 * jj + 9] += block
    x, residual = _solve_with_trace(m, 9 * l_max)
    return FloquetComponents(x.reshape(nb, 3, 3), l_max, p.omega_m,
                             residual=residual)


def static_steady_state(p: EngineParams, t: float = 0.0) -> np.ndarray:
    """Stationary density matrix of the generator frozen at time ``t``."""
    x, _ = _solve_with_trace(generator_at(p, t), 0)
    return x.reshape(3, 3)


def steady_state_gain(comps: FloquetComponents | np.ndarray,
                      p: EngineParams) -> GainResult:
    """Gain read off an exact steady state: G = -kappa/2 + i g rho_ge,0 / a.

    The exact steady state has no sideband ambiguity, so both branches carry
    the same value.
    """
    a = p.probe_amplitude
    if a == 0:
        raise DomainError("probe amplitude must be nonzero to read a gain")
    mean = comps.mean if isinstance(comps, FloquetComponents) else np.asarray(comps)
    g_val = -p.kappa / 2.0 + 1j * p.g_pr * complex(mean[G, E]) / a
    return GainResult(g_val, g_val)


def compare_numerator_readings(p: EngineParams, l_max: int = 3,
                               branch="+") -> dict[str, complex]:
    """Both readings of the closed-form coherence next to the harmonic-balance
    rho_ge,0 they are meant to approximate."""
    pops = populations_closed_form(p)
    out = {r: coherence_closed_form(p, pops, branch, r) for r in NUMERATOR_READINGS}
    if p.omega_m > 0:
        out["harmonic_balance"] = harmonic_balance_solve(p, l_max)[G, E, 0]
    else:
        out["harmonic_balance"] = complex(static_steady_state(p)[G, E])
    return out
