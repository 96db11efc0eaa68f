"""Time-domain oracle: Bloch/Lindblad integration, stroboscopic steady
states and Fourier harmonics of periodic orbits.

Basis order is (|g>, |g'>, |e>). Only rho_gg, rho_g'g', rho_gg', rho_ge and
rho_g'e are evolved from their own equations; rho_ee follows from trace
conservation and the lower triangle from Hermiticity, so the stored density
matrix is Hermitian by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernel
from .errors import ConvergenceError, DomainError, ResolutionError, StiffnessError
from .floquet import FloquetComponents
from .params import EngineParams, dephasing_rates, relaxation_rate_floor

G, GP, E = 0, 1, 2
LEVELS = ("g", "gp", "e")
PROBE_MODES = ("fixed", "coupled")

DEFAULT_TOL = 1e-10
STEADY_THRESHOLD = 1e-11


def pack_params(p: EngineParams) -> np.ndarray:
    """Flatten parameters into the kernel's NPAR-vector layout."""
    gam = dephasing_rates(p)
    a = p.probe_amplitude
    return np.array([
        p.gamma_eg, p.gamma_egp, p.omega_rabi, p.omega_m, p.eta, p.kappa,
        p.g_pr, p.n_h, p.n_c, a.real, a.imag,
        0.0 if p.modulation == "linear" else 1.0,
        gam.gamma_eg, gam.gamma_egp, gam.gamma_ggp,
    ])


def _check_mode(mode):
    if mode not in PROBE_MODES:
        raise DomainError(f"probe mode must be one of {PROBE_MODES}, got {mode!r}")
    return 1 if mode == "coupled" else 0


@dataclass(frozen=True)
class DensityState:
    """3x3 density matrix over (|g>, |g'>, |e>) plus optional probe amplitude."""

    rho: np.ndarray
    probe: complex | None = None

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (3, 3):
            raise DomainError(f"rho must be 3x3, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        if self.probe is not None:
            object.__setattr__(self, "probe", complex(self.probe))

    @classmethod
    def from_vector(cls, y, coupled=False) -> DensityState:
        y = np.asarray(y, dtype=float)
        rggp = complex(y[3], y[4])
        rge = complex(y[5], y[6])
        rgpe = complex(y[7], y[8])
        rho = np.array([
            [y[0], rggp, rge],
            [rggp.conjugate(), y[1], rgpe],
            [rge.conjugate(), rgpe.conjugate(), y[2]],
        ], dtype=complex)
        return cls(rho, complex(y[9], y[10]) if coupled else None)

    def to_vector(self, probe=None) -> np.ndarray:
        r = self.rho
        a = self.probe if probe is None else complex(probe)
        if a is None:
            a = 0j
        return np.array([
            r[G, G].real, r[GP, GP].real, r[E, E].real,
            r[G, GP].real, r[G, GP].imag, r[G, E].real, r[G, E].imag,
            r[GP, E].real, r[GP, E].imag, a.real, a.imag,
        ])

    @classmethod
    def ground(cls, level=G, probe=None) -> DensityState:
        rho = np.zeros((3, 3), dtype=complex)
        rho[level, level] = 1.0
        return cls(rho, probe)

    @classmethod
    def maximally_mixed(cls, probe=None) -> DensityState:
        return cls(np.eye(3, dtype=complex) / 3.0, probe)

    @property
    def populations(self) -> tuple[float, float, float]:
        """(rho_gg, rho_g'g', rho_ee)."""
        d = self.rho.diagonal().real
        return float(d[G]), float(d[GP]), float(d[E])

    def element(self, j: str, k: str) -> complex:
        return complex(self.rho[LEVELS.index(j), LEVELS.index(k)])

    def trace_deviation(self) -> float:
        return abs(complex(np.trace(self.rho)) - 1.0)

    def hermiticity_error(self) -> float:
        return float(np.abs(self.rho - self.rho.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])


class StateDerivative(NamedTuple):
    rho_dot: np.ndarray
    probe_dot: complex


def bloch_rhs(s: DensityState, t: float, p: EngineParams,
              mode: str = "fixed") -> StateDerivative:
    """Time derivative of the density matrix (and probe amplitude).

    In ``"fixed"`` mode the probe is the constant ``p.probe_amplitude`` and
    ``probe_dot`` is 0. In ``"coupled"`` mode the probe is read from
    ``s.probe`` (falling back to ``p.probe_amplitude``) and evolves as
    da/dt = -kappa/2 a + i g_pr rho_ge.
    """
    coupled = _check_mode(mode)
    probe = s.probe if (coupled and s.probe is not None) else p.probe_amplitude
    dy = kernel.rhs(float(t), s.to_vector(probe), pack_params(p), coupled)
    d = DensityState.from_vector(dy, coupled=True)
    return StateDerivative(np.array(d.rho), d.probe if coupled else 0j)


@dataclass
class Trajectory:
    """Time-ordered density-matrix samples with integrator diagnostics."""

    times: np.ndarray
    states: np.ndarray                 # (N, 3, 3) complex
    probe: np.ndarray | None = None    # (N,) complex, coupled mode only
    error_estimates: np.ndarray | None = None
    stats: dict = field(default_factory=dict)
    period: float | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or len(self.times) != len(self.states):
            raise ValueError("times and states must have matching length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> DensityState:
        probe = None if self.probe is None else self.probe[i]
        return DensityState(self.states[i], probe)

    @property
    def final(self) -> DensityState:
        return self.state(-1)

    def trace_deviation(self) -> np.ndarray:
        return np.abs(np.trace(self.states, axis1=1, axis2=2) - 1.0)

    def hermiticity_error(self) -> np.ndarray:
        herm = self.states - np.conj(np.swapaxes(self.states, 1, 2))
        return np.abs(herm).reshape(len(self), -1).max(axis=1)

    def min_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.states)[:, 0]

    def to_csv(self, path) -> None:
        """Write t, Re/Im of all nine rho_jk and Re/Im a."""
        header = ["t"]
        for j in LEVELS:
            for k in LEVELS:
                header += [f"re_rho_{j}_{k}", f"im_rho_{j}_{k}"]
        header += ["re_a", "im_a"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i, t in enumerate(self.times):
                row = [repr(float(t))]
                for v in self.states[i].ravel():
                    row += [repr(float(v.real)), repr(float(v.imag))]
                a = 0j if self.probe is None else complex(self.probe[i])
                row += [repr(a.real), repr(a.imag)]
                w.writerow(row)


def _vectors_to_states(Y):
    Y = np.asarray(Y)
    n = len(Y)
    rho = np.empty((n, 3, 3), dtype=complex)
    rggp = Y[:, 3] + 1j * Y[:, 4]
    rge = Y[:, 5] + 1j * Y[:, 6]
    rgpe = Y[:, 7] + 1j * Y[:, 8]
    rho[:, G, G] = Y[:, 0]
    rho[:, GP, GP] = Y[:, 1]
    rho[:, E, E] = Y[:, 2]
    rho[:, G, GP] = rggp
    rho[:, GP, G] = rggp.conj()
    rho[:, G, E] = rge
    rho[:, E, G] = rge.conj()
    rho[:, GP, E] = rgpe
    rho[:, E, GP] = rgpe.conj()
    return rho, Y[:, 9] + 1j * Y[:, 10]


def _run(y0, t_eval, par, coupled, tol, h0=-1.0, max_steps=10_000_000,
         record=False):
    y_eval, rec_t, rec_y, rec_e, stats = kernel.integrate(
        np.ascontiguousarray(y0, dtype=float),
        np.ascontiguousarray(t_eval, dtype=float),
        par, coupled, tol, tol, h0, max_steps, record)
    if stats["status"] == 1:
        raise StiffnessError(
            f"step size underflow at t={stats['t_final']:.6g} "
            f"(h={stats['h_nominal']:.3g}, {stats['n_accepted']} accepted, "
            f"{stats['n_rejected']} rejected steps)",
            t=stats["t_final"], h=stats["h_nominal"], steps=stats["n_accepted"])
    if stats["status"] == 2:
        raise StiffnessError(
            f"step budget of {max_steps} exhausted at t={stats['t_final']:.6g}",
            t=stats["t_final"], h=stats["h_nominal"], steps=stats["n_accepted"])
    return y_eval, rec_t, rec_y, rec_e, stats


def evolve(s0: DensityState, span, p: EngineParams, tol: float = DEFAULT_TOL,
           *, mode: str = "fixed", t_eval=None,
           max_steps: int = 10_000_000) -> Trajectory:
    """Adaptive Dormand-Prince integration of the Bloch equations.

    Without ``t_eval`` every accepted step is recorded, along with its scaled
    local error estimate (<= 1 means within ``tol`` absolute plus relative).
    With ``t_eval`` the trajectory holds exactly those sample times, each hit
    without interpolation.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise DomainError(f"tol must lie in [1e-13, 1e-6], got {tol!r}")
    coupled = _check_mode(mode)
    t0, t1 = (float(v) for v in span)
    if not t1 >= t0:
        raise DomainError(f"span must be increasing, got {span!r}")
    probe = s0.probe if (coupled and s0.probe is not None) else p.probe_amplitude
    y0 = s0.to_vector(probe)
    par = pack_params(p)
    if t_eval is None:
        y_eval, times, Y, errs, stats = _run(y0, [t0, t1], par, coupled, tol,
                                             max_steps=max_steps, record=True)
    else:
        times = np.asarray(t_eval, dtype=float)
        if times[0] != t0 or times[-1] != t1:
            raise DomainError("t_eval must start and end on the span")
        Y, _, _, _, stats = _run(y0, times, par, coupled, tol,
                                 max_steps=max_steps)
        errs = None
    rho, a = _vectors_to_states(Y)
    return Trajectory(times, rho, a if coupled else None, errs, stats)


def _grid(t0, t1, p):
    """Sample times from t0 to t1 no further apart than 1/(fastest rate).

    Every sample is hit exactly, so this caps the step size. Without the cap a
    nearly stationary solution lets DOPRI5 grow its step to the edge of the
    stability region, where accept/reject flips make the chunk map jitter at
    the tolerance level and the fixed-point iteration never settles.
    """
    gam = dephasing_rates(p)
    fast = max(gam.gamma_eg, gam.gamma_egp, 2.0 * p.omega_rabi * (1.0 + p.eta),
               p.kappa, p.g_pr, 1.0)
    n = int(math.ceil((t1 - t0) * fast)) + 1
    return np.linspace(t0, t1, max(n, 2))


def _static_steady_state(p, tol, threshold, t_max, samples, mode, s0):
    coupled = _check_mode(mode)
    par = pack_params(p)
    rate = relaxation_rate_floor(p)
    chunk = 1.0 / rate
    s = s0 if s0 is not None else DensityState.maximally_mixed()
    probe = s.probe if (coupled and s.probe is not None) else p.probe_amplitude
    y = s.to_vector(probe)
    t = 0.0
    steps = 0
    while True:
        yend, _, _, _, stats = _run(y, _grid(t, t + chunk, p), par, coupled, tol)
        steps += stats["n_accepted"]
        delta = float(np.abs(yend[-1] - y).max())
        y = yend[-1]
        t += chunk
        if delta < threshold:
            break
        if t >= t_max:
            raise ConvergenceError(
                f"no stationary state by t_max={t_max:.4g}; "
                f"last chunk delta={delta:.3e}", last_delta=delta, t=t)
    times = t + np.linspace(0.0, chunk, samples + 1)
    Y, _, _, _, _ = _run(y, times, par, coupled, tol)
    rho, a = _vectors_to_states(Y)
    return Trajectory(times, rho, a if coupled else None,
                      stats={"t_start": t, "n_accepted": steps,
                             "last_delta": delta, "criterion": "chunk"})


def stroboscopic_steady_state(p: EngineParams, tol: float = DEFAULT_TOL, *,
                              threshold: float = STEADY_THRESHOLD,
                              t_max: float | None = None, samples: int = 128,
                              mode: str = "fixed",
                              s0: DensityState | None = None) -> Trajectory:
    """Integrate period by period until the stroboscopic map converges.

    Starting from the maximally mixed state (or ``s0``) at t = 0, the state
    is sampled every mirror period T = 2*pi/omega_m until two successive
    samples differ by less than ``threshold`` in max-norm. The returned
    trajectory covers the next full period with ``samples + 1`` uniformly
    spaced points (both endpoints included) and has ``period`` set.

    For ``omega_m == 0`` the drive is constant; the same test is applied to
    chunks of length 1/rate (slowest relaxation rate) and the returned
    trajectory has ``period = None``.
    """
    if not 1e-13 <= tol <= 1e-6:
        raise DomainError(f"tol must lie in [1e-13, 1e-6], got {tol!r}")
    if t_max is None:
        t_max = 200.0 / relaxation_rate_floor(p)
    if samples < 2:
        raise DomainError("samples must be >= 2")
    if p.omega_m == 0:
        return _static_steady_state(p, tol, threshold, t_max, samples, mode, s0)

    coupled = _check_mode(mode)
    par = pack_params(p)
    period = p.mirror_period
    s = s0 if s0 is not None else DensityState.maximally_mixed()
    probe = s.probe if (coupled and s.probe is not None) else p.probe_amplitude
    y = s.to_vector(probe)
    k = 0
    steps = 0
    while True:
        yend, _, _, _, stats = _run(y, _grid(k * period, (k + 1) * period, p),
                                    par, coupled, tol)
        steps += stats["n_accepted"]
        delta = float(np.abs(yend[-1] - y).max())
        y = yend[-1]
        k += 1
        if delta < threshold:
            break
        if k * period >= t_max:
            raise ConvergenceError(
                f"stroboscopic map not converged by t_max={t_max:.4g} "
                f"after {k} periods; last delta={delta:.3e}",
                last_delta=delta, t=k * period)
    t0 = k * period
    times = t0 + period * np.arange(samples + 1) / samples
    Y, _, _, _, stats = _run(y, times, par, coupled, tol)
    rho, a = _vectors_to_states(Y)
    return Trajectory(times, rho, a if coupled else None, period=period,
                      stats={"t_start": t0, "periods": k, "last_delta": delta,
                             "n_accepted": steps + stats["n_accepted"],
                             "criterion": "stroboscopic"})


def extract_harmonics(orbit: Trajectory, l_max: int,
                      omega_m: float | None = None) -> FloquetComponents:
    """Fourier amplitudes rho_{jk,l} = (1/T) int rho_jk(t) exp(+i l w t) dt.

    The orbit must cover exactly one period on a uniform grid (a duplicated
    endpoint is dropped). Quadrature is the periodic trapezoid rule, i.e. a
    DFT, which is exact for harmonics below the Nyquist limit.
    """
    if l_max < 0:
        raise DomainError("l_max must be >= 0")
    period = orbit.period
    if omega_m is not None:
        period = 2.0 * math.pi / omega_m
    if period is None:
        raise ResolutionError("orbit has no period; pass omega_m")
    t = orbit.times
    rho = orbit.states
    if len(t) >= 2 and math.isclose(t[-1] - t[0], period, rel_tol=1e-9):
        t, rho = t[:-1], rho[:-1]
    n = len(t)
    if n < 64:
        raise ResolutionError(f"need >= 64 samples per period, got {n}")
    if 2 * l_max + 1 > n:
        raise ResolutionError(f"{n} samples cannot resolve l_max={l_max}")
    dt = period / n
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=0.0):
        raise ResolutionError("orbit samples must be uniform over one period")
    w = 2.0 * math.pi / period
    ls = np.arange(-l_max, l_max + 1)
    phase = np.exp(1j * np.outer(ls, w * t))            # (L, N)
    comps = np.einsum("ln,njk->ljk", phase, rho) / n
    recon = np.einsum("ln,ljk->njk", phase.conj(), comps)
    err = float(np.abs(recon - rho).max())
    return FloquetComponents(comps, l_max, 2.0 * math.pi / period,
                             reconstruction_error=err)
