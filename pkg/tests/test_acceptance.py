"""Acceptance criteria A1-A7.

Each test prints one ``A<n> PASS|FAIL: ...`` line to the terminal (capture is
bypassed) and then asserts. Run directly with ``python tests/test_acceptance.py``
for the summary lines alone.
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from lambda_engine.dynamics import DensityState, evolve, extract_harmonics, \
    stroboscopic_steady_state
from lambda_engine.floquet import harmonic_balance_solve, populations_closed_form
from lambda_engine.params import EngineParams
from lambda_engine.sweep import (evaluate_point, identity_residual, run_preset,
                                 zero_crossing)

pytestmark = pytest.mark.acceptance

_RESULTS = {}


def _report(tag, ok, detail, capsys=None):
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    _RESULTS[tag] = line
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)


# --- A1 ---------------------------------------------------------------------

def _random_params(rng):
    return EngineParams(
        gamma_eg=rng.uniform(0.5, 10), gamma_egp=rng.uniform(0.5, 10),
        omega_rabi=rng.uniform(0, 30), omega_m=rng.uniform(0, 5),
        eta=rng.uniform(0, 1), kappa=rng.uniform(0, 10), g_pr=rng.uniform(0, 1),
        n_h=rng.uniform(0, 0.5), n_c=rng.uniform(0, 0.5),
        probe_amplitude=complex(rng.normal(), rng.normal()),
        modulation=("linear", "exact")[rng.integers(2)])


def _random_state(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    rho = m @ m.conj().T
    return DensityState(rho / np.trace(rho).real)


def run_a1(n=200, seed=2024):
    rng = np.random.default_rng(seed)
    t0 = time.perf_counter()
    worst = [0.0, 0.0, np.inf]
    for k in range(n):
        p = _random_params(rng)
        mode = "coupled" if k % 2 else "fixed"
        tr = evolve(_random_state(rng), (0.0, 10.0), p, 1e-10, mode=mode)
        worst[0] = max(worst[0], float(tr.trace_deviation().max()))
        worst[1] = max(worst[1], float(tr.hermiticity_error().max()))
        worst[2] = min(worst[2], float(tr.min_eigenvalues().min()))
    elapsed = time.perf_counter() - t0
    ok = worst[0] <= 1e-9 and worst[1] <= 1e-12 and worst[2] >= -1e-8 and elapsed <= 60
    detail = (f"{n} trajectories, max trace dev {worst[0]:.2e}, max herm err "
              f"{worst[1]:.2e}, min eig {worst[2]:.2e}, {elapsed:.1f} s")
    return ok, detail


def test_a1_physicality(capsys):
    ok, detail = run_a1()
    _report("A1", ok, detail, capsys)
    assert ok, detail


# --- A2 ---------------------------------------------------------------------

def run_a2():
    t0 = time.perf_counter()
    worst = {}
    for eta in (0.01, 0.1, 0.5):
        for om in (5.0, 10.0, 20.0):
            for nh in (0.02, 0.05, 0.1):
                p = EngineParams(eta=eta, omega_rabi=om, n_h=nh, n_c=0.05, omega_m=2.0,
                                 gamma_eg=5.7, gamma_egp=5.7)
                hb = harmonic_balance_solve(p, 3)
                td = extract_harmonics(stroboscopic_steady_state(p, 1e-11), 3)
                worst[eta] = max(worst.get(eta, 0.0), hb.max_delta(td, 3))
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-6 and elapsed <= 120
    per = ", ".join(f"eta={k}: {v:.2e}" for k, v in worst.items())
    return ok, f"27 points, max component delta by eta [{per}] (tol 1e-6), {elapsed:.1f} s"


def test_a2_cross_solver(capsys):
    ok, detail = run_a2()
    _report("A2", ok, detail, capsys)
    assert ok, detail


# --- A3 ---------------------------------------------------------------------

def _pop_delta(p):
    closed = populations_closed_form(p)
    ode = np.array(evaluate_point(p, "ode", tol=1e-11).populations)
    c = np.array([closed.gg, closed.gpgp, closed.ee])
    return float(np.max(np.abs(c - ode) / np.abs(ode)))


def run_a3():
    rabis = (0.1, 0.25, 0.5, 1.0)
    static = {om: _pop_delta(EngineParams(omega_m=0, eta=0, omega_rabi=om, g_pr=0))
              for om in rabis}
    modulated = {om: _pop_delta(EngineParams(omega_m=2, eta=0, omega_rabi=om, g_pr=0))
                 for om in rabis}
    ok = max(static.values()) <= 0.05
    fmt = lambda d: ", ".join(f"Omega={k}: {v:.2%}" for k, v in d.items())
    return ok, (f"closed vs ODE rel delta at w_m=0 [{fmt(static)}] (tol 5%); "
                f"reported at w_m=2, eta=0 [{fmt(modulated)}]")


def test_a3_closed_form(capsys):
    ok, detail = run_a3()
    _report("A3", ok, detail, capsys)
    assert ok, detail


# --- A4 ---------------------------------------------------------------------

def run_a4():
    worst = {}
    for solver in ("hb", "ode"):
        _, recs = run_preset("figure4", solver=solver)
        assert all(r.ok for r in recs)
        worst[solver] = max(identity_residual(r.fluxes) for r in recs)
    ok = max(worst.values()) <= 1e-8
    return ok, ("figure4 grid (99 points), max first-law residual "
                + ", ".join(f"{k}: {v:.2e}" for k, v in worst.items()) + " (tol 1e-8)")


def test_a4_first_law(capsys):
    ok, detail = run_a4()
    _report("A4", ok, detail, capsys)
    assert ok, detail


# --- A5 ---------------------------------------------------------------------

def _curves(name, solver):
    specs, recs = run_preset(name, solver=solver)
    q = specs[0].quantity
    y = np.array([r.quantity(q) for r in recs])
    x = np.array(specs[0].values)
    return x, y.reshape(-1, len(x))


def _increasing(x, Y):
    return all(np.all(np.diff(y) > 0) for y in Y)


def _ordered(x, Y):
    return all(np.all(Y[i] >= Y[i + 1]) for i in range(len(Y) - 1))


def _slope_exact(x, Y):
    return all(np.max(np.abs(np.diff(y) / np.diff(x) + 0.5)) <= 1e-9 for y in Y)


def _kstar_nonincreasing(x, Y):
    ks = [zero_crossing(x, y) for y in Y]
    return all(ks[i + 1] <= ks[i] for i in range(len(ks) - 1))


def _efficiency_trend(x, Y):
    # decreasing in n_h, and the mean slope is more negative at larger eta
    slopes = [(y[-1] - y[0]) / (x[-1] - x[0]) for y in Y]
    return (all(np.all(np.diff(y) < 0) for y in Y)
            and all(slopes[i + 1] <= slopes[i] for i in range(len(slopes) - 1)))


A5_CHECKS = (
    ("(i) Re G increasing in n_h", "figure2a", _increasing),
    ("(i) Re G increasing in n_c", "figure2b", _increasing),
    ("(ii) G ordered by eta vs n_h", "figure2a", _ordered),
    ("(ii) G ordered by eta vs n_c", "figure2b", _ordered),
    ("(iii) dRe G/dkappa = -1/2", "figure3a", _slope_exact),
    ("(iii) kappa* non-increasing in Omega", "figure3a", _kstar_nonincreasing),
    ("(iv) efficiency decreasing in n_h, steeper at larger eta", "figure4",
     _efficiency_trend),
)


def run_a5():
    """Closed forms first; a failing closed-form trend is re-checked against
    the ODE oracle and fails the criterion only if the oracle agrees."""
    cache = {}

    def curves(name, solver):
        if (name, solver) not in cache:
            cache[name, solver] = _curves(name, solver)
        return cache[name, solver]

    failed, notes = [], []
    for label, name, check in A5_CHECKS:
        if check(*curves(name, "closed")):
            continue
        if check(*curves(name, "ode")):
            notes.append(f"{label}: closed form disagrees, ODE oracle confirms")
        else:
            failed.append(f"{label}: closed form and ODE oracle both contradict")
    ok = not failed
    detail = f"{len(A5_CHECKS) - len(failed)}/{len(A5_CHECKS)} trends hold"
    if notes:
        detail += "; discrepancies: " + "; ".join(notes)
    if failed:
        detail += "; failures: " + "; ".join(failed)
    return ok, detail


def test_a5_trends(capsys):
    ok, detail = run_a5()
    _report("A5", ok, detail, capsys)
    assert ok, detail


# --- A6 ---------------------------------------------------------------------

def run_a6():
    errs = {}
    # no probe coupling: G is the bare cavity loss
    e = 0.0
    for kappa in (0.0, 0.7, 4.0):
        p = EngineParams(g_pr=0, kappa=kappa)
        for solver in ("closed", "hb", "ode"):
            r = evaluate_point(p, solver, "both")
            for v in (r.gain.plus, r.gain.minus):
                if v is not None:
                    e = max(e, abs(v - complex(-kappa / 2, 0)))
    errs["G=-kappa/2"] = (e, 0.0)
    # coherent Rabi transfer from the cold ground state
    e = 0.0
    for om in (0.5, 1.0, 3.0):
        p = EngineParams(gamma_eg=0, gamma_egp=0, eta=0, g_pr=0, omega_rabi=om)
        t = np.linspace(0, 5, 201)
        tr = evolve(DensityState.ground(1), (0, 5), p, 1e-13, t_eval=t)
        e = max(e, float(np.max(np.abs(tr.states[:, 2, 2].real - np.sin(om * t) ** 2))))
    errs["Rabi sin^2"] = (e, 1e-8)
    # dark control field, cold reservoir at zero temperature
    e = 0.0
    p = EngineParams(omega_rabi=0, n_c=0)
    for solver in ("hb", "ode"):
        e = max(e, abs(evaluate_point(p, solver).populations[1] - 1.0))
    errs["rho_g'g'=1"] = (e, 1e-9)
    ok = all(v <= tol for v, tol in errs.values())
    return ok, ", ".join(f"{k}: err {v:.2e} (tol {tol:g})" for k, (v, tol) in errs.items())


def test_a6_limits(capsys):
    ok, detail = run_a6()
    _report("A6", ok, detail, capsys)
    assert ok, detail


# --- A7 ---------------------------------------------------------------------

def run_a7(tmp):
    outs = {}
    for w in (1, 8):
        d = tmp / f"w{w}"
        r = subprocess.run([sys.executable, "-m", "lambda_engine", "figure", "figure2a",
                            "--workers", str(w), "--out", str(d)],
                           capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs[w] = ((d / "figure2a.csv").read_bytes(), (d / "figure2a.svg").read_bytes())
    same_csv = outs[1][0] == outs[8][0]
    same_svg = outs[1][1] == outs[8][1]
    return same_csv and same_svg, (f"figure2a workers 1 vs 8: CSV identical={same_csv}, "
                                   f"SVG identical={same_svg}")


def test_a7_cli_determinism(capsys, tmp_path):
    ok, detail = run_a7(tmp_path)
    _report("A7", ok, detail, capsys)
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        for tag, fn in (("A1", run_a1), ("A2", run_a2), ("A3", run_a3), ("A4", run_a4),
                        ("A5", run_a5), ("A6", run_a6),
                        ("A7", lambda: run_a7(Path(d)))):
            _report(tag, *fn())
    sys.exit(0 if all("PASS" in v for v in _RESULTS.values()) else 1)
