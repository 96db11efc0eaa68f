"""Command-line interface: ``lambda-engine <command> [options]``.

Exit codes: 0 success, 2 configuration or usage error, 3 solver failure,
4 oracle tolerance not met, 5 output could not be written.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import dynamics, sweep
from .config import SweepSpec, parse_config
from .errors import ConfigError, EngineError
from .output import SYMBOLS, emit_csv, emit_svg, emit_thermo_csv, plot_series

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_ORACLE = 4
EXIT_IO = 5

WORKERS_ENV = "LAMBDA_ENGINE_WORKERS"


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _workers(args) -> int:
    if args.workers is not None:
        n = args.workers
    else:
        env = os.environ.get(WORKERS_ENV)
        if env is None or env.strip() == "":
            return 1
        try:
            n = int(env)
        except ValueError:
            raise _Fail(EXIT_CONFIG, f"{WORKERS_ENV}={env!r} is not an integer") from None
    if n < 1:
        raise _Fail(EXIT_CONFIG, "workers must be >= 1")
    return n


def _read_config(args) -> str | None:
    if not args.config:
        return None
    try:
        return Path(args.config).read_text()
    except OSError as exc:
        raise _Fail(EXIT_CONFIG, f"cannot read config: {exc}") from None


def _apply_flags(spec: SweepSpec, args) -> SweepSpec:
    changes = {}
    if args.solver:
        changes["solver"] = args.solver
    if args.branch:
        changes["branch"] = args.branch
    if args.lmax is not None:
        changes["l_max"] = args.lmax
    if args.tol is not None:
        changes["tol"] = args.tol
    if getattr(args, "watts", False):
        changes["watts"] = True
    try:
        return spec.replace(**changes) if changes else spec
    except ValueError as exc:
        raise _Fail(EXIT_CONFIG, str(exc)) from None


def _load_spec(args, base: SweepSpec | None = None) -> SweepSpec:
    text = _read_config(args)
    spec = base or SweepSpec()
    if text is not None:
        spec = parse_config(text, spec)
    return _apply_flags(spec, args)


def _outdir(args) -> Path:
    out = Path(args.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot create output directory: {exc}") from None
    return out


def _write(fn, *a, **kw):
    try:
        fn(*a, **kw)
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write output: {exc}") from None


def _axis_label(name):
    if name is None:
        return ""
    unit = "" if name in ("eta", "n_h", "n_c") else " (MHz)"
    return SYMBOLS.get(name, name) + unit


def _y_label(quantity):
    return "Re G (MHz)" if quantity == "gain" else "efficiency e"


def _failures(records):
    bad = [r for r in records if not r.ok]
    for r in bad:
        print(f"point failed: {r.message}", file=sys.stderr)
    return EXIT_SOLVER if bad else EXIT_OK


def _emit_sweep(specs, records, out: Path, name: str):
    spec = specs[0]
    csv_path = Path(spec.csv) if spec.csv else out / f"{name}.csv"
    svg_path = Path(spec.svg) if spec.svg else out / f"{name}.svg"
    _write(emit_csv, records, csv_path, watts=spec.watts)
    series = plot_series(specs, records)
    _write(emit_svg, series, svg_path, title=name,
           xlabel=_axis_label(spec.parameter), ylabel=_y_label(spec.quantity))
    print(f"wrote {csv_path} and {svg_path} ({len(records)} points)")


# --- commands ---------------------------------------------------------------

def cmd_steady(args) -> int:
    spec = _load_spec(args, SweepSpec(solver="hb", branch="both"))
    p = spec.base
    rec = sweep.evaluate_point(p, spec.solver, spec.branch, spec.l_max, spec.tol,
                               spec.numerator)
    print(f"solver: {spec.solver}")
    for name in ("omega_rabi", "omega_m", "eta", "kappa", "g_pr", "n_h", "n_c"):
        print(f"  {name} = {getattr(p, name)!r}")
    if not p.weak_modulation_ok:
        print("  warning: eta > 1 lies outside the small-displacement regime")
    if not rec.ok:
        print(f"solver failure: {rec.message}", file=sys.stderr)
        return EXIT_SOLVER
    gg, gpgp, ee = rec.populations
    print(f"populations: rho_gg={gg:.10g} rho_g'g'={gpgp:.10g} rho_ee={ee:.10g}")
    for b in ("plus", "minus"):
        v = getattr(rec.gain, b)
        if v is not None:
            print(f"gain ({b}): Re G = {v.real:.10g}  Im G = {v.imag:.10g}")
    f = rec.fluxes.to_watts() if spec.watts else rec.fluxes
    unit = "W" if spec.watts else "hbar MHz^2"
    print(f"P_c = {f.P_c:.10g}  Qdot_c = {f.Qdot_c:.10g}  Qdot_out = {f.Qdot_out:.10g}  "
          f"Qdot_h = {f.Qdot_h:.10g}  [{unit}]")
    print(f"first-law residual = {f.Edot_residual:.3e}  efficiency = "
          f"{rec.fluxes.efficiency:.10g}")
    for k, v in rec.diagnostics.items():
        print(f"  {k}: {v}")
    if args.out:
        out = _outdir(args)
        _write(emit_csv, [rec], out / "steady.csv", watts=spec.watts)
        if spec.solver == "ode":
            try:
                orbit = dynamics.stroboscopic_steady_state(p, spec.tol)
            except EngineError as exc:
                print(f"solver failure: {exc}", file=sys.stderr)
                return EXIT_SOLVER
            _write(orbit.to_csv, out / "trajectory.csv")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _load_spec(args)
    records = sweep.run_sweep(spec, _workers(args))
    _emit_sweep([spec], records, _outdir(args), spec.name)
    return _failures(records)


def cmd_figure(args) -> int:
    text = _read_config(args)
    specs = sweep.preset_specs(args.preset)
    if text is not None:
        specs = [parse_config(text, s) for s in specs]
    specs = [_apply_flags(s, args) for s in specs]
    workers = _workers(args)
    records = []
    for s in specs:
        records += sweep.run_sweep(s, workers)
    _emit_sweep(specs, records, _outdir(args), args.preset)
    return _failures(records)


def cmd_thermo(args) -> int:
    spec = _load_spec(args, SweepSpec(solver="hb"))
    records = sweep.run_sweep(spec, _workers(args))
    out = _outdir(args)
    ok = [r for r in records if r.ok]
    if ok:
        path = Path(spec.csv) if spec.csv else out / "thermo.csv"
        _write(emit_thermo_csv, ok, path, watts=spec.watts)
        print(f"wrote {path} ({len(ok)} rows)")
    for r in ok:
        f = r.fluxes
        print(f"n_h={r.params.n_h:.4g} n_c={r.params.n_c:.4g} eta={r.params.eta:.4g}: "
              f"Qdot_h={f.Qdot_h:.6e} P_c={f.P_c:.6e} Qdot_out={f.Qdot_out:.6e} "
              f"e={f.efficiency:.6g} residual={f.Edot_residual:.2e}")
    return _failures(records)


def cmd_oracle(args) -> int:
    spec = _load_spec(args, SweepSpec(solver="hb", reference="ode"))
    try:
        report = sweep.oracle_check(spec, _workers(args))
    except ValueError as exc:
        raise _Fail(EXIT_CONFIG, str(exc)) from None
    print(report.summary())
    if args.out:
        out = _outdir(args)
        path = out / "oracle.csv"
        _write(_oracle_csv, report, path)
    checked = [r for r in report.rows if not r.message]
    if not checked:
        return EXIT_SOLVER
    return EXIT_OK if report.passed else EXIT_ORACLE


def _oracle_csv(report, path):
    cols = ("n_h", "n_c", "eta", "omega_rabi", "omega_m", "kappa", "candidate",
            "reference", "component_delta", "population_delta", "gain_delta",
            "identity_residual", "passed", "message")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for r in report.rows:
            p = r.params
            w.writerow([repr(p.n_h), repr(p.n_c), repr(p.eta), repr(p.omega_rabi),
                        repr(p.omega_m), repr(p.kappa), r.candidate, r.reference,
                        repr(r.component_delta), repr(r.population_delta),
                        repr(r.gain_delta), repr(r.identity_residual),
                        "true" if r.passed else "false", r.message])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="configuration file (key = value, [sections])")
    common.add_argument("--out", help="output directory")
    common.add_argument("--workers", type=int,
                        help=f"worker processes (default ${WORKERS_ENV} or 1)")
    common.add_argument("--branch", choices=("plus", "minus", "both"))
    common.add_argument("--solver", choices=("closed", "hb", "ode"))
    common.add_argument("--lmax", type=int, help="harmonic truncation order")
    common.add_argument("--tol", type=float, help="integrator tolerance")
    common.add_argument("--watts", action="store_true",
                        help="report powers in watts instead of hbar units")

    ap = argparse.ArgumentParser(prog="lambda-engine",
                                 description="Mirror-modulated Lambda heat engine.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("steady", parents=[common], help="one-point steady-state report"
                   ).set_defaults(func=cmd_steady)
    sub.add_parser("sweep", parents=[common], help="config-driven parameter sweep"
                   ).set_defaults(func=cmd_sweep)
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure preset")
    fig.add_argument("preset", choices=sweep.PRESETS)
    fig.set_defaults(func=cmd_figure)
    sub.add_parser("oracle-check", parents=[common], help="cross-solver comparison"
                   ).set_defaults(func=cmd_oracle)
    sub.add_parser("thermo", parents=[common], help="energy fluxes and efficiency"
                   ).set_defaults(func=cmd_thermo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EngineError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
