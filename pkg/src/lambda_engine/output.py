"""Deterministic CSV and SVG 1.1 emitters for sweep records."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .params import EngineParams
from .thermo import CSV_COLUMNS as THERMO_COLUMNS

_PARAM_FIELDS = tuple(n for n in EngineParams.field_names()
                      if n not in ("probe_amplitude", "modulation"))

RECORD_COLUMNS = (_PARAM_FIELDS + ("re_probe", "im_probe", "modulation",
                                   "solver", "branch", "status",
                                   "re_G_plus", "im_G_plus", "re_G_minus", "im_G_minus",
                                   "rho_gg", "rho_gpgp", "rho_ee")
                  + THERMO_COLUMNS[6:] + ("message",))


def _num(v) -> str:
    if v is None:
        return ""
    return repr(float(v))


def _fluxes(rec, watts):
    f = rec.fluxes
    if f is None:
        return [""] * 6
    eff = f.efficiency
    if watts:
        f = f.to_watts()
    return [_num(f.P_c), _num(f.Qdot_c), _num(f.Qdot_out), _num(f.Qdot_h),
            _num(f.Edot_residual), _num(eff)]


def record_row(rec, watts: bool = False) -> list[str]:
    p = rec.params
    row = [_num(getattr(p, n)) for n in _PARAM_FIELDS]
    row += [_num(p.probe_amplitude.real), _num(p.probe_amplitude.imag), p.modulation,
            rec.solver, rec.branch, rec.status]
    for b in ("plus", "minus"):
        v = None if rec.gain is None else getattr(rec.gain, b)
        row += ["", ""] if v is None else [_num(v.real), _num(v.imag)]
    pops = rec.populations
    row += ["", "", ""] if pops is None else [_num(x) for x in pops]
    row += _fluxes(rec, watts)
    row.append(rec.message)
    return row


def emit_csv(records, path, watts: bool = False) -> None:
    """Full record table: parameter echo, gains, populations, fluxes."""
    if not records:
        raise ValueError("no records to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_COLUMNS)
        for rec in records:
            w.writerow(record_row(rec, watts))


def emit_thermo_csv(records, path, watts: bool = False) -> None:
    """One ThermoFluxes row per successful record."""
    rows = [r for r in records if r.fluxes is not None]
    if not rows:
        raise ValueError("no flux records to write")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(THERMO_COLUMNS)
        for r in rows:
            f = r.fluxes.to_watts() if watts else r.fluxes
            vals = f.csv_row(r.params)
            vals[-1] = r.fluxes.efficiency
            w.writerow([_num(v) for v in vals])


# --- SVG --------------------------------------------------------------------

SYMBOLS = {"eta": "η", "n_h": "n_h", "n_c": "n_c", "omega_rabi": "Ω_c",
           "omega_m": "ω_m", "kappa": "κ", "g_pr": "g_pr",
           "gamma_eg": "Γ_eg", "gamma_egp": "Γ_eg'"}
# black solid, blue dot-dash, red dashed, then extras
STYLES = (("#000000", None), ("#1f3fbf", "8,3,2,3"), ("#c81e1e", "7,4"),
          ("#2a8a2a", "2,3"), ("#7a3fa0", "10,3"))


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray


def _label_value(v):
    return f"{v:g}"


def plot_series(specs, records, branch=None) -> list[Series]:
    """Split preset records into one curve per family value (or per spec when
    a preset has several specs)."""
    out = []
    i = 0
    for spec in specs:
        pts = spec.points()
        chunk = records[i:i + len(pts)]
        i += len(pts)
        fams = spec.family_values if spec.family else (None,)
        n = len(spec.values) if spec.parameter else 1
        for k, f in enumerate(fams):
            recs = chunk[k * n:(k + 1) * n]
            x = np.array([getattr(r.params, spec.parameter) if spec.parameter else 0.0
                          for r in recs])
            y = np.array([r.quantity(spec.quantity, branch) for r in recs])
            if f is not None:
                label = f"{SYMBOLS.get(spec.family, spec.family)} = {_label_value(f)}"
            elif len(specs) > 1:
                p = spec.base
                label = f"n_h = {_label_value(p.n_h)}, n_c = {_label_value(p.n_c)}"
            else:
                label = spec.name
            out.append(Series(label, x, y))
    return out


def nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return [0.0, 1.0]
    if hi == lo:
        d = abs(lo) * 0.1 or 1.0
        lo, hi = lo - d, hi + d
    raw = (hi - lo) / max(n, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = mag * min((s for s in (1, 2, 2.5, 5, 10) if s * mag >= raw), default=10)
    start = math.floor(lo / step) * step
    ticks = []
    k = 0
    while True:
        t = start + k * step
        ticks.append(0.0 if abs(t) < step * 1e-9 else t)
        if t >= hi - step * 1e-9:
            break
        k += 1
    return ticks


def _fmt_tick(v):
    return f"{v:.4g}"


def render_svg(series, title="", xlabel="", ylabel="", width=640, height=440) -> str:
    """SVG 1.1 line plot with axes, ticks and a legend."""
    ml, mr, mt, mb = 80, 20, 40, 60
    pw, ph = width - ml - mr, height - mt - mb
    xs = np.concatenate([s.x for s in series]) if series else np.zeros(1)
    ys = np.concatenate([s.y for s in series]) if series else np.zeros(1)
    fin = np.isfinite(xs) & np.isfinite(ys)
    if fin.any():
        xt = nice_ticks(float(xs[fin].min()), float(xs[fin].max()))
        yt = nice_ticks(float(ys[fin].min()), float(ys[fin].max()))
    else:
        xt = yt = [0.0, 1.0]
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
           '<g font-family="Helvetica, Arial, sans-serif" font-size="12" fill="#000000">']
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="{mt / 2 + 6:.2f}" text-anchor="middle" '
                   f'font-size="14">{escape(title)}</text>')
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
               'stroke="#000000" stroke-width="1"/>')
    for t in xt:
        x = px(t)
        out.append(f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 5}" '
                   'stroke="#000000"/>')
        out.append(f'<text x="{x:.2f}" y="{mt + ph + 18}" text-anchor="middle">'
                   f'{_fmt_tick(t)}</text>')
    for t in yt:
        y = py(t)
        out.append(f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" '
                   'stroke="#000000"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.2f}" text-anchor="end">'
                   f'{_fmt_tick(t)}</text>')
    if xlabel:
        out.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 15}" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="18" y="{mt + ph / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {mt + ph / 2:.2f})">{escape(ylabel)}</text>')
    out.append('</g>')

    for i, s in enumerate(series):
        color, dash = STYLES[i % len(STYLES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        # NaN points split the curve
        runs, cur = [], []
        for a, b in zip(s.x, s.y):
            if math.isfinite(a) and math.isfinite(b):
                cur.append(f"{px(a):.2f},{py(b):.2f}")
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        for run in runs:
            out.append(f'<polyline points="{" ".join(run)}" fill="none" '
                       f'stroke="{color}" stroke-width="1.8"{dash_attr}/>')

    lx, ly = ml + pw - 150, mt + 12
    out.append('<g font-family="Helvetica, Arial, sans-serif" font-size="12">')
    for i, s in enumerate(series):
        color, dash = STYLES[i % len(STYLES)]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        y = ly + 18 * i
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 30}" y2="{y}" stroke="{color}" '
                   f'stroke-width="1.8"{dash_attr}/>')
        out.append(f'<text x="{lx + 36}" y="{y + 4}">{escape(s.label)}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def emit_svg(series, path, **kw) -> None:
    if not series:
        raise ValueError("nothing to plot")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(series, **kw))
