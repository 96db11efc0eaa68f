"""Sweep specifications and their line-oriented configuration format.

A document is a sequence of ``key = value`` lines grouped under ``[section]``
headers. Blank lines and lines starting with ``#`` or ``;`` are ignored::

    [engine]
    omega_rabi = 10
    n_c = 0.05

    [sweep]
    name = figure2a
    parameter = n_h
    start = 0.01
    stop = 0.2
    points = 33
    family = eta
    family_values = 0.01, 0.1, 0.5

    [solver]
    solver = closed
    branch = plus

Every error carries the line and column of the offending token.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ConfigError, DomainError
from .params import MODULATION_MODES, EngineParams

SOLVERS = ("closed", "hb", "ode")
SOLVER_ALIASES = {"closed": "closed", "closed-form": "closed", "hb": "hb",
                  "harmonic-balance": "hb", "ode": "ode", "ode-oracle": "ode"}
BRANCHES = ("plus", "minus", "both")
QUANTITIES = ("gain", "efficiency")
NUMERATORS = ("printed", "factored")

#: EngineParams fields that may be swept or used as a family.
SWEEPABLE = tuple(n for n in EngineParams.field_names()
                  if n not in ("probe_amplitude", "modulation"))


@dataclass(frozen=True)
class SweepSpec:
    """Everything needed to run and emit one sweep.

    The grid is ``values`` (x axis) crossed with ``family_values`` (one curve
    each); with no ``parameter`` the sweep is the single point ``base``.
    """

    name: str = "sweep"
    base: EngineParams = field(default_factory=EngineParams)
    parameter: str | None = None
    values: tuple[float, ...] = ()
    family: str | None = None
    family_values: tuple[float, ...] = ()
    quantity: str = "gain"
    solver: str = "closed"
    branch: str = "plus"
    l_max: int = 3
    tol: float = 1e-10
    numerator: str = "printed"
    csv: str | None = None
    svg: str | None = None
    watts: bool = False
    reference: str = "ode"
    component_tol: float = 1e-6
    population_rtol: float = 0.05
    identity_rtol: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "family_values",
                           tuple(float(v) for v in self.family_values))
        _validate(self)

    def points(self) -> list[EngineParams]:
        """Grid points in family-major order."""
        fam = self.family_values if self.family else (None,)
        xs = self.values if self.parameter else (None,)
        out = []
        for f in fam:
            p = self.base if f is None else self.base.replace(**{self.family: f})
            for x in xs:
                out.append(p if x is None else p.replace(**{self.parameter: x}))
        return out

    def replace(self, **changes) -> SweepSpec:
        return replace(self, **changes)


def _strictly_monotone(v):
    d = np.diff(v)
    return bool(np.all(d > 0) or np.all(d < 0))


def _validate(s: SweepSpec):
    if s.parameter is not None:
        if s.parameter not in SWEEPABLE:
            raise DomainError(f"cannot sweep {s.parameter!r}; choose from {SWEEPABLE}")
        if not s.values:
            raise DomainError("sweep grid is empty")
        if not _strictly_monotone(s.values):
            raise DomainError("sweep grid must be strictly monotone")
    elif s.values:
        raise DomainError("values given without a sweep parameter")
    if s.family is not None:
        if s.family not in SWEEPABLE:
            raise DomainError(f"cannot use {s.family!r} as a family")
        if s.family == s.parameter:
            raise DomainError("family and sweep parameter must differ")
        if not s.family_values:
            raise DomainError("family grid is empty")
    elif s.family_values:
        raise DomainError("family_values given without a family")
    if s.quantity not in QUANTITIES:
        raise DomainError(f"quantity must be one of {QUANTITIES}")
    if s.solver not in SOLVERS:
        raise DomainError(f"solver must be one of {SOLVERS}")
    if s.reference not in SOLVERS:
        raise DomainError(f"reference must be one of {SOLVERS}")
    if s.branch not in BRANCHES:
        raise DomainError(f"branch must be one of {BRANCHES}")
    if s.numerator not in NUMERATORS:
        raise DomainError(f"numerator must be one of {NUMERATORS}")
    if s.l_max < 1:
        raise DomainError("l_max must be >= 1")
    if not 1e-13 <= s.tol <= 1e-6:
        raise DomainError("tol must lie in [1e-13, 1e-6]")
    for name in ("component_tol", "population_rtol", "identity_rtol"):
        if not getattr(s, name) > 0:
            raise DomainError(f"{name} must be > 0")


# --- parsing ----------------------------------------------------------------

def _float(tok, line, col):
    try:
        v = float(tok)
    except ValueError:
        raise ConfigError(f"malformed number {tok!r}", line, col) from None
    if not math.isfinite(v):
        raise ConfigError(f"non-finite number {tok!r}", line, col)
    return v


def _int(tok, line, col):
    try:
        return int(tok)
    except ValueError:
        raise ConfigError(f"malformed integer {tok!r}", line, col) from None


def _complex(tok, line, col):
    try:
        return complex(tok.replace(" ", ""))
    except ValueError:
        raise ConfigError(f"malformed complex number {tok!r}", line, col) from None


def _bool(tok, line, col):
    t = tok.lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"malformed boolean {tok!r}", line, col)


def _float_list(tok, line, col):
    out = []
    offset = 0
    for part in tok.split(","):
        lead = len(part) - len(part.lstrip())
        item = part.strip()
        if not item:
            raise ConfigError("empty list item", line, col + offset)
        out.append(_float(item, line, col + offset + lead))
        offset += len(part) + 1
    return tuple(out)


def _choice(tok, options, line, col, aliases=None):
    t = tok.strip().lower()
    if aliases is not None:
        t = aliases.get(t, t)
    if t not in options:
        raise ConfigError(f"expected one of {', '.join(options)}, got {tok!r}", line, col)
    return t


_ENGINE_KEYS = set(EngineParams.field_names())
_SWEEP_KEYS = {"name", "parameter", "values", "start", "stop", "points",
               "family", "family_values", "quantity"}
_SOLVER_KEYS = {"solver", "branch", "l_max", "tol", "numerator"}
_OUTPUT_KEYS = {"csv", "svg", "watts"}
_ORACLE_KEYS = {"reference", "component_tol", "population_rtol", "identity_rtol"}
SECTIONS = {"engine": _ENGINE_KEYS, "sweep": _SWEEP_KEYS, "solver": _SOLVER_KEYS,
            "output": _OUTPUT_KEYS, "oracle": _ORACLE_KEYS}


def _tokenize(text):
    """Yield (section, key, value, line, key_col, value_col)."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "#;":
            continue
        indent = len(raw) - len(raw.lstrip())
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, indent + 1)
            name = stripped[1:-1].strip().lower()
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]", lineno, indent + 2)
            section = name
            continue
        if "=" not in raw:
            raise ConfigError("expected 'key = value'", lineno, indent + 1)
        eq = raw.index("=")
        key = raw[:eq].strip()
        rest = raw[eq + 1:]
        value = rest.strip()
        vcol = eq + 2 + (len(rest) - len(rest.lstrip()))
        if section is None:
            raise ConfigError(f"key {key!r} appears before any [section]",
                              lineno, indent + 1)
        if key not in SECTIONS[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, indent + 1)
        if not value:
            if key in ("values", "family_values"):
                raise ConfigError(f"empty grid for {key!r}", lineno, vcol)
            raise ConfigError(f"missing value for {key!r}", lineno, vcol)
        yield section, key, value, lineno, indent + 1, vcol


def parse_config(text: str, base: SweepSpec | None = None) -> SweepSpec:
    """Parse a configuration document into a validated :class:`SweepSpec`.

    Keys not present keep the value from ``base`` (the all-defaults spec if
    omitted). Raises :class:`ConfigError` with line and column on any unknown
    key, malformed value, empty grid or parameter-validation failure.
    """
    spec = base or SweepSpec()
    engine = {}
    top = {}
    where = {}
    seen = {}
    rng = {}
    for section, key, value, line, kcol, vcol in _tokenize(text):
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line "
                              f"{seen[section, key]})", line, kcol)
        seen[section, key] = line
        where[key] = (line, vcol)
        if section == "engine":
            if key == "probe_amplitude":
                engine[key] = _complex(value, line, vcol)
            elif key == "modulation":
                engine[key] = _choice(value, MODULATION_MODES, line, vcol)
            else:
                engine[key] = _float(value, line, vcol)
        elif section == "sweep":
            if key == "name":
                top[key] = value
            elif key in ("parameter", "family"):
                if value not in SWEEPABLE:
                    raise ConfigError(f"{value!r} is not a sweepable parameter",
                                      line, vcol)
                top[key] = value
            elif key in ("values", "family_values"):
                top[key] = _float_list(value, line, vcol)
                if not top[key]:
                    raise ConfigError("empty grid", line, vcol)
            elif key == "quantity":
                top[key] = _choice(value, QUANTITIES, line, vcol)
            elif key == "points":
                rng[key] = _int(value, line, vcol)
                if rng[key] < 1:
                    raise ConfigError("empty grid: points must be >= 1", line, vcol)
            else:
                rng[key] = _float(value, line, vcol)
        elif section == "solver":
            if key == "solver":
                top[key] = _choice(value, SOLVERS, line, vcol, SOLVER_ALIASES)
            elif key == "branch":
                top[key] = _choice(value, BRANCHES, line, vcol)
            elif key == "numerator":
                top[key] = _choice(value, NUMERATORS, line, vcol)
            elif key == "l_max":
                top[key] = _int(value, line, vcol)
            else:
                top[key] = _float(value, line, vcol)
        elif section == "output":
            top[key] = _bool(value, line, vcol) if key == "watts" else value
        else:
            if key == "reference":
                top[key] = _choice(value, SOLVERS, line, vcol, SOLVER_ALIASES)
            else:
                top[key] = _float(value, line, vcol)

    if rng:
        missing = {"start", "stop", "points"} - rng.keys()
        first = min(where[k][0] for k in rng)
        if missing:
            raise ConfigError(f"range needs start, stop and points; missing "
                              f"{', '.join(sorted(missing))}", first, 1)
        if "values" in top:
            raise ConfigError("give either values or start/stop/points", first, 1)
        top["values"] = tuple(np.linspace(rng["start"], rng["stop"], rng["points"]))

    try:
        params = spec.base.replace(**engine)
    except (DomainError, TypeError) as exc:
        line, col = _blame(exc, engine, where)
        raise ConfigError(str(exc), line, col) from None
    try:
        return spec.replace(base=params, **top)
    except (DomainError, TypeError) as exc:
        line, col = _blame(exc, top, where)
        raise ConfigError(str(exc), line, col) from None


def _blame(exc, keys, where):
    msg = str(exc)
    for k in keys:
        if k in msg and k in where:
            return where[k]
    if "values" in where and ("grid" in msg or "values" in msg):
        return where["values"]
    for k in ("start", "stop", "points"):
        if k in where:
            return where[k]
    return None, None


def _fmt(v):
    if isinstance(v, complex):
        return repr(v).strip("()")
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(spec: SweepSpec) -> str:
    """Serialize ``spec`` so that ``parse_config(emit_config(s)) == s``."""
    lines = ["[engine]"]
    for f in fields(EngineParams):
        lines.append(f"{f.name} = {_fmt(getattr(spec.base, f.name))}")
    lines += ["", "[sweep]", f"name = {spec.name}", f"quantity = {spec.quantity}"]
    if spec.parameter:
        lines.append(f"parameter = {spec.parameter}")
        lines.append("values = " + ", ".join(map(repr, spec.values)))
    if spec.family:
        lines.append(f"family = {spec.family}")
        lines.append("family_values = " + ", ".join(map(repr, spec.family_values)))
    lines += ["", "[solver]", f"solver = {spec.solver}", f"branch = {spec.branch}",
              f"l_max = {spec.l_max}", f"tol = {spec.tol!r}",
              f"numerator = {spec.numerator}", "", "[output]",
              f"watts = {'true' if spec.watts else 'false'}"]
    if spec.csv:
        lines.append(f"csv = {spec.csv}")
    if spec.svg:
        lines.append(f"svg = {spec.svg}")
    lines += ["", "[oracle]", f"reference = {spec.reference}",
              f"component_tol = {spec.component_tol!r}",
              f"population_rtol = {spec.population_rtol!r}",
              f"identity_rtol = {spec.identity_rtol!r}"]
    return "\n".join(lines) + "\n"
