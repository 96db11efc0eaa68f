import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lambda_engine.config import SWEEPABLE, SweepSpec, emit_config, parse_config
from lambda_engine.errors import ConfigError, DomainError
from lambda_engine.params import EngineParams


def test_empty_document_gives_defaults():
    spec = parse_config("")
    assert spec == SweepSpec()
    assert spec.base.gamma_eg == 5.7
    assert spec.base.omega_rabi == 10.0
    assert spec.base.omega_m == 2.0
    assert len(spec.points()) == 1


def test_comments_and_blank_lines():
    spec = parse_config("# hi\n\n; also\n[engine]\n  eta = 0.3\n")
    assert spec.base.eta == 0.3


def test_negative_eta_rejected_with_position():
    with pytest.raises(ConfigError) as err:
        parse_config("[engine]\neta = -1\n")
    assert err.value.line == 2
    assert err.value.column == 7
    assert "line 2, column 7" in str(err.value)


@pytest.mark.parametrize("text, line, column", [
    ("[engine]\nomega = 3\n", 2, 1),
    ("[engine]\n  n_h = 0.1x\n", 2, 9),
    ("[sweep]\nparameter = n_h\nvalues =\n", 3, 9),
    ("[sweep]\nparameter = n_h\nvalues = 0.1, , 0.3\n", 3, 14),
    ("[sweep]\nparameter = n_h\nvalues = 0.1, 0.2x\n", 3, 15),
    ("[nonsense]\n", 1, 2),
    ("eta = 0.1\n", 1, 1),
    ("[engine]\neta 0.1\n", 2, 1),
    ("[engine]\neta = 0.1\neta = 0.2\n", 3, 1),
    ("[solver]\nsolver = rk4\n", 2, 10),
    ("[sweep]\nparameter = colour\n", 2, 13),
    ("[sweep]\nparameter = n_h\nstart = 0\nstop = 1\npoints = 0\n", 5, 10),
])
def test_errors_carry_line_and_column(text, line, column):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert (err.value.line, err.value.column) == (line, column)


def test_grid_must_be_monotone():
    with pytest.raises(ConfigError) as err:
        parse_config("[sweep]\nparameter = n_h\nvalues = 0.1, 0.3, 0.2\n")
    assert err.value.line == 3


def test_parameter_without_grid():
    with pytest.raises(ConfigError):
        parse_config("[sweep]\nparameter = n_h\n")


def test_range_keys():
    spec = parse_config("[sweep]\nparameter = kappa\nstart = 0\nstop = 10\npoints = 51\n")
    assert spec.values == tuple(np.linspace(0, 10, 51))
    with pytest.raises(ConfigError):
        parse_config("[sweep]\nparameter = kappa\nstart = 0\nstop = 10\n")


def test_full_document():
    text = """
[engine]
omega_rabi = 20
probe_amplitude = 0.5-0.25j
modulation = exact

[sweep]
name = demo
parameter = n_h
values = 0.01, 0.05, 0.1
family = eta
family_values = 0.01, 0.5
quantity = efficiency

[solver]
solver = harmonic-balance
branch = both
l_max = 5
tol = 1e-9

[output]
watts = yes
csv = out.csv

[oracle]
reference = ode-oracle
component_tol = 1e-7
"""
    spec = parse_config(text)
    assert spec.base.probe_amplitude == 0.5 - 0.25j
    assert spec.base.modulation == "exact"
    assert spec.solver == "hb" and spec.reference == "ode"
    assert spec.watts and spec.csv == "out.csv"
    pts = spec.points()
    assert len(pts) == 6
    assert [(p.eta, p.n_h) for p in pts[:3]] == [(0.01, 0.01), (0.01, 0.05), (0.01, 0.1)]


def test_spec_validation():
    with pytest.raises(DomainError):
        SweepSpec(parameter="modulation", values=(1.0,))
    with pytest.raises(DomainError):
        SweepSpec(parameter="n_h", values=(0.1,), family="n_h", family_values=(0.2,))
    with pytest.raises(DomainError):
        SweepSpec(values=(0.1,))
    with pytest.raises(DomainError):
        SweepSpec(tol=1e-3)


grids = st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=6,
                 unique=True).map(sorted)


@given(st.sampled_from(SWEEPABLE[2:9]), grids, st.floats(0, 1),
       st.sampled_from(["closed", "hb", "ode"]), st.sampled_from(["plus", "minus", "both"]),
       st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.booleans())
def test_round_trip(param, values, eta, solver, branch, a, watts):
    base = EngineParams(eta=eta, probe_amplitude=a)
    fam = None if param == "eta" else "eta"
    spec = SweepSpec("rt", base, param, values, fam, (0.1, 0.2) if fam else (),
                     solver=solver, branch=branch, watts=watts, csv="x.csv")
    assert parse_config(emit_config(spec)) == spec
