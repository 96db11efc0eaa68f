"""Three-level Lambda quantum heat engine driven through a vibrating nanomirror."""

from .config import SweepSpec, emit_config, parse_config
from .dynamics import (DensityState, Trajectory, bloch_rhs, evolve, extract_harmonics,
                       stroboscopic_steady_state)
from .floquet import (FloquetComponents, GainResult, coherence_closed_form, gain,
                      harmonic_balance_solve, populations_closed_form,
                      static_steady_state, steady_state_gain, x_factor)
from .kernel import BACKEND
from .params import (EngineParams, ReservoirSpec, bose_occupation, dephasing_rates,
                     occupation_to_temperature, rabi_at)
from .sweep import RunRecord, evaluate_point, oracle_check, preset, run_sweep
from .thermo import (ThermoFluxes, cold_flux, control_power, efficiency,
                     first_law_residual, hot_flux, output_power)

__version__ = "0.1.0"
