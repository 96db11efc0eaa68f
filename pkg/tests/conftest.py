import os

import pytest
from hypothesis import HealthCheck, settings

from lambda_engine import EngineParams

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def defaults():
    return EngineParams()


@pytest.fixture
def weak_drive():
    # constant weak drive, probe switched off: the rate-equation regime
    return EngineParams(omega_rabi=1.0, omega_m=0.0, eta=0.0, g_pr=0.0)
