import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cdwork import HOConfig, HarmonicOscillator, model_ensemble

settings.register_profile(
    "default", max_examples=20, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def fig1_model():
    """The oscillator study's operating point: omega 1 -> 3, tau = 0.8."""
    return HarmonicOscillator(HOConfig(1.0, 3.0, 0.8, dim=120))


@pytest.fixture(scope="session")
def fig1_ensemble(fig1_model):
    return model_ensemble(fig1_model, 1.0)


@pytest.fixture(scope="session")
def fig1_ground(fig1_model):
    return model_ensemble(fig1_model, math.inf)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
