import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from calibrix.fields import Kind
from calibrix.general_calibration import build_general
from calibrix.model_calibration import ModelField
from calibrix.params import derive_model_params, derive_shifted_params

settings.register_profile("calibrix", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("calibrix")


@pytest.fixture(scope="session")
def model_params():
    return derive_model_params(1.0, 0.025)


@pytest.fixture(scope="session")
def shifted_params():
    return derive_shifted_params(1.0, 0.02)


@pytest.fixture(scope="session")
def model_field(model_params):
    return ModelField(model_params, Kind.OPPOSITE)


@pytest.fixture(scope="session")
def shifted_field(shifted_params):
    return ModelField(shifted_params, Kind.SHIFTED)


@pytest.fixture(scope="session")
def general_field():
    return build_general([1.0, 1.0, 1.0], Kind.OPPOSITE)


@pytest.fixture(scope="session")
def general_field_neg():
    return build_general([1.0, 1.0, -1.0], Kind.OPPOSITE)


@pytest.fixture(scope="session")
def general_field_shifted():
    return build_general([1.0, 1.0, 1.0], Kind.SHIFTED)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
