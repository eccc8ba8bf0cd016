import numpy as np
import pytest

from osculate.kepler import KeplerModel, OrbitalElements
from osculate.motions import kepler_chart

REFERENCE = OrbitalElements(1.3, 0.2, 0.4, 1.0, 2.0, 0.5)


@pytest.fixture
def model():
    return KeplerModel(1.0)


@pytest.fixture
def chart(model):
    return kepler_chart(model)


@pytest.fixture
def reference():
    return REFERENCE


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
