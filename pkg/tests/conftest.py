import math

import pytest

from ringrc.config import ExperimentConfig, TaskConfig
from ringrc.physics import MrrParams


@pytest.fixture(scope="session")
def params():
    return MrrParams.default()


@pytest.fixture(scope="session")
def linear_params(params):
    return params.linearized()


@pytest.fixture
def small_experiment():
    """Short task so pipeline tests stay fast."""
    return ExperimentConfig(task=TaskConfig(warmup=20, train=300, test=100, seeds=(0, 1)))


def unit_decay_params(gamma=1e9):
    """Lossless-waveguide linear cavity whose amplitude decays at exactly ``gamma`` [1/s]."""
    return MrrParams.default().linearized().replace(alpha=0.0, tau_c=2.0 / gamma)


def rel(a, b):
    return abs(a - b) / abs(b)


TWO_PI = 2 * math.pi
