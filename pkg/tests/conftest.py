import numpy as np
import pytest

from instance_kl.sampling import NoiseSource


@pytest.fixture
def zero_rng():
    return NoiseSource.zero_noise()


@pytest.fixture
def rng():
    return NoiseSource(20240611)


@pytest.fixture
def np_rng():
    return np.random.default_rng(7)
