import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_points(rng, n, rmin, rmax):
    r = rng.uniform(rmin, rmax, n)
    return r * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
