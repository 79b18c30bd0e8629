import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polarqfi.hilbert import FockBasis, RotationAxis

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

THETA = math.pi / 10
TILTED_AXIS = RotationAxis(math.pi / 5, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def basis12():
    return FockBasis(12)


def random_ket(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_sector_density(n, rng, rank=None):
    d = n + 1
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
