import numpy as np
import pytest

from tentropy.fixtures import ALL
from tentropy.sampling import random_potential, random_system


@pytest.fixture(params=sorted(ALL))
def any_system(request):
    """One of the four reference systems, by name."""
    return ALL[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(20260821)


@pytest.fixture(scope="session")
def system_pool():
    """A fixed bag of random valid systems shared across property tests."""
    gen = np.random.default_rng(99)
    return [random_system(gen) for _ in range(25)]


@pytest.fixture(scope="session")
def potential_pool(system_pool):
    gen = np.random.default_rng(991)
    return [random_potential(gen, s) for s in system_pool]
