import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20231018)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hpd(rng, n):
    g = crandn(rng, n, n)
    return g @ g.conj().T + np.eye(n)
