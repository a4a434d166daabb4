import numpy as np
import pytest

import landaulab as ll


@pytest.fixture(scope="session")
def grid16():
    return ll.build_grid(7.0, 16)


@pytest.fixture(scope="session")
def grid24():
    return ll.build_grid(7.0, 24)


@pytest.fixture(scope="session")
def grid33():
    # odd point count: the origin is a node
    return ll.build_grid(8.0, 33)


@pytest.fixture(scope="session")
def grid64():
    # the default desk-scale quadrature domain
    return ll.build_grid(8.0, 64)


@pytest.fixture(scope="session")
def corpus16(grid16):
    return ll.random_corpus(grid16, seed=1, count=8)


@pytest.fixture(scope="session")
def bimax16(grid16):
    return ll.normalize(ll.gaussian_mixture(
        grid16, [(0.5, (1.0, 0.0, 0.0), 2.0 / 3.0),
                 (0.5, (-1.0, 0.0, 0.0), 2.0 / 3.0)]))


@pytest.fixture(scope="session")
def aniso16(grid16):
    return ll.normalize(ll.anisotropic_gaussian(grid16, 1.5, 1.0, 0.5))
