import numpy as np
import pytest

from nusat.dist import EnsembleSpec, instantiate


@pytest.fixture
def uniform4():
    return instantiate(EnsembleSpec.uniform(), 4)


@pytest.fixture
def core4():
    from nusat.formula import Formula

    return Formula(2, 2, [(1, 2), (-1, 2), (1, -2), (-1, -2)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
