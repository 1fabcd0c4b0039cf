import numpy as np
import pytest

from affinemaps.basis import product_basis


@pytest.fixture(scope="session")
def pb22():
    return product_basis(2, 2)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
