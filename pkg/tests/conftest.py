import numpy as np
import pytest

from soundranging.instances import example1, example2


@pytest.fixture(scope="session")
def ex1():
    return example1()


@pytest.fixture(scope="session")
def ex2():
    return example2()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
