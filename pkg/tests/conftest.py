import numpy as np
import pytest

from angelesco import GridMeasure, IntervalSystem, VectorMeasure, solve_equilibrium


def arcsine_cdf(x):
    return 0.5 + np.arcsin(np.clip(x, -1.0, 1.0)) / np.pi


@pytest.fixture(scope="session")
def two():
    return IntervalSystem(((-2.0, -1.0), (1.0, 2.0)), (0.5, 0.5))


@pytest.fixture(scope="session")
def unit():
    return IntervalSystem(((0.0, 1.0),), (1.0,))


@pytest.fixture(scope="session")
def sym():
    return IntervalSystem(((-1.0, 1.0),), (1.0,))


@pytest.fixture(scope="session")
def arcsine(sym):
    return VectorMeasure((GridMeasure.from_cdf(sym, 0, arcsine_cdf),))


@pytest.fixture(scope="session")
def two_equilibrium(two):
    return solve_equilibrium(two, cells=400)
