import numpy as np
import pytest

from ropetwin.rodsim import RodMaterial, SimConfig, init_rod


@pytest.fixture
def material():
    return RodMaterial()


@pytest.fixture
def config():
    return SimConfig()


def straight_rod(n=100, length=1.0, z=0.1, material=None, config=None):
    t = np.linspace(0.0, length, n)
    pts = np.stack([t, np.zeros(n), np.full(n, z)], axis=1)
    return init_rod(pts, material or RodMaterial(), config or SimConfig())


@pytest.fixture
def rod100():
    return straight_rod()
