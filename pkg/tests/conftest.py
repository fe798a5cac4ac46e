# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

import numpy as np
import pytest

from irsma.channel import wavelength
from irsma.config import ScenarioConfig
from irsma.geometry import IrsGeometry, TxRegion


@pytest.fixture
def wl():
    return wavelength(5e9)


@pytest.fixture
def geom(wl):
    return IrsGeometry(15, 15, wl / 2)


@pytest.fixture
def small_geom(wl):
    return IrsGeometry(9, 9, wl / 2)


@pytest.fixture
def region(wl):
    return TxRegion([5.0, 5.0, 0.0], 0.6, wl / 2, 0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def tiny_config():
    """Reduced scenario which keeps every scheme and sweep path cheap.
    """
    return ScenarioConfig(trials=2).with_changes(**{
        "irs.m_y_count": 5,
        "irs.m_z_count": 5,
        "multipath.n_paths": 2,
        "solver.ao_max_iters": 10,
    })


@pytest.fixture
def cn(rng):
    """Draw i.i.d. complex Gaussian arrays of a given shape.
    """
    return lambda *shape: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run the sweeps with the reference number of trials")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
