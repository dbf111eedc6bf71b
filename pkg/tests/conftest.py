"""Shared grids and signals."""

from __future__ import annotations

import pytest
from hypothesis import settings

from affqha import make_grids
from affqha.signals import laguerre, log_gaussian

# numerical examples have uneven cost; a per-example deadline only adds flakiness
settings.register_profile("affqha", deadline=None)
settings.load_profile("affqha")


@pytest.fixture(scope="session")
def grids():
    """The desk-scale default grids."""
    return make_grids()


@pytest.fixture(scope="session")
def lg(grids):
    return grids[0]


@pytest.fixture(scope="session")
def ag(grids):
    return grids[1]


@pytest.fixture(scope="session")
def small_grids():
    """A coarse pair for tests that only need structure, not accuracy."""
    return make_grids(-8.0, 8.0, 128, 4.0, 64, -3.0, 3.0, 48)


@pytest.fixture(scope="session")
def L01(lg):
    return laguerre(lg, 0, 1.0)


@pytest.fixture(scope="session")
def L11(lg):
    return laguerre(lg, 1, 1.0)


@pytest.fixture(scope="session")
def L02(lg):
    return laguerre(lg, 0, 2.0)


@pytest.fixture(scope="session")
def gauss(lg):
    return log_gaussian(lg, 0.2, 0.8)
