"""Shared fixtures.

The solver trajectories are session-scoped because several test modules
(and the acceptance suite) reuse the same runs; regenerating them per
test would dominate the wall clock.
"""

import numpy as np
import pytest

from lpnse import Grid, SolverConfig, run, twin_run


@pytest.fixture(scope="session")
def grid2():
    return Grid(2, 32)


@pytest.fixture(scope="session")
def grid3():
    return Grid(3, 32)


@pytest.fixture()
def rng():
    return np.random.default_rng(2024)


@pytest.fixture(scope="session")
def tg2d_traj():
    """2D Taylor-Green, n=64, nu=1, integrated to t=0.5."""
    config = SolverConfig(dim=2, n=64, nu=1.0, dt=1e-3, t_end=0.5,
                          ic="taylor-green", snap_every=10)
    return run(config)


@pytest.fixture(scope="session")
def tg3d_traj():
    """3D Taylor-Green, n=32, nu=1, integrated to t=0.5."""
    config = SolverConfig(dim=3, n=32, nu=1.0, dt=5e-3, t_end=0.5,
                          ic="taylor-green", snap_every=10)
    return run(config)


TWIN_CONFIG = SolverConfig(dim=2, n=64, nu=1.0, dt=2.5e-3, t_end=0.25,
                           ic="taylor-green", snap_every=10)


@pytest.fixture(scope="session")
def twin_pair():
    """Base 2D Taylor-Green plus a delta=1e-4 perturbed twin."""
    return twin_run(TWIN_CONFIG, delta=1e-4, seed=5)
