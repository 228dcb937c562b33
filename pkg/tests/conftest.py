"""Shared grids, potentials and record builders for the test suite."""

import math

import numpy as np
import pytest

from adiabaticity import TrajectoryRecord
from eigensolver import build_hamiltonian, lowest_eigenpairs
from grid import Grid, WavefunctionState
from potentials import Harmonic, PotentialSpec


@pytest.fixture
def coarse_grid():
    """Box [-15, 15] with dx = 0.05."""
    return Grid.symmetric(15.0, 601)


@pytest.fixture
def tiny_grid():
    """Box [-15, 15] with dx = 0.1, for time stepping."""
    return Grid.symmetric(15.0, 301)


@pytest.fixture
def ho():
    return PotentialSpec(Harmonic(0.2), name="ho")


@pytest.fixture
def ho_pairs(ho, coarse_grid):
    return lowest_eigenpairs(build_hamiltonian(ho, coarse_grid, 0.0), 4)


def gaussian(grid: Grid, omega: float, center: float = 0.0) -> WavefunctionState:
    """Harmonic ground state of frequency omega sampled on the grid."""
    x = grid.points
    return WavefunctionState.from_samples(grid, np.exp(-0.5 * omega * (x - center) ** 2))


def record(t: float = 0.0, d_psi_0t: float = 0.0, d_n_0t: float = 0.0, d_psi_gst: float = 0.0,
           d_n_gst: float = 0.0, d_psi_0gs: float = 0.0, d_n_0gs: float = 0.0, epsilon: float = 0.01) -> TrajectoryRecord:
    return TrajectoryRecord(
        t=t,
        d_psi_0t=d_psi_0t,
        d_n_0t=d_n_0t,
        d_psi_gst=d_psi_gst,
        d_n_gst=d_n_gst,
        d_psi_0gs=d_psi_0gs,
        d_n_0gs=d_n_0gs,
        epsilon=epsilon,
        e0=0.1,
        e1=0.3,
        norm=1.0,
    )


SQRT2 = math.sqrt(2.0)
