import math

import numpy as np
import pytest

from eigensolver import (
    _fix_gauge,
    build_hamiltonian,
    degenerate_pairs,
    dipole_element,
    ground_state,
    lowest_eigenpairs,
    residual_norm,
    wall_probability,
)
from grid import Grid, inner_product
from potentials import Harmonic, PotentialSpec


def test_harmonic_levels(ho_pairs):
    for n, energy in enumerate(ho_pairs.energies):
        assert energy == pytest.approx(0.2 * (n + 0.5), abs=1e-3)


def test_harmonic_dipole(ho_pairs):
    assert abs(dipole_element(ho_pairs, 1, 0)) == pytest.approx(1.0 / math.sqrt(0.4), abs=1e-3)
    assert abs(dipole_element(ho_pairs, 2, 0)) < 1e-10


def test_eigenvectors_are_orthonormal(ho_pairs):
    for i, psi in enumerate(ho_pairs.states):
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)
        for other in ho_pairs.states[i + 1:]:
            assert abs(inner_product(psi, other)) < 1e-10


def test_gauge_makes_first_lobe_positive(ho_pairs):
    for psi in ho_pairs.states:
        amps = psi.amplitudes.real
        magnitude = np.abs(amps)
        significant = magnitude > 1e-3 * magnitude.max()
        rising = np.flatnonzero(significant[:-1] & (magnitude[1:] < magnitude[:-1]))
        assert amps[rising[0]] > 0


def test_gauge_uses_the_first_extremum_not_the_first_sample():
    # the leading 0.002 sits on the rise to the -0.003 extremum
    v = np.array([0.0, 0.002, -0.003, -0.001, 0.5, 1.0, 0.5, 0.0])
    fixed = _fix_gauge(v)
    assert fixed[2] == 0.003
    np.testing.assert_array_equal(np.abs(fixed), np.abs(v))
    np.testing.assert_array_equal(_fix_gauge(fixed), fixed)


def test_gauge_skips_roundoff_in_the_tails():
    v = np.array([-1e-9, 2e-9, -1e-9, 0.4, 1.0, 0.4, 0.0])
    assert _fix_gauge(v)[4] == 1.0
    assert _fix_gauge(-v)[4] == 1.0


def test_residuals_are_small(ho, coarse_grid, ho_pairs):
    H = build_hamiltonian(ho, coarse_grid, 0.0)
    for energy, psi in zip(ho_pairs.energies, ho_pairs.states):
        v = psi.amplitudes.real[1:-1] * math.sqrt(coarse_grid.dx)
        assert residual_norm(H, v, energy) < 1e-8 * H.norm_inf()


def test_hamiltonian_includes_ramp(coarse_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.01)
    H0 = build_hamiltonian(spec, coarse_grid, 0.0)
    H5 = build_hamiltonian(spec, coarse_grid, 5.0)
    np.testing.assert_allclose(H0.diagonal - H5.diagonal, 0.05 * coarse_grid.points[1:-1], atol=1e-12)
    assert H0.off_diagonal == pytest.approx(-0.5 / coarse_grid.dx ** 2)
    assert H0.size == coarse_grid.n_points - 2


def test_ramp_shifts_ground_state(coarse_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.01)
    psi = ground_state(spec, coarse_grid, 4.0)
    # Minimum of 0.02 x^2 - 0.04 x sits at x = 1
    mean_x = float(coarse_grid.integrate(coarse_grid.points * np.abs(psi.amplitudes) ** 2))
    assert mean_x == pytest.approx(1.0, abs=1e-6)
    assert psi.time == 4.0


def test_k_must_fit_matrix(ho, coarse_grid):
    H = build_hamiltonian(ho, coarse_grid, 0.0)
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, 0)
    with pytest.raises(ValueError):
        lowest_eigenpairs(H, H.size)


def test_degenerate_pairs():
    assert degenerate_pairs(np.array([0.1, 0.1 + 1e-14, 0.5])) == [(0, 1)]
    assert degenerate_pairs(np.array([0.1, 0.3, 0.5])) == []


def test_wall_probability_flags_confined_states():
    grid = Grid.symmetric(3.0, 121)
    wide = ground_state(PotentialSpec(Harmonic(0.05)), grid)
    narrow = ground_state(PotentialSpec(Harmonic(4.0)), grid)
    assert wall_probability(wide) > 1e-6
    assert wall_probability(narrow) < 1e-6


def test_default_grid_levels_and_dipole():
    grid = Grid.symmetric(15.0, 1201)
    sol = lowest_eigenpairs(build_hamiltonian(PotentialSpec(Harmonic(0.2)), grid, 0.0), 6)
    for n, energy in enumerate(sol.energies):
        assert abs(energy - 0.2 * (n + 0.5)) <= 1e-3
    assert abs(dipole_element(sol, 1, 0)) == pytest.approx(1.0 / math.sqrt(0.4), abs=1e-4)
