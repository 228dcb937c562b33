import itertools
import math

import numpy as np
import pytest

from conftest import gaussian
from eigensolver import ground_state
from errors import FitError, MetricError
from grid import Grid, density_of
from metrics import (
    SHO_LIMIT_RATIO,
    MetricPair,
    density_distance,
    fit_slope_through_origin,
    metric_pair,
    sho_distances,
    sho_ratio,
    wavefunction_distance,
)
from potentials import Harmonic, PotentialSpec


def test_identical_states_are_at_zero(coarse_grid):
    psi = gaussian(coarse_grid, 0.2)
    assert wavefunction_distance(psi, psi) == 0.0
    assert density_distance(density_of(psi), density_of(psi)) == 0.0


def test_wavefunction_distance_ignores_global_phase(coarse_grid):
    psi = gaussian(coarse_grid, 0.2, center=0.5)
    assert wavefunction_distance(psi, psi.with_phase(2.1)) == pytest.approx(0.0, abs=1e-7)


def test_orthogonal_states_reach_the_bound(ho_pairs):
    d = metric_pair(ho_pairs.states[0], ho_pairs.states[1])
    assert d.d_psi == pytest.approx(math.sqrt(2.0), abs=1e-8)
    assert 0.0 < d.d_n <= 2.0


def test_distance_scales_with_particle_number(coarse_grid):
    psi1 = gaussian(coarse_grid, 0.2)
    psi2 = gaussian(coarse_grid, 0.4)
    one = wavefunction_distance(psi1, psi2)
    assert wavefunction_distance(psi1, psi2, n_particles=2) == pytest.approx(math.sqrt(2.0) * one, rel=1e-12)


def test_distances_are_symmetric(coarse_grid):
    psi1 = gaussian(coarse_grid, 0.2)
    psi2 = gaussian(coarse_grid, 0.7, center=-1.0)
    assert wavefunction_distance(psi1, psi2) == pytest.approx(wavefunction_distance(psi2, psi1), abs=1e-15)
    assert density_distance(density_of(psi1), density_of(psi2)) == pytest.approx(
        density_distance(density_of(psi2), density_of(psi1)), abs=1e-15
    )


def test_metric_pair_rejects_negative_values():
    with pytest.raises(MetricError):
        MetricPair(-0.1, 0.0)


def test_sho_reference_pair_matches_closed_form():
    """Frequency ratio 2: overlap sqrt(2) nu^(1/4) / sqrt(nu + 1), same for nu = 1/2."""
    pair = sho_distances(2.0)
    overlap = 2.0 ** 0.5 * 2.0 ** 0.25 / math.sqrt(3.0)
    assert pair.d_psi == pytest.approx(math.sqrt(2.0 - 2.0 * overlap), rel=1e-12)
    assert sho_distances(0.5).d_psi == pytest.approx(pair.d_psi, rel=1e-12)


@pytest.mark.parametrize("reference, nu", [(2.0, 0.05), (2.0, 0.1), (0.4, 0.5), (0.4, 2.0), (0.4, 5.0), (0.2, 20.0)])
def test_sho_distances_match_grid(reference, nu):
    grid = Grid.symmetric(15.0, 1201)
    psi1 = ground_state(PotentialSpec(Harmonic(reference)), grid)
    psi2 = ground_state(PotentialSpec(Harmonic(reference * nu)), grid)
    gridded = metric_pair(psi1, psi2)
    exact = sho_distances(nu)
    assert gridded.d_psi == pytest.approx(exact.d_psi, abs=1e-3)
    assert gridded.d_n == pytest.approx(exact.d_n, abs=1e-3)
    assert gridded.d_n / gridded.d_psi == pytest.approx(sho_ratio(nu), abs=1e-3)


def test_sho_ratio_limit():
    expected = 4.0 / math.sqrt(math.e * math.pi)
    assert SHO_LIMIT_RATIO == pytest.approx(1.3687931, abs=1e-7)
    assert sho_ratio(1.0 + 1e-7) == pytest.approx(expected, abs=1e-6)
    assert sho_ratio(1.0 - 1e-7) == pytest.approx(expected, abs=1e-6)
    assert sho_ratio(1.001) == pytest.approx(expected, abs=1e-3)


def test_sho_ratio_rejects_nonpositive():
    with pytest.raises(ValueError):
        sho_ratio(0.0)
    with pytest.raises(ValueError):
        sho_distances(-1.0)


def test_sho_identical_oscillators():
    assert sho_distances(1.0) == MetricPair(0.0, 0.0)


def test_fit_recovers_exact_line():
    points = [MetricPair(x, 1.5 * x) for x in np.linspace(0.05, 0.5, 10)]
    slope, r2 = fit_slope_through_origin(points)
    assert slope == pytest.approx(1.5, rel=1e-12)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_fit_with_scatter_has_lower_r_squared():
    points = [MetricPair(0.1, 0.12), MetricPair(0.2, 0.35), MetricPair(0.3, 0.42)]
    slope, r2 = fit_slope_through_origin(points)
    assert 1.3 < slope < 1.5
    assert 0.9 < r2 < 1.0


def test_fit_needs_usable_points():
    with pytest.raises(FitError):
        fit_slope_through_origin([])
    with pytest.raises(FitError):
        fit_slope_through_origin([MetricPair(0.0, 0.0), MetricPair(0.0, 0.1)])
    slope, _ = fit_slope_through_origin([MetricPair(0.2, 0.3)])
    assert slope == pytest.approx(1.5)


@pytest.mark.parametrize("nu", [1.0 + 1e-5, 1.0 - 1e-5, 1.0 + 2e-6, 1.0 - 2e-6, 1.000002, 0.999997])
def test_sho_ratio_is_smooth_next_to_the_limit(nu):
    assert abs(sho_ratio(nu) - SHO_LIMIT_RATIO) < 1e-6


def test_sho_wavefunction_distance_keeps_its_digits():
    # d_psi ~ |nu - 1| / (2 sqrt 2) for nu close to 1
    for delta in (1e-5, 1e-7, 1e-9):
        assert sho_distances(1.0 + delta).d_psi == pytest.approx(delta / (2.0 * math.sqrt(2.0)), rel=1e-4)


def test_triangle_inequality_on_sampled_states(coarse_grid):
    rng = np.random.default_rng(11)
    states = [
        gaussian(coarse_grid, float(w), center=float(c)).with_phase(float(phase))
        for w, c, phase in zip(rng.uniform(0.05, 1.0, 8), rng.uniform(-2.0, 2.0, 8), rng.uniform(0, 6.0, 8))
    ]
    densities = [density_of(psi) for psi in states]
    for a, b, c in itertools.permutations(range(len(states)), 3):
        d_ac = wavefunction_distance(states[a], states[c])
        assert d_ac <= wavefunction_distance(states[a], states[b]) + wavefunction_distance(states[b], states[c]) + 1e-12
        n_ac = density_distance(densities[a], densities[c])
        assert n_ac <= density_distance(densities[a], densities[b]) + density_distance(densities[b], densities[c]) + 1e-12
