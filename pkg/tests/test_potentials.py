import numpy as np
import pytest

from conftest import gaussian
from errors import ConfigError, GridMismatchError
from grid import Grid, density_of
from potentials import (
    Harmonic,
    PotentialSpec,
    RandomFourier,
    SplitMix64,
    Tabulated,
    confinement,
    evaluate,
    fourier_part,
    generate_random,
    microwell_occupation,
    read_potential,
    reflect_and_scale,
    static_part,
    write_potential,
)


def test_splitmix_reference_vector():
    rng = SplitMix64(0)
    assert rng.next_u64() == 0xE220A8397B1DCDAF
    assert rng.next_u64() == 0x6E789E6AA1B965F4


def test_splitmix_doubles_are_unit_interval():
    rng = SplitMix64(12345)
    draws = [rng.next_double() for _ in range(1000)]
    assert min(draws) >= 0.0 and max(draws) < 1.0


def test_generate_random_draw_order_and_bounds():
    spec = generate_random(7, 0.5, 15.0)
    rng = SplitMix64(7)
    expected = [rng.uniform(-5.0, 5.0) for _ in range(6)]
    assert spec.variant.a == tuple(expected[:3])
    assert spec.variant.b == tuple(expected[3:])
    assert spec.seed == 7
    assert all(abs(c) <= 5.0 for c in spec.variant.a + spec.variant.b)


def test_generate_random_is_deterministic():
    assert generate_random(3, 0.1, 15.0) == generate_random(3, 0.1, 15.0)
    assert generate_random(3, 0.1, 15.0) != generate_random(4, 0.1, 15.0)


def test_first_coefficient_is_uniform_over_seeds():
    draws = np.array([generate_random(seed, 0.1, 15.0).variant.a[0] for seed in range(1, 10001)])
    assert abs(draws.mean()) < 0.15
    assert -5.0 <= draws.min() <= -4.9
    assert 4.9 <= draws.max() <= 5.0


@pytest.mark.parametrize("scale", [0.1, 0.5])
def test_confinement_dominates_at_the_walls(scale):
    half_width = 15.0
    walls = np.array([-half_width, half_width])
    floor = half_width ** 10 / 1e11 - scale * 2.0 * half_width
    for seed in range(1, 201):
        variant = generate_random(seed, scale, half_width).variant
        values = confinement(walls) + fourier_part(variant, walls)
        assert np.all(values >= 0.9 * floor)


def test_random_fourier_rejects_large_coefficients():
    with pytest.raises(ValueError):
        RandomFourier(0.1, 15.0, (6.0, 0.0, 0.0), (0.0, 0.0, 0.0))


def test_harmonic_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        Harmonic(0.0)


def test_confinement_scale():
    assert confinement(np.array([10.0]))[0] == pytest.approx(0.1)


def test_evaluate_adds_field_ramp(coarse_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.01)
    x = coarse_grid.points
    np.testing.assert_allclose(evaluate(spec, coarse_grid, 3.0), 0.02 * x ** 2 - 0.03 * x, atol=1e-14)
    np.testing.assert_array_equal(evaluate(spec, coarse_grid, 0.0), static_part(spec, coarse_grid))


def test_reflect_and_scale_mirrors_fourier_part(coarse_grid):
    spec = generate_random(11, 0.5, 15.0)
    mirrored = reflect_and_scale(spec, 5.0)
    x = coarse_grid.points
    np.testing.assert_allclose(fourier_part(mirrored.variant, x), fourier_part(spec.variant, -x) / 5.0, atol=1e-12)
    assert mirrored.seed is None


def test_reflect_with_unit_factor_is_a_mirror(coarse_grid):
    spec = generate_random(11, 0.5, 15.0)
    mirrored = reflect_and_scale(spec, 1.0)
    x = coarse_grid.points
    expected = fourier_part(spec.variant, -x) + confinement(x)
    np.testing.assert_allclose(evaluate(mirrored, coarse_grid, 0.0), expected, atol=1e-12)


def test_reflect_twice_with_negative_factor_restores_fourier_part(coarse_grid):
    spec = generate_random(11, 0.5, 15.0)
    twice = reflect_and_scale(reflect_and_scale(spec, -1.0), -1.0)
    x = coarse_grid.points
    np.testing.assert_allclose(fourier_part(twice.variant, x), fourier_part(spec.variant, x), atol=1e-12)


def test_reflect_and_scale_argument_errors():
    with pytest.raises(ValueError):
        reflect_and_scale(generate_random(1, 0.5, 15.0), 0.0)
    with pytest.raises(ValueError):
        reflect_and_scale(PotentialSpec(Harmonic(0.2)), 5.0)


def test_tabulated_needs_matching_grid(coarse_grid, tiny_grid):
    spec = PotentialSpec(Tabulated(coarse_grid, np.zeros(coarse_grid.n_points)))
    with pytest.raises(GridMismatchError):
        static_part(spec, tiny_grid)
    with pytest.raises(ValueError):
        Tabulated(coarse_grid, np.zeros(10))


def test_single_basin_holds_everything(coarse_grid):
    spec = PotentialSpec(Harmonic(0.2))
    weights = microwell_occupation(spec, coarse_grid, density_of(gaussian(coarse_grid, 0.2)))
    assert weights.shape == (1,)
    assert weights[0] == pytest.approx(1.0, abs=1e-10)


def test_basin_weights_sum_to_one(coarse_grid):
    spec = generate_random(5, 0.5, 15.0)
    weights = microwell_occupation(spec, coarse_grid, density_of(gaussian(coarse_grid, 0.05)))
    assert weights.sum() == pytest.approx(1.0, abs=1e-3)
    assert np.all(weights >= 0)


def test_random_potential_file_is_bit_exact(tmp_path):
    spec = PotentialSpec(generate_random(9, 0.5, 15.0).variant, ramp_rate=2.5e-4, name="r_test")
    path = write_potential(tmp_path / "r.pot", spec)
    assert read_potential(path) == spec


def test_seed_only_file_regenerates(tmp_path):
    path = tmp_path / "seed.pot"
    path.write_text("variant = random_fourier\nlambda = 0.1\nL = 15\nseed = 4\n")
    assert read_potential(path).variant == generate_random(4, 0.1, 15.0).variant


def test_tabulated_file_round_trip(tmp_path):
    grid = Grid.symmetric(5.0, 51)
    values = 0.5 * grid.points ** 2
    path = write_potential(tmp_path / "tab.pot", PotentialSpec(Tabulated(grid, values)))
    spec = read_potential(path)
    assert spec.variant.grid == grid
    np.testing.assert_array_equal(spec.variant.values, values)


def test_bad_potential_files_name_the_key(tmp_path):
    path = tmp_path / "bad.pot"
    path.write_text("omega = 0.2\n")
    with pytest.raises(ConfigError) as info:
        read_potential(path)
    assert "variant" in info.value.fields

    path.write_text("variant = harmonic\nomega = fast\n")
    with pytest.raises(ConfigError) as info:
        read_potential(path)
    assert "omega" in info.value.fields

    with pytest.raises(ConfigError):
        read_potential(tmp_path / "missing.pot")
