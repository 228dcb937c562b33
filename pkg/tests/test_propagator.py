import math

import numpy as np
import pytest

from eigensolver import build_hamiltonian, ground_state, lowest_eigenpairs
from errors import ConfigError
from grid import expectation_x, read_field_csv
from metrics import wavefunction_distance
from potentials import Harmonic, PotentialSpec
from propagator import (
    EvolutionConfig,
    FrameWriter,
    StateRecorder,
    evolve,
    fan_out,
    instantaneous_eigenpairs,
    instantaneous_gs_track,
    superposition,
)


def _config(grid, spec, dt=0.01, t_max=1.0, stride=10, initial=None):
    if initial is None:
        initial = ground_state(spec, grid, 0.0)
    return EvolutionConfig(dt=dt, t_max=t_max, output_stride=stride, spec=spec, grid=grid, initial=initial)


def test_config_rejects_coarse_steps(tiny_grid, ho):
    with pytest.raises(ConfigError):
        _config(tiny_grid, ho, dt=0.5)
    with pytest.raises(ConfigError):
        _config(tiny_grid, ho, t_max=0.0)
    with pytest.raises(ConfigError):
        _config(tiny_grid, ho, stride=0)


def test_stationary_state_only_gains_a_phase(tiny_grid, ho):
    config = _config(tiny_grid, ho, t_max=5.0, stride=100)
    final = evolve(config)
    assert final.time == pytest.approx(5.0)
    assert wavefunction_distance(config.initial, final) < 1e-6
    assert final.norm() == pytest.approx(1.0, abs=1e-10)


def test_recorder_sees_every_stride(tiny_grid, ho):
    config = _config(tiny_grid, ho, t_max=1.0, stride=10)
    recorder = StateRecorder()
    evolve(config, recorder)
    times = [s.time for s in recorder.states]
    np.testing.assert_allclose(times, config.output_times(), atol=1e-12)
    assert len(times) == 11
    assert times[0] == 0.0


def test_norm_is_conserved_under_ramp(tiny_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.05)
    recorder = StateRecorder()
    evolve(_config(tiny_grid, spec, t_max=10.0, stride=50), recorder)
    for state in recorder.states:
        assert abs(state.norm() - 1.0) < 1e-10


def test_reverse_run_returns_to_start(tiny_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.02)
    forward = _config(tiny_grid, spec, t_max=3.0, stride=100)
    final = evolve(forward)
    backward = _config(tiny_grid, spec, t_max=3.0, stride=100, initial=final)
    start = evolve(backward, reverse=True)
    assert start.time == pytest.approx(0.0, abs=1e-12)
    assert wavefunction_distance(forward.initial, start) < 1e-8


def test_superposition_beats_at_the_level_spacing(tiny_grid, ho):
    sol = lowest_eigenpairs(build_hamiltonian(ho, tiny_grid, 0.0), 2)
    gap = float(sol.energies[1] - sol.energies[0])
    psi = superposition(sol.states, [1.0, 1.0])
    half_period = math.pi / gap
    config = EvolutionConfig(dt=0.005, t_max=half_period, output_stride=1000, spec=ho, grid=tiny_grid, initial=psi)
    final = evolve(config)
    x0 = expectation_x(psi)
    assert abs(x0) > 1.0
    # n_steps rounds t_max to a whole number of steps
    drift = gap * (config.n_steps * config.dt - half_period)
    assert expectation_x(final) == pytest.approx(-x0 * math.cos(drift), rel=1e-3)


def test_time_step_convergence_is_second_order(tiny_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.05)
    finals = [evolve(_config(tiny_grid, spec, dt=dt, t_max=4.0, stride=10 ** 6)) for dt in (0.01, 0.005, 0.0025)]
    coarse = wavefunction_distance(finals[0], finals[2])
    fine = wavefunction_distance(finals[1], finals[2])
    assert coarse / fine > 2.0 ** 1.8 * 0.9


def test_frame_writer_names_frames_by_time(tmp_path, tiny_grid, ho):
    config = _config(tiny_grid, ho, t_max=0.1, stride=5)
    recorder = StateRecorder()
    frames = FrameWriter(tmp_path, ["adiabat test"])
    evolve(config, fan_out(recorder, frames, None))
    names = sorted(p.name for p in (tmp_path / "frames").iterdir())
    assert names == ["t_0.000.csv", "t_0.050.csv", "t_0.100.csv"]
    assert frames.count == len(recorder.states) == 3
    xs, values = read_field_csv(tmp_path / "frames" / "t_0.000.csv")
    assert xs.size == tiny_grid.n_points
    assert tiny_grid.integrate(values) == pytest.approx(1.0, abs=1e-10)


def test_instantaneous_track_follows_the_field(tiny_grid):
    spec = PotentialSpec(Harmonic(0.2), ramp_rate=0.01)
    config = _config(tiny_grid, spec, t_max=4.0)
    track = instantaneous_gs_track(config, [0.0, 2.0, 4.0])
    # Minimum of 0.02 x^2 - 0.01 t x sits at x = t / 4
    for state, t in zip(track, (0.0, 2.0, 4.0)):
        assert expectation_x(state) == pytest.approx(t / 4.0, abs=1e-6)
        assert state.time == t


def test_instantaneous_times_must_lie_in_run(tiny_grid, ho):
    config = _config(tiny_grid, ho, t_max=1.0)
    with pytest.raises(ValueError):
        instantaneous_eigenpairs(config, [0.0, 2.0])
    assert len(instantaneous_eigenpairs(config, [0.0, 1.0], k=3)[0]) == 3
