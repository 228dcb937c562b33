"""
Propagator Module for adiabat

Crank-Nicolson time stepping of the wavefunction under the ramped Hamiltonian,
with the Hamiltonian frozen at the midpoint of each step. The scheme is unitary
for the real symmetric tridiagonal H, so the norm is checked, never restored.

Operations included:
- evolve: propagate an EvolutionConfig, feeding every output state to a sink
- instantaneous_gs_track / instantaneous_eigenpairs: frozen-time eigenstates
- FrameWriter / StateRecorder: sinks for frame export and in-memory runs
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
from scipy.linalg import solve_banded

from eigensolver import build_hamiltonian, lowest_eigenpairs, wall_probability
from errors import ConfigError, NormDriftError, NormalizationError
from grid import EigenSolution, Grid, WavefunctionState, density_of, write_field_csv
from potentials import PotentialSpec, static_part

propagator_logger = logging.getLogger("AdiabatPropagator")

MAX_DT = 0.01
NORM_ABORT = 1e-8
WALL_FLAG = 1e-6

StateSink = Callable[[WavefunctionState], None]


@dataclass(frozen=True, eq=False)
class EvolutionConfig:
    dt: float
    t_max: float
    output_stride: int
    spec: PotentialSpec
    grid: Grid
    initial: WavefunctionState

    def __post_init__(self):
        problems = []
        if not 0 < self.dt <= MAX_DT:
            problems.append(f"dt must lie in (0, {MAX_DT}], got {self.dt}")
        if not self.t_max > 0:
            problems.append(f"t_max must be positive, got {self.t_max}")
        if self.output_stride < 1:
            problems.append(f"output_stride must be at least 1, got {self.output_stride}")
        if self.initial.grid != self.grid:
            problems.append("initial state is not on the evolution grid")
        if problems:
            raise ConfigError("; ".join(problems), fields=("dt", "t_max", "output_stride"))

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def output_times(self) -> np.ndarray:
        """Times at which evolve hands states to its sink."""
        steps = np.arange(0, self.n_steps + 1, self.output_stride)
        return steps * self.dt


# ─── Sinks ──────────────────────────────────────────────────────────────────


@dataclass
class StateRecorder:
    """Keeps every emitted state in memory."""

    states: List[WavefunctionState] = field(default_factory=list)

    def __call__(self, state: WavefunctionState) -> None:
        self.states.append(state)


class FrameWriter:
    """Writes one density CSV per output time into frames/t_<time>.csv."""

    def __init__(self, out_dir: Union[str, Path], comments: Sequence[str] = ()):
        self.frame_dir = Path(out_dir) / "frames"
        self.comments = tuple(comments)
        self.count = 0

    def __call__(self, state: WavefunctionState) -> None:
        path = self.frame_dir / f"t_{state.time:.3f}.csv"
        write_field_csv(path, state.grid, density_of(state).values, self.comments)
        self.count += 1


def fan_out(*sinks: Optional[StateSink]) -> StateSink:
    active = [s for s in sinks if s is not None]

    def _sink(state: WavefunctionState) -> None:
        for s in active:
            s(state)

    return _sink


# ─── Time Stepping ──────────────────────────────────────────────────────────


class _CrankNicolson:
    """Builds and solves the banded system for one step of signed length h."""

    def __init__(self, spec: PotentialSpec, grid: Grid):
        self.x = grid.points[1:-1]
        self.static_diag = 1.0 / grid.dx ** 2 + static_part(spec, grid)[1:-1]
        self.off = -0.5 / grid.dx ** 2
        self.ramp = spec.ramp_rate
        self.bands = np.zeros((3, self.x.size), dtype=np.complex128)

    def step(self, psi: np.ndarray, t: float, h: float) -> np.ndarray:
        t_mid = t + 0.5 * h
        diag = self.static_diag - self.ramp * t_mid * self.x if self.ramp else self.static_diag
        half = 0.5j * h
        rhs = (1.0 - half * diag) * psi
        rhs[:-1] -= half * self.off * psi[1:]
        rhs[1:] -= half * self.off * psi[:-1]
        self.bands[0, 1:] = half * self.off
        self.bands[1, :] = 1.0 + half * diag
        self.bands[2, :-1] = half * self.off
        return solve_banded((1, 1), self.bands, rhs, check_finite=False)


def _as_state(grid: Grid, interior: np.ndarray, t: float) -> WavefunctionState:
    amplitudes = np.zeros(grid.n_points, dtype=np.complex128)
    amplitudes[1:-1] = interior
    try:
        return WavefunctionState(grid, amplitudes, t)
    except NormalizationError as e:
        raise NormDriftError(f"State at t={t} cannot be represented: {e}") from e


def _emit(sink: StateSink, grid: Grid, interior: np.ndarray, t: float) -> WavefunctionState:
    state = _as_state(grid, interior, t)
    sink(state)
    return state


def evolve(config: EvolutionConfig, sink: Optional[StateSink] = None, reverse: bool = False) -> WavefunctionState:
    """Propagate config.initial for n_steps steps of dt and return the final state.

    With reverse=True the run steps backwards in time starting from
    config.initial.time, using the same midpoint Hamiltonians.
    """
    sink = sink or (lambda state: None)
    grid = config.grid
    stepper = _CrankNicolson(config.spec, grid)
    h = -config.dt if reverse else config.dt
    t0 = config.initial.time
    psi = np.array(config.initial.amplitudes[1:-1])
    worst_drift = 0.0

    propagator_logger.info(
        f"Evolving {config.spec.label()} for {config.n_steps} steps of dt={h} "
        f"(p={config.spec.ramp_rate:.6g}, grid {grid.describe()})"
    )
    state = _emit(sink, grid, psi, t0)
    for j in range(1, config.n_steps + 1):
        psi = stepper.step(psi, t0 + (j - 1) * h, h)
        drift = abs(float(np.vdot(psi, psi).real) * grid.dx - 1.0)
        worst_drift = max(worst_drift, drift)
        if drift > NORM_ABORT:
            raise NormDriftError(
                f"Norm drifted by {drift:.3e} at step {j} (t={t0 + j * h:.6g}); "
                f"dt={config.dt} or dx={grid.dx} is too coarse"
            )
        if j % config.output_stride == 0:
            state = _emit(sink, grid, psi, t0 + j * h)
        elif j == config.n_steps:
            state = _as_state(grid, psi, t0 + j * h)

    propagator_logger.info(f"Evolution finished at t={state.time:.6g}, worst norm drift {worst_drift:.2e}")
    return state


# ─── Instantaneous Eigenstates ──────────────────────────────────────────────


def _check_times(config: EvolutionConfig, times: Sequence[float]) -> None:
    tol = 1e-9 * max(1.0, config.t_max)
    for t in times:
        if t < -tol or t > config.t_max + tol:
            raise ValueError(f"Time {t} outside [0, {config.t_max}]")


def instantaneous_eigenpairs(config: EvolutionConfig, times: Sequence[float], k: int = 2) -> List[EigenSolution]:
    """Lowest k eigenpairs of the frozen Hamiltonian at each time."""
    _check_times(config, times)
    solutions = []
    flagged = False
    for t in times:
        sol = lowest_eigenpairs(build_hamiltonian(config.spec, config.grid, t), k)
        if not flagged and wall_probability(sol.states[0]) > WALL_FLAG:
            propagator_logger.warning(
                f"Instantaneous GS of {config.spec.label()} reaches the box wall at t={t:.6g}"
            )
            flagged = True
        solutions.append(sol)
    return solutions


def instantaneous_gs_track(config: EvolutionConfig, times: Sequence[float]) -> List[WavefunctionState]:
    return [sol.states[0] for sol in instantaneous_eigenpairs(config, times, k=1)]


def superposition(states: Sequence[WavefunctionState], weights: Sequence[complex]) -> WavefunctionState:
    amplitudes = sum(w * s.amplitudes for w, s in zip(weights, states))
    return WavefunctionState.from_samples(states[0].grid, amplitudes, states[0].time)
