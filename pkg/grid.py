"""
Grid and Field Module for adiabat

Spatial grid plus the wavefunction, density and eigen-solution value types every
other module builds on. Integrals use the trapezoid rule on the uniform grid,
and the walls at x_min / x_max are hard (amplitudes there are exactly zero).

Operations included:
- density_of: n = |psi|^2 for a single particle
- inner_product: trapezoid overlap <psi1|psi2>
- expectation_x: <x> of a state
- write_field_csv / read_field_csv: "x,value" and "x,re,im" field files
"""

import csv
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid

from errors import GridMismatchError, NormalizationError

grid_logger = logging.getLogger("AdiabatGrid")

NORM_TOLERANCE = 1e-10
ORTHOGONALITY_TOLERANCE = 1e-8

# ─── Grid ───────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Grid:
    """Uniform 1D grid with hard walls at both ends."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"Grid needs x_min < x_max, got {self.x_min} and {self.x_max}")
        if self.n_points < 3:
            raise ValueError(f"Grid needs at least 3 points, got {self.n_points}")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "Grid":
        """Box [-L, +L] sampled with n_points."""
        return cls(-float(half_width), float(half_width), int(n_points))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.x_max - self.x_min)

    @cached_property
    def points(self) -> np.ndarray:
        x = self.x_min + np.arange(self.n_points) * self.dx
        x.flags.writeable = False
        return x

    def integrate(self, values: np.ndarray) -> Union[float, complex]:
        return trapezoid(values, dx=self.dx)

    def describe(self) -> str:
        return f"{self.x_min!r}:{self.x_max!r}:{self.n_points}"


def require_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        raise GridMismatchError(f"Fields live on different grids: {a.describe()} vs {b.describe()}")


def _frozen(values: np.ndarray, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


# ─── Field Types ────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class WavefunctionState:
    """Complex amplitudes on a grid, normalized to one particle.

    The constructor validates and never renormalizes; use from_samples to build
    a state from arbitrary samples.
    """

    grid: Grid
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes, np.complex128)
        if amps.shape != (self.grid.n_points,):
            raise NormalizationError(
                f"Expected {self.grid.n_points} amplitudes, got shape {amps.shape}"
            )
        if amps[0] != 0 or amps[-1] != 0:
            raise NormalizationError("Wavefunction must vanish at both walls")
        norm = float(self.grid.integrate(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"Wavefunction norm {norm!r} deviates from 1 by more than {NORM_TOLERANCE}")
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "time", float(self.time))

    @classmethod
    def from_samples(cls, grid: Grid, values: np.ndarray, time: float = 0.0) -> "WavefunctionState":
        """Zero the wall points and normalize explicitly."""
        amps = np.array(values, dtype=np.complex128, copy=True)
        amps[0] = 0.0
        amps[-1] = 0.0
        norm = float(grid.integrate(np.abs(amps) ** 2))
        if not norm > 0:
            raise NormalizationError("Cannot normalize an identically zero field")
        return cls(grid, amps / np.sqrt(norm), time)

    def norm(self) -> float:
        return float(self.grid.integrate(np.abs(self.amplitudes) ** 2))

    def with_phase(self, theta: float) -> "WavefunctionState":
        return WavefunctionState(self.grid, self.amplitudes * np.exp(1j * theta), self.time)


@dataclass(frozen=True, eq=False)
class DensityProfile:
    """Nonnegative particle density integrating to one."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values, np.float64)
        if vals.shape != (self.grid.n_points,):
            raise NormalizationError(f"Expected {self.grid.n_points} density values, got shape {vals.shape}")
        if np.any(vals < 0):
            raise NormalizationError("Density has negative values")
        total = float(self.grid.integrate(vals))
        if abs(total - 1.0) > NORM_TOLERANCE:
            raise NormalizationError(f"Density integrates to {total!r}, not 1")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Lowest eigenpairs of an instantaneous Hamiltonian, energies ascending."""

    energies: np.ndarray
    states: Tuple[WavefunctionState, ...]
    time: float = 0.0

    def __post_init__(self):
        energies = _frozen(self.energies, np.float64)
        states = tuple(self.states)
        if len(states) != energies.size:
            raise ValueError(f"{energies.size} energies but {len(states)} states")
        if energies.size > 1 and np.any(np.diff(energies) < 0):
            raise ValueError("Eigenvalues must be ascending")
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                overlap = abs(inner_product(states[i], states[j]))
                if overlap >= ORTHOGONALITY_TOLERANCE:
                    raise NormalizationError(f"States {i} and {j} overlap by {overlap:.3e}")
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "states", states)

    @property
    def grid(self) -> Grid:
        return self.states[0].grid

    def __len__(self) -> int:
        return len(self.states)


# ─── Operations ─────────────────────────────────────────────────────────────


def density_of(psi: WavefunctionState) -> DensityProfile:
    """Single-particle density |psi|^2."""
    return DensityProfile(psi.grid, np.abs(psi.amplitudes) ** 2)


def inner_product(psi1: WavefunctionState, psi2: WavefunctionState) -> complex:
    """Trapezoid overlap integral of conj(psi1) * psi2."""
    require_same_grid(psi1.grid, psi2.grid)
    return complex(psi1.grid.integrate(np.conj(psi1.amplitudes) * psi2.amplitudes))


def expectation_x(psi: WavefunctionState) -> float:
    return float(psi.grid.integrate(psi.grid.points * np.abs(psi.amplitudes) ** 2))


# ─── Field Files ────────────────────────────────────────────────────────────


def format_number(value: float) -> str:
    return f"{value:.17g}"


def write_field_csv(
    path: Union[str, Path],
    grid: Grid,
    values: np.ndarray,
    comments: Sequence[str] = (),
) -> Path:
    """Write a real field as "x,value" or a complex one as "x,re,im"."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values)
    is_complex = np.iscomplexobj(values)
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "re", "im"] if is_complex else ["x", "value"])
        for x, v in zip(grid.points, values):
            if is_complex:
                writer.writerow([format_number(x), format_number(v.real), format_number(v.imag)])
            else:
                writer.writerow([format_number(x), format_number(v)])
    grid_logger.debug(f"Wrote field with {values.size} points to {path}")
    return path


def read_field_csv(path: Union[str, Path]) -> Tuple[np.ndarray, np.ndarray]:
    """Read a field file back as (x, values); complex files give complex values."""
    xs: List[float] = []
    vals: List[complex] = []
    is_complex: Optional[bool] = None
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        for row in rows:
            if is_complex is None:
                is_complex = len(row) == 3
                continue
            xs.append(float(row[0]))
            vals.append(complex(float(row[1]), float(row[2])) if is_complex else float(row[1]))
    dtype = np.complex128 if is_complex else np.float64
    return np.array(xs), np.array(vals, dtype=dtype)
