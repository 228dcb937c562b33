"""
Eigensolver Module for adiabat

Finite-difference Hamiltonian -1/2 d^2/dx^2 + V(x) - p*t*x on the interior
grid points (hard walls) and its lowest eigenpairs by bisection plus inverse
iteration on the symmetric tridiagonal matrix.

Operations included:
- build_hamiltonian: instantaneous tridiagonal Hamiltonian
- lowest_eigenpairs: k lowest eigenvalues and gauge-fixed eigenvectors
- dipole_element: <m|x|n>
- ground_state: k=1 shortcut
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.signal import find_peaks

from errors import ConvergenceError
from grid import EigenSolution, Grid, WavefunctionState
from potentials import PotentialSpec, evaluate

eigen_logger = logging.getLogger("AdiabatEigen")

DEGENERACY_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-8
GAUGE_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Symmetric tridiagonal Hamiltonian restricted to the interior points."""

    grid: Grid
    diagonal: np.ndarray
    off_diagonal: float
    time: float = 0.0

    @property
    def size(self) -> int:
        return self.diagonal.size

    def apply(self, v: np.ndarray) -> np.ndarray:
        """H @ v for an interior-point vector."""
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.diagonal)) + 2.0 * abs(self.off_diagonal))


def build_hamiltonian(spec: PotentialSpec, grid: Grid, t: float) -> HamiltonianMatrix:
    """Central-difference Hamiltonian at time t; wall points are excluded."""
    dx = grid.dx
    potential = evaluate(spec, grid, t)[1:-1]
    diagonal = 1.0 / dx ** 2 + potential
    diagonal.flags.writeable = False
    return HamiltonianMatrix(grid, diagonal, -0.5 / dx ** 2, float(t))


def _fix_gauge(v: np.ndarray) -> np.ndarray:
    """Flip v so its first local extremum is positive.

    Extrema below GAUGE_THRESHOLD of the largest magnitude are roundoff in
    the decaying tails and are skipped.
    """
    magnitude = np.abs(v)
    padded = np.concatenate(([0.0], magnitude, [0.0]))
    peaks, _ = find_peaks(padded, height=GAUGE_THRESHOLD * magnitude.max())
    first = int(peaks[0]) - 1 if peaks.size else int(np.argmax(magnitude))
    return -v if v[first] < 0 else v


def residual_norm(H: HamiltonianMatrix, v: np.ndarray, energy: float) -> float:
    return float(np.linalg.norm(H.apply(v) - energy * v))


def degenerate_pairs(energies: np.ndarray) -> List[Tuple[int, int]]:
    gaps = np.diff(energies)
    return [(i, i + 1) for i in np.nonzero(np.abs(gaps) < DEGENERACY_TOLERANCE)[0].tolist()]


def lowest_eigenpairs(H: HamiltonianMatrix, k: int) -> EigenSolution:
    """k lowest eigenpairs, normalized on the full grid, first extremum positive."""
    if not 1 <= k < H.size:
        raise ValueError(f"Requested {k} eigenpairs from a {H.size}x{H.size} matrix")
    off = np.full(H.size - 1, H.off_diagonal)
    try:
        energies, vectors = eigh_tridiagonal(
            H.diagonal,
            off,
            select="i",
            select_range=(0, k - 1),
            lapack_driver="stebz",
        )
    except LinAlgError as e:
        raise ConvergenceError(
            f"Tridiagonal eigensolve failed at t={H.time} (n={H.size}, k={k}, "
            f"diag range [{H.diagonal.min():.6g}, {H.diagonal.max():.6g}]): {e}"
        ) from e

    for pair in degenerate_pairs(energies):
        eigen_logger.warning(f"Near-degenerate levels {pair} at t={H.time}: gap {energies[pair[1]] - energies[pair[0]]:.3e}")

    scale = np.sqrt(H.grid.dx)
    limit = RESIDUAL_TOLERANCE * H.norm_inf()
    states = []
    for i in range(k):
        v = _fix_gauge(vectors[:, i])
        residual = residual_norm(H, v, energies[i])
        if residual > limit:
            raise ConvergenceError(
                f"Eigenpair {i} at t={H.time} has residual {residual:.3e} above {limit:.3e}"
            )
        amplitudes = np.zeros(H.grid.n_points)
        amplitudes[1:-1] = v / scale
        states.append(WavefunctionState(H.grid, amplitudes, H.time))
    return EigenSolution(energies, tuple(states), H.time)


def ground_state(spec: PotentialSpec, grid: Grid, t: float = 0.0) -> WavefunctionState:
    return lowest_eigenpairs(build_hamiltonian(spec, grid, t), 1).states[0]


def dipole_element(sol: EigenSolution, m: int, n: int) -> float:
    """Position matrix element <m|x|n> by the trapezoid rule."""
    psi_m = sol.states[m]
    psi_n = sol.states[n]
    grid = psi_m.grid
    return float(np.real(grid.integrate(np.conj(psi_m.amplitudes) * grid.points * psi_n.amplitudes)))


def wall_probability(psi: WavefunctionState, n_edge: int = 10) -> float:
    """Probability held within n_edge points of either wall."""
    density = np.abs(psi.amplitudes) ** 2
    dx = psi.grid.dx
    return float((density[:n_edge + 1].sum() + density[-(n_edge + 1):].sum()) * dx)
