"""
Metrics Module for adiabat

Natural distances between wavefunctions (phase-invariant) and densities (L1),
the closed-form density/wavefunction distance ratio for two harmonic ground
states, and the through-origin slope fit used by the ground-state studies.

Operations included:
- wavefunction_distance: sqrt(2N - 2N|<psi1|psi2>|)
- density_distance: integral of |n1 - n2|
- sho_ratio / sho_distances: analytic harmonic-oscillator values
- fit_slope_through_origin: least-squares D_n = b * D_psi
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.special import erf

from errors import FitError, MetricError
from grid import DensityProfile, WavefunctionState, require_same_grid, density_of, inner_product

metrics_logger = logging.getLogger("AdiabatMetrics")

RADICAND_SLACK = 1e-12
SHO_LIMIT_WIDTH = 1e-6
SHO_LIMIT_RATIO = 4.0 / math.sqrt(math.e * math.pi)


@dataclass(frozen=True)
class MetricPair:
    d_psi: float
    d_n: float

    def __post_init__(self):
        if self.d_psi < 0 or self.d_n < 0:
            raise MetricError(f"Distances must be nonnegative, got ({self.d_psi}, {self.d_n})")


def wavefunction_distance(psi1: WavefunctionState, psi2: WavefunctionState, n_particles: int = 1) -> float:
    """Phase-invariant distance; states are stored normalized to one, so the overlap is scaled by N.

    The overlap is divided by the quadrature norms of both states, so identical
    states sit at exactly zero and the stored-norm tolerance never reaches the
    square root.
    """
    norm1 = inner_product(psi1, psi1).real
    norm2 = inner_product(psi2, psi2).real
    overlap = abs(inner_product(psi1, psi2)) / math.sqrt(norm1 * norm2) * n_particles
    radicand = 2.0 * n_particles - 2.0 * overlap
    if radicand < 0:
        if radicand < -RADICAND_SLACK:
            raise MetricError(f"Negative radicand {radicand:.3e}: inputs are not normalized")
        return 0.0
    return math.sqrt(radicand)


def density_distance(n1: DensityProfile, n2: DensityProfile) -> float:
    require_same_grid(n1.grid, n2.grid)
    return float(n1.grid.integrate(np.abs(n1.values - n2.values)))


def metric_pair(psi1: WavefunctionState, psi2: WavefunctionState, n_particles: int = 1) -> MetricPair:
    return MetricPair(
        wavefunction_distance(psi1, psi2, n_particles),
        density_distance(density_of(psi1), density_of(psi2)),
    )


# ─── Harmonic Oscillator Closed Forms ───────────────────────────────────────


def sho_distances(nu: float) -> MetricPair:
    """Analytic (D_psi, D_n) of two harmonic ground states with frequency ratio nu."""
    if not nu > 0:
        raise ValueError(f"Frequency ratio must be positive, got {nu}")
    if nu == 1.0:
        return MetricPair(0.0, 0.0)
    # overlap^2 = q = 2 sqrt(nu)/(nu + 1), so 2 - 2 overlap = 2 (1 - q)/(1 + overlap)
    # with 1 - q = (sqrt(nu) - 1)^2/(nu + 1); no cancellation near nu = 1
    q = 2.0 * math.sqrt(nu) / (nu + 1.0)
    root_gap = (nu - 1.0) / (math.sqrt(nu) + 1.0)
    d_psi = math.sqrt(2.0 * root_gap * root_gap / ((nu + 1.0) * (1.0 + math.sqrt(q))))
    a = math.log(nu) / (2.0 * (nu - 1.0))
    d_n = 2.0 * abs(float(erf(math.sqrt(nu * a))) - float(erf(math.sqrt(a))))
    return MetricPair(d_psi, d_n)


def sho_ratio(nu: float) -> float:
    """D_n / D_psi for two harmonic ground states; 4/sqrt(e*pi) in the nu -> 1 limit."""
    if not nu > 0:
        raise ValueError(f"Frequency ratio must be positive, got {nu}")
    if abs(nu - 1.0) < SHO_LIMIT_WIDTH:
        return SHO_LIMIT_RATIO
    pair = sho_distances(nu)
    return pair.d_n / pair.d_psi


# ─── Slope Fits ─────────────────────────────────────────────────────────────


def fit_slope_through_origin(points: Sequence[MetricPair]) -> Tuple[float, float]:
    """Least-squares slope of d_n against d_psi with zero intercept, plus r^2.

    r^2 is 1 - SS_res / SS_tot with SS_tot taken about zero (uncentred), the
    usual convention for a model without intercept.
    """
    if len(points) < 2 and not (len(points) == 1 and points[0].d_psi > 0):
        raise FitError(f"Need at least 2 points for a slope fit, got {len(points)}")
    x = np.array([p.d_psi for p in points])
    y = np.array([p.d_n for p in points])
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise FitError("All wavefunction distances are zero; slope is undefined")
    slope = float(np.dot(x, y)) / sxx
    ss_res = float(np.sum((y - slope * x) ** 2))
    ss_tot = float(np.dot(y, y))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    metrics_logger.debug(f"Through-origin fit over {len(points)} points: slope={slope:.6g} r2={r_squared:.6g}")
    return slope, r_squared
