"""
Adiabaticity Module for adiabat

Turns a propagated run plus its instantaneous eigenpairs into the six-distance
trajectory, evaluates the perturbative criterion epsilon(t), and audits the
trajectory: degree of adiabaticity, arch periods, triangle inequality and the
occupancy of the region above the adiabatic line.

Operations included:
- qac_epsilon / calibrate_rate: the criterion and the ramp rate that hits a target epsilon(0)
- build_trajectory: one TrajectoryRecord per output time
- degree_of_adiabaticity, arch_period, occupancy_above_line, triangle_violations
- summarize: AdiabaticityReport for a trajectory
- write_trajectory_csv / write_report: output files
"""

import csv
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.signal import detrend, find_peaks

from eigensolver import DEGENERACY_TOLERANCE, build_hamiltonian, degenerate_pairs, dipole_element, lowest_eigenpairs
from errors import CriterionError, DegenerateLevelsError, MetricError, TimeMismatchError
from grid import EigenSolution, Grid, WavefunctionState, density_of, format_number
from metrics import MetricPair, density_distance, fit_slope_through_origin, wavefunction_distance
from potentials import PotentialSpec

adiabaticity_logger = logging.getLogger("AdiabatAdiabaticity")

TRIANGLE_SLACK = 1e-10
DIPOLE_FLOOR = 1e-12
BOUND_SLACK = 1e-9
ARCH_PROMINENCE = 0.1
MIN_ARCH_MAXIMA = 3


# ─── Records ────────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TrajectoryRecord:
    """Distances at one output time.

    Suffixes: _0t initial vs dynamic, _gst instantaneous GS vs dynamic,
    _0gs initial vs instantaneous GS.
    """

    t: float
    d_psi_0t: float
    d_n_0t: float
    d_psi_gst: float
    d_n_gst: float
    d_psi_0gs: float
    d_n_0gs: float
    epsilon: float
    e0: float
    e1: float
    norm: float

    def __post_init__(self):
        psi_bound = math.sqrt(2.0) + BOUND_SLACK
        for name in ("d_psi_0t", "d_psi_gst", "d_psi_0gs"):
            if not 0.0 <= getattr(self, name) <= psi_bound:
                raise MetricError(f"{name}={getattr(self, name)} outside [0, sqrt(2)] at t={self.t}")
        for name in ("d_n_0t", "d_n_gst", "d_n_0gs"):
            if not 0.0 <= getattr(self, name) <= 2.0 + BOUND_SLACK:
                raise MetricError(f"{name}={getattr(self, name)} outside [0, 2] at t={self.t}")


TRAJECTORY_COLUMNS = tuple(f.name for f in fields(TrajectoryRecord))


@dataclass(frozen=True)
class AdiabaticityReport:
    max_degree_percent: float
    mean_degree_percent: float
    arch_period_psi: Optional[float]
    arch_period_n: Optional[float]
    above_line_fraction: float
    slope_used: float
    max_degree_percent_of_bound: float
    max_line_deviation: float
    dynamic_slope: float
    dynamic_r_squared: float
    graph_c_below_fraction: float
    triangle_violations: int
    epsilon_initial: float
    epsilon_max: float
    epsilon_final: float
    ramp_rate: float
    n_records: int


# ─── Criterion ──────────────────────────────────────────────────────────────


def qac_epsilon(sol: EigenSolution, ramp_rate: float, m: int = 1, n: int = 0) -> float:
    """p * |<m|x|n>| / (E_n - E_m)^2 for the ramp H' = -p x."""
    if max(m, n) >= len(sol):
        raise ValueError(f"Levels ({m}, {n}) need {max(m, n) + 1} eigenpairs, solution has {len(sol)}")
    gap = float(sol.energies[n] - sol.energies[m])
    if abs(gap) <= DEGENERACY_TOLERANCE:
        raise DegenerateLevelsError(f"Levels {m} and {n} are degenerate (gap {gap:.3e})", levels=(m, n))
    return abs(ramp_rate) * abs(dipole_element(sol, m, n)) / gap ** 2


def calibrate_rate(spec: PotentialSpec, grid: Grid, epsilon0: float, m: int = 1, n: int = 0) -> float:
    """Ramp rate p giving epsilon(0) = epsilon0 for the static potential."""
    if not epsilon0 > 0:
        raise ValueError(f"Target epsilon must be positive, got {epsilon0}")
    sol = lowest_eigenpairs(build_hamiltonian(spec.with_ramp(0.0), grid, 0.0), max(m, n) + 1)
    if degenerate_pairs(sol.energies):
        raise DegenerateLevelsError(f"Lowest levels of {spec.label()} are degenerate", levels=(m, n))
    dipole = abs(dipole_element(sol, m, n))
    if dipole < DIPOLE_FLOOR:
        raise CriterionError(
            f"<{m}|x|{n}> = {dipole:.3e} for {spec.label()}: transition is forbidden, criterion inapplicable"
        )
    gap = float(sol.energies[n] - sol.energies[m])
    p = epsilon0 * gap ** 2 / dipole
    adiabaticity_logger.info(f"Calibrated {spec.label()}: epsilon0={epsilon0:g} -> p={p:.6e} (gap {abs(gap):.6g}, dipole {dipole:.6g})")
    return p


# ─── Trajectory ─────────────────────────────────────────────────────────────


def build_trajectory(
    dynamic: Sequence[WavefunctionState],
    instantaneous: Sequence[EigenSolution],
    ramp_rate: float,
    m: int = 1,
    n: int = 0,
) -> List[TrajectoryRecord]:
    """Six distances, epsilon(t) and energies at every output time.

    dynamic[0] is the initial ground state; instantaneous[j] must be the
    eigen-solution at dynamic[j].time.
    """
    if len(dynamic) != len(instantaneous):
        raise TimeMismatchError(f"{len(dynamic)} dynamic states but {len(instantaneous)} instantaneous solutions")
    if not dynamic:
        return []
    initial = dynamic[0]
    n_initial = density_of(initial)
    records = []
    for psi, sol in zip(dynamic, instantaneous):
        if not math.isclose(psi.time, sol.time, rel_tol=0.0, abs_tol=1e-9):
            raise TimeMismatchError(f"Dynamic state at t={psi.time} paired with ground state at t={sol.time}")
        gs = sol.states[0]
        n_psi = density_of(psi)
        n_gs = density_of(gs)
        records.append(TrajectoryRecord(
            t=psi.time,
            d_psi_0t=wavefunction_distance(initial, psi),
            d_n_0t=density_distance(n_initial, n_psi),
            d_psi_gst=wavefunction_distance(gs, psi),
            d_n_gst=density_distance(n_gs, n_psi),
            d_psi_0gs=wavefunction_distance(initial, gs),
            d_n_0gs=density_distance(n_initial, n_gs),
            epsilon=qac_epsilon(sol, ramp_rate, m, n),
            e0=float(sol.energies[0]),
            e1=float(sol.energies[1]) if len(sol) > 1 else float("nan"),
            norm=psi.norm(),
        ))
    return records


# ─── Audits ─────────────────────────────────────────────────────────────────


def degree_of_adiabaticity(record: TrajectoryRecord, n_particles: int = 1) -> float:
    """Percentage of the maximal non-adiabatic distance sqrt(N); 0 is perfectly adiabatic.

    Distances beyond sqrt(N) (up to the metric bound sqrt(2N)) are reported as 100.
    """
    return min(100.0, 100.0 * record.d_psi_gst / math.sqrt(n_particles))


def degree_of_bound(record: TrajectoryRecord, n_particles: int = 1) -> float:
    """Same distance as a percentage of the metric bound sqrt(2N)."""
    return 100.0 * record.d_psi_gst / math.sqrt(2.0 * n_particles)


def arch_period(times: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """Mean spacing of the oscillation maxima of a distance series, or None.

    The ramp-up phase ends at the first local maximum; at least three maxima
    are needed for a period.
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if y.size < 2 * MIN_ARCH_MAXIMA + 1:
        return None
    steps = np.diff(y)
    if np.all(steps >= 0) or np.all(steps <= 0):
        return None
    flat = detrend(y, type="linear")
    span = float(np.ptp(flat))
    if span <= 0.0:
        return None
    peaks, _ = find_peaks(flat, prominence=ARCH_PROMINENCE * span)
    if peaks.size < MIN_ARCH_MAXIMA:
        return None
    return float(np.mean(np.diff(t[peaks])))


def occupancy_above_line(records: Sequence[TrajectoryRecord], slope: float, margin: float) -> float:
    """Fraction of graph-(a) points lying more than margin above d_n = slope * d_psi."""
    if not slope > 0:
        raise ValueError(f"Slope must be positive, got {slope}")
    if margin < 0:
        raise ValueError(f"Margin must be nonnegative, got {margin}")
    if not records:
        return 0.0
    above = sum(1 for r in records if r.d_n_0t > slope * r.d_psi_0t + margin)
    return above / len(records)


def max_line_deviation(records: Sequence[TrajectoryRecord], slope: float) -> float:
    """Largest vertical distance of graph-(a) points from d_n = slope * d_psi."""
    if not records:
        return 0.0
    return max(abs(r.d_n_0t - slope * r.d_psi_0t) for r in records)


def triangle_violations(records: Sequence[TrajectoryRecord], slack: float = TRIANGLE_SLACK) -> int:
    """Records where d(0,t) > d(GS,t) + d(0,GS) + slack for either metric."""
    count = 0
    for r in records:
        if r.d_psi_0t > r.d_psi_gst + r.d_psi_0gs + slack or r.d_n_0t > r.d_n_gst + r.d_n_0gs + slack:
            count += 1
            adiabaticity_logger.warning(f"Triangle inequality violated at t={r.t}")
    return count


def summarize(
    records: Sequence[TrajectoryRecord],
    ramp_rate: float,
    slope: float,
    margin: float,
    n_particles: int = 1,
) -> AdiabaticityReport:
    if not records:
        raise ValueError("Cannot summarize an empty trajectory")
    times = [r.t for r in records]
    degrees = [degree_of_adiabaticity(r, n_particles) for r in records]
    period_psi = arch_period(times, [r.d_psi_gst for r in records])
    period_n = arch_period(times, [r.d_n_gst for r in records])
    if period_psi is None:
        adiabaticity_logger.warning("No arch period found in the wavefunction series")
    points = [MetricPair(r.d_psi_0t, r.d_n_0t) for r in records if r.d_psi_0t > 0]
    if points:
        dyn_slope, dyn_r2 = fit_slope_through_origin(points)
    else:
        dyn_slope, dyn_r2 = float("nan"), float("nan")
    below = sum(1 for r in records if r.d_psi_0t < r.d_psi_0gs) / len(records)
    epsilons = [r.epsilon for r in records]
    return AdiabaticityReport(
        max_degree_percent=max(degrees),
        mean_degree_percent=float(np.mean(degrees)),
        arch_period_psi=period_psi,
        arch_period_n=period_n,
        above_line_fraction=occupancy_above_line(records, slope, margin),
        slope_used=slope,
        max_degree_percent_of_bound=max(degree_of_bound(r, n_particles) for r in records),
        max_line_deviation=max_line_deviation(records, slope),
        dynamic_slope=dyn_slope,
        dynamic_r_squared=dyn_r2,
        graph_c_below_fraction=below,
        triangle_violations=triangle_violations(records),
        epsilon_initial=epsilons[0],
        epsilon_max=max(epsilons),
        epsilon_final=epsilons[-1],
        ramp_rate=ramp_rate,
        n_records=len(records),
    )


# ─── Output Files ───────────────────────────────────────────────────────────


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def write_trajectory_csv(path: Union[str, Path], records: Sequence[TrajectoryRecord], comments: Sequence[str] = ()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_COLUMNS)
        for r in records:
            writer.writerow([_cell(getattr(r, c)) for c in TRAJECTORY_COLUMNS])
    adiabaticity_logger.info(f"Wrote {len(records)} trajectory records to {path}")
    return path


def report_lines(report: AdiabaticityReport) -> List[str]:
    """Key-value text block; absent values read 'none'."""
    return [f"{k} = {_cell(v) or 'none'}" for k, v in asdict(report).items()]


def write_report(out_dir: Union[str, Path], report: AdiabaticityReport, comments: Sequence[str] = (), stem: str = "report") -> Path:
    """Writes <stem>.txt (key = value) and <stem>.csv (header plus one row)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    text_path = out_dir / f"{stem}.txt"
    text_path.write_text("".join(f"# {c}\n" for c in comments) + "\n".join(report_lines(report)) + "\n")
    values = asdict(report)
    with open(out_dir / f"{stem}.csv", "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(values.keys())
        writer.writerow([_cell(v) or "none" for v in values.values()])
    return text_path
