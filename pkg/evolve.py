"""
Evolve Commands Module for adiabat

Runs the time-dependent protocol for one potential: calibrate the ramp rate
from a target epsilon(0), propagate the initial ground state, track the
instantaneous eigenpairs and audit the resulting trajectory.

Commands included:
- evolve: one run per requested epsilon0, with trajectory, report and figures
- calibrate: ramp rates for the requested epsilon0 values without propagating
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

from adiabaticity import (
    AdiabaticityReport,
    build_trajectory,
    calibrate_rate,
    summarize,
    write_report,
    write_trajectory_csv,
)
from config import AnalysisSettings, EvolveSettings, ExperimentConfig, RunOptions
from eigensolver import ground_state
from errors import EXIT_OK, AdiabatError, exit_code_for
from grid import Grid, format_number
from plots import write_trajectory_figures
from potentials import PotentialSpec, write_potential
from propagator import EvolutionConfig, FrameWriter, StateRecorder, evolve, fan_out, instantaneous_eigenpairs
from systems import resolve_potential

evolve_logger = logging.getLogger("AdiabatEvolve")

CALIBRATION_COLUMNS = ("potential", "epsilon0", "p", "ratio_to_first")


@dataclass(frozen=True)
class RunResult:
    label: str
    epsilon0: float
    ramp_rate: float
    report: AdiabaticityReport
    out_dir: Path


def experiment_grid(experiment: ExperimentConfig) -> Grid:
    return Grid.symmetric(experiment.grid.half_width, experiment.grid.n_points)


def epsilon_dir(out_dir: Path, epsilon0: float) -> Path:
    return out_dir / f"eps_{epsilon0:g}"


def run_protocol(
    spec: PotentialSpec,
    grid: Grid,
    epsilon0: float,
    settings: EvolveSettings,
    analysis: AnalysisSettings,
    out_dir: Path,
    comments: Sequence[str] = (),
    options: Optional[RunOptions] = None,
) -> RunResult:
    """Calibrate, propagate, audit and write one run into out_dir."""
    options = options or RunOptions(out_dir=out_dir)
    m, n = settings.level_m, settings.level_n
    p = calibrate_rate(spec, grid, epsilon0, m, n)
    ramped = spec.with_ramp(p)
    run_config = EvolutionConfig(
        dt=settings.dt,
        t_max=settings.t_max,
        output_stride=settings.output_stride,
        spec=ramped,
        grid=grid,
        initial=ground_state(ramped, grid, 0.0),
    )

    recorder = StateRecorder()
    frames = FrameWriter(out_dir, comments) if options.frames else None
    evolve(run_config, fan_out(recorder, frames))

    times = [state.time for state in recorder.states]
    solutions = instantaneous_eigenpairs(run_config, times, k=max(2, m + 1, n + 1))
    records = build_trajectory(recorder.states, solutions, p, m, n)
    report = summarize(records, p, analysis.slope, analysis.margin)

    write_potential(out_dir / "potential.cfg", ramped)
    write_trajectory_csv(out_dir / "trajectory.csv", records, comments)
    write_report(out_dir, report, comments)
    if options.figures:
        write_trajectory_figures(out_dir, records, analysis.slope, analysis.t_ref, options.png, label=f"{spec.label()} eps0={epsilon0:g}")

    evolve_logger.info(
        f"{spec.label()} eps0={epsilon0:g}: max degree {report.max_degree_percent:.3f}%, "
        f"arch periods psi={report.arch_period_psi} n={report.arch_period_n}, "
        f"above-line fraction {report.above_line_fraction:.3f}"
    )
    return RunResult(spec.label(), epsilon0, p, report, out_dir)


def calibration_rows(spec: PotentialSpec, grid: Grid, settings: EvolveSettings) -> List[List[str]]:
    rows = []
    first = None
    for epsilon0 in settings.epsilon0:
        p = calibrate_rate(spec, grid, epsilon0, settings.level_m, settings.level_n)
        first = first if first is not None else p
        rows.append([spec.label(), format_number(epsilon0), format_number(p), format_number(p / first)])
    return rows


class EvolveCommands:
    """Evolve and Calibrate Commands"""

    def __init__(self, experiment: ExperimentConfig, options: RunOptions):
        self.experiment = experiment
        self.options = options
        self.grid = experiment_grid(experiment)

    def _spec(self) -> PotentialSpec:
        return resolve_potential(self.experiment.evolve.potential, self.experiment.base_dir)

    def cmd_evolve(self) -> int:
        """Run the protocol once per epsilon0 into <out>/eps_<epsilon0>/."""
        settings = self.experiment.evolve
        try:
            spec = self._spec()
            comments = [self.experiment.provenance(spec.seed, settings.dt)]
            for epsilon0 in settings.epsilon0:
                result = run_protocol(
                    spec,
                    self.grid,
                    epsilon0,
                    settings,
                    self.experiment.analysis,
                    epsilon_dir(self.options.out_dir, epsilon0),
                    comments,
                    self.options,
                )
                print(
                    f"{result.label} eps0={epsilon0:g} p={result.ramp_rate:.6e} "
                    f"max_degree={result.report.max_degree_percent:.4g}% -> {result.out_dir}"
                )
        except AdiabatError as e:
            evolve_logger.error(f"evolve failed: {e}", exc_info=True)
            return exit_code_for(e)
        return EXIT_OK

    def cmd_calibrate(self) -> int:
        """Write calibration.csv with p for every epsilon0 and its ratio to the first."""
        settings = self.experiment.evolve
        try:
            spec = self._spec()
            rows = calibration_rows(spec, self.grid, settings)
        except AdiabatError as e:
            evolve_logger.error(f"calibrate failed: {e}", exc_info=True)
            return exit_code_for(e)

        path = self.options.out_dir / "calibration.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(f"# {self.experiment.provenance(spec.seed, None)}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CALIBRATION_COLUMNS)
            writer.writerows(rows)
        for row in rows:
            print(f"{row[0]} eps0={row[1]} p={row[2]} ratio={row[3]}")
        evolve_logger.info(f"Wrote {len(rows)} calibrated rates to {path}")
        return EXIT_OK


def setup_evolve_commands(experiment: ExperimentConfig, options: RunOptions) -> EvolveCommands:
    """Setup function for the evolve and calibrate commands"""
    return EvolveCommands(experiment, options)
