"""
Sweep Commands Module for adiabat

Runs the evolve protocol over a list of (potential, epsilon0) cells. Cells are
independent: each writes into its own directory and a failure in one is
recorded in the summary without stopping the others.

Commands included:
- sweep: every cell of the experiment document, optionally on a process pool
"""

import asyncio
import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import List, Optional, Sequence

from adiabaticity import AdiabaticityReport
from config import ExperimentConfig, RunOptions, SweepCell
from errors import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, AdiabatError, ConfigError
from evolve import experiment_grid, run_protocol
from grid import format_number
from systems import resolve_potential

sweep_logger = logging.getLogger("AdiabatSweep")

REPORT_COLUMNS = tuple(f.name for f in fields(AdiabaticityReport))
SUMMARY_COLUMNS = ("cell", "potential", "epsilon0", "status", "message") + REPORT_COLUMNS


@dataclass(frozen=True)
class CellOutcome:
    cell: SweepCell
    potential: str
    status: str
    message: str = ""
    report: Optional[AdiabaticityReport] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def cell_dir(out_dir: Path, cell: SweepCell) -> Path:
    return out_dir / f"cell_{cell.label}"


def run_cell(experiment: ExperimentConfig, cell: SweepCell, options: RunOptions) -> CellOutcome:
    """One sweep cell; module-level so a process pool can pickle it."""
    try:
        spec = resolve_potential(cell.potential, experiment.base_dir)
        comments = [experiment.provenance(spec.seed, experiment.evolve.dt)]
        result = run_protocol(
            spec,
            experiment_grid(experiment),
            cell.epsilon0,
            experiment.evolve,
            experiment.analysis,
            cell_dir(options.out_dir, cell),
            comments,
            options,
        )
    except AdiabatError as e:
        sweep_logger.error(f"Cell {cell.label} ({cell.potential} @ {cell.epsilon0:g}) failed: {e}")
        status = "config_error" if isinstance(e, ConfigError) else "failed"
        return CellOutcome(cell, cell.potential, status, str(e))
    return CellOutcome(cell, result.label, "ok", report=result.report)


async def _run_pool(experiment: ExperimentConfig, cells: Sequence[SweepCell], options: RunOptions) -> List[CellOutcome]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=options.workers) as pool:
        futures = [loop.run_in_executor(pool, run_cell, experiment, cell, options) for cell in cells]
        results = await asyncio.gather(*futures, return_exceptions=True)
    outcomes = []
    for cell, result in zip(cells, results):
        if isinstance(result, BaseException):
            sweep_logger.error(f"Cell {cell.label} crashed in its worker: {result!r}")
            outcomes.append(CellOutcome(cell, cell.potential, "failed", repr(result)))
        else:
            outcomes.append(result)
    return outcomes


def run_cells(experiment: ExperimentConfig, options: RunOptions) -> List[CellOutcome]:
    """Outcomes in cell order whatever the scheduling."""
    cells = list(experiment.cells)
    if options.workers <= 1 or len(cells) <= 1:
        return [run_cell(experiment, cell, options) for cell in cells]
    return asyncio.run(_run_pool(experiment, cells, options))


def _summary_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return format_number(value)
    return str(value)


def write_summary(path: Path, outcomes: Sequence[CellOutcome], comments: Sequence[str] = ()) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for outcome in outcomes:
            report = asdict(outcome.report) if outcome.report else {}
            writer.writerow(
                [outcome.cell.label, outcome.potential, format_number(outcome.cell.epsilon0), outcome.status, outcome.message]
                + [_summary_value(report.get(c)) if report else "" for c in REPORT_COLUMNS]
            )
    return path


class SweepCommands:
    """Sweep Commands"""

    def __init__(self, experiment: ExperimentConfig, options: RunOptions):
        self.experiment = experiment
        self.options = options

    def cmd_sweep(self) -> int:
        if not self.experiment.cells:
            sweep_logger.error("Sweep has no cells")
            return EXIT_CONFIG
        sweep_logger.info(f"Sweeping {len(self.experiment.cells)} cells on {self.options.workers} worker(s)")
        outcomes = run_cells(self.experiment, self.options)

        path = write_summary(
            self.options.out_dir / "sweep_summary.csv",
            outcomes,
            [self.experiment.provenance(None, self.experiment.evolve.dt)],
        )
        failed = [o for o in outcomes if not o.ok]
        for outcome in outcomes:
            detail = (
                f"max_degree={outcome.report.max_degree_percent:.4g}%" if outcome.report else outcome.message
            )
            print(f"cell {outcome.cell.label}: {outcome.potential} @ {outcome.cell.epsilon0:g} {outcome.status} {detail}")
        sweep_logger.info(f"Sweep finished: {len(outcomes) - len(failed)} ok, {len(failed)} failed; summary at {path}")
        return EXIT_FAILED if failed else EXIT_OK


def setup_sweep_commands(experiment: ExperimentConfig, options: RunOptions) -> SweepCommands:
    """Setup function for the sweep command"""
    return SweepCommands(experiment, options)
