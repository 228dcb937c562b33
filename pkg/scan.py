"""
Scan Commands Module for adiabat

Shows how the bundled r1/r2 systems are chosen: every seed in
1..ADIABAT_SCAN_SEEDS is classified on the default grid and the selection rule
is applied to the full table.

Commands included:
- scan: per-seed basin weights and class verdicts, plus the bundled potential files
"""

import csv
import logging
from pathlib import Path
from typing import List, Sequence

import config
from config import ExperimentConfig, RunOptions
from errors import EXIT_OK, AdiabatError, exit_code_for
from grid import format_number
from potentials import write_potential
from systems import SeedVerdict, bundled_potential, choose_r1, classify_seed, selection_grid

scan_logger = logging.getLogger("AdiabatScan")

SCAN_COLUMNS = (
    "seed", "r1_dominant", "r1_second", "dipole", "r2_dominant", "r2_second", "r1_like", "r2_like", "accepted",
)


def _weight(weights: Sequence[float], index: int) -> str:
    return format_number(weights[index]) if len(weights) > index else "0"


def scan_seeds(max_seed: int) -> List[SeedVerdict]:
    grid = selection_grid()
    verdicts = []
    for seed in range(1, max_seed + 1):
        verdicts.append(classify_seed(seed, grid))
        if seed % 50 == 0:
            scan_logger.info(f"Classified {seed}/{max_seed} seeds")
    return verdicts


def write_scan(path: Path, verdicts: Sequence[SeedVerdict], comments: Sequence[str] = ()) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCAN_COLUMNS)
        for v in verdicts:
            writer.writerow([
                v.seed,
                _weight(v.r1_weights, 0),
                _weight(v.r1_weights, 1),
                format_number(v.dipole),
                _weight(v.r2_weights, 0),
                _weight(v.r2_weights, 1),
                int(v.r1_like),
                int(v.r2_like),
                int(v.accepted),
            ])
    return path


class ScanCommands:
    """Scan Commands"""

    def __init__(self, experiment: ExperimentConfig, options: RunOptions):
        self.experiment = experiment
        self.options = options

    def cmd_scan(self) -> int:
        max_seed = config.SCAN_SEEDS
        out_dir = self.options.out_dir
        try:
            verdicts = scan_seeds(max_seed)
            chosen = choose_r1(verdicts, max_seed)
            comments = [self.experiment.provenance(chosen.seed, None)]
            write_scan(out_dir / "scan.csv", verdicts, comments)
            for name in ("ho", "r1", "r2"):
                write_potential(out_dir / f"{name}.cfg", bundled_potential(name))
        except AdiabatError as e:
            scan_logger.error(f"scan failed: {e}", exc_info=True)
            return exit_code_for(e)

        accepted = sum(1 for v in verdicts if v.accepted)
        print(f"{accepted}/{len(verdicts)} seeds accepted; r1 seed = {chosen.seed} -> {out_dir}")
        return EXIT_OK


def setup_scan_commands(experiment: ExperimentConfig, options: RunOptions) -> ScanCommands:
    """Setup function for the scan command"""
    return ScanCommands(experiment, options)
