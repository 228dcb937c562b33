"""
Ground-State Study Commands Module for adiabat

Pairwise metric distances between ground states of a family of static
potentials and the through-origin fit D_n = slope * D_psi.

Commands included:
- gs-study: harmonic family against a reference frequency, or all pairs of a
  seeded random-Fourier family
"""

import csv
import itertools
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

from config import ExperimentConfig, GsSettings, RunOptions
from eigensolver import ground_state
from errors import EXIT_OK, AdiabatError, ConfigError, exit_code_for
from grid import Grid, WavefunctionState, format_number
from metrics import MetricPair, fit_slope_through_origin, metric_pair, sho_distances
from plots import gs_pairs_figure, write_figure
from potentials import Harmonic, PotentialSpec, generate_random

gs_logger = logging.getLogger("AdiabatGsStudy")

PAIR_COLUMNS = ("pair_id", "system_a", "system_b", "d_psi", "d_n")
SHO_COLUMNS = ("nu", "d_psi_grid", "d_n_grid", "ratio_grid", "d_psi_exact", "d_n_exact", "ratio_exact")


@dataclass(frozen=True)
class GsPair:
    pair_id: int
    system_a: str
    system_b: str
    metrics: MetricPair


@dataclass(frozen=True)
class GsStudyResult:
    family: str
    n_systems: int
    pairs: Tuple[GsPair, ...]
    slope: float
    r_squared: float


def _ground_states(specs: Sequence[PotentialSpec], grid: Grid) -> List[WavefunctionState]:
    states = []
    for spec in specs:
        states.append(ground_state(spec, grid))
        gs_logger.debug(f"Ground state of {spec.label()} ready")
    return states


def sho_family(gs: GsSettings) -> List[PotentialSpec]:
    return [PotentialSpec(Harmonic(omega)) for omega in gs.sho_frequencies]


def random_family(gs: GsSettings) -> List[PotentialSpec]:
    seeds = range(gs.random_seed, gs.random_seed + gs.random_count)
    return [generate_random(seed, gs.random_scale, gs.random_half_width) for seed in seeds]


def study_sho(gs: GsSettings, grid: Grid) -> Tuple[GsStudyResult, List[List[str]]]:
    """Every family member against the reference oscillator, plus the analytic cross-check rows."""
    if not gs.sho_frequencies:
        raise ConfigError("need >= 2 systems, got 1", fields=("gs.sho.frequencies",))
    reference = PotentialSpec(Harmonic(gs.sho_reference))
    family = sho_family(gs)
    ref_state = ground_state(reference, grid)
    states = _ground_states(family, grid)

    pairs = []
    check_rows = []
    for i, (spec, state) in enumerate(zip(family, states), start=1):
        pair = metric_pair(ref_state, state)
        pairs.append(GsPair(i, reference.label(), spec.label(), pair))
        nu = spec.variant.omega / gs.sho_reference
        exact = sho_distances(nu)
        ratio_grid = pair.d_n / pair.d_psi if pair.d_psi > 0 else None
        ratio_exact = exact.d_n / exact.d_psi if exact.d_psi > 0 else None
        check_rows.append([
            format_number(nu),
            format_number(pair.d_psi),
            format_number(pair.d_n),
            "none" if ratio_grid is None else format_number(ratio_grid),
            format_number(exact.d_psi),
            format_number(exact.d_n),
            "none" if ratio_exact is None else format_number(ratio_exact),
        ])

    slope, r2 = fit_slope_through_origin([p.metrics for p in pairs])
    return GsStudyResult("sho", len(family), tuple(pairs), slope, r2), check_rows


def study_random(gs: GsSettings, grid: Grid) -> GsStudyResult:
    """All unordered pairs of the seeded family."""
    if gs.random_count < 2:
        raise ConfigError(f"need >= 2 systems, got {gs.random_count}", fields=("gs.random.count",))
    family = random_family(gs)
    states = _ground_states(family, grid)
    pairs = []
    for pair_id, (i, j) in enumerate(itertools.combinations(range(len(family)), 2), start=1):
        pairs.append(GsPair(pair_id, family[i].label(), family[j].label(), metric_pair(states[i], states[j])))
    slope, r2 = fit_slope_through_origin([p.metrics for p in pairs])
    return GsStudyResult("random", len(family), tuple(pairs), slope, r2)


def _write_rows(path: Path, header: Sequence[str], rows: Sequence[Sequence[str]], comments: Sequence[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_gs_outputs(out_dir: Path, result: GsStudyResult, comments: Sequence[str]) -> List[Path]:
    pair_rows = [
        [str(p.pair_id), p.system_a, p.system_b, format_number(p.metrics.d_psi), format_number(p.metrics.d_n)]
        for p in result.pairs
    ]
    summary = [
        f"family = {result.family}",
        f"n_systems = {result.n_systems}",
        f"n_pairs = {len(result.pairs)}",
        f"slope = {format_number(result.slope)}",
        f"r_squared = {format_number(result.r_squared)}",
    ]
    out_dir.mkdir(parents=True, exist_ok=True)
    summary_path = out_dir / "gs_summary.txt"
    summary_path.write_text("".join(f"# {c}\n" for c in comments) + "\n".join(summary) + "\n")
    return [_write_rows(out_dir / "gs_pairs.csv", PAIR_COLUMNS, pair_rows, comments), summary_path]


class GsStudyCommands:
    """Ground-State Study Commands"""

    def __init__(self, experiment: ExperimentConfig, options: RunOptions):
        self.experiment = experiment
        self.options = options
        self.grid = Grid.symmetric(experiment.grid.half_width, experiment.grid.n_points)

    def cmd_gs_study(self) -> int:
        gs = self.experiment.gs
        out_dir = self.options.out_dir
        seed = gs.random_seed if gs.family == "random" else None
        comments = [self.experiment.provenance(seed, None)]
        try:
            if gs.family == "sho":
                result, check_rows = study_sho(gs, self.grid)
                _write_rows(out_dir / "sho_check.csv", SHO_COLUMNS, check_rows, comments)
            else:
                if gs.random_half_width != self.grid.half_width:
                    gs_logger.warning(
                        f"Random family period L={gs.random_half_width:g} differs from the grid half width {self.grid.half_width:g}"
                    )
                result = study_random(gs, self.grid)
        except AdiabatError as e:
            gs_logger.error(f"gs-study failed: {e}", exc_info=True)
            return exit_code_for(e)

        write_gs_outputs(out_dir, result, comments)
        if self.options.figures:
            figure = gs_pairs_figure([p.metrics for p in result.pairs], result.slope, f"{result.family} family ground states")
            write_figure(out_dir, "gs_pairs", figure, self.options.png)
        gs_logger.info(
            f"{result.family} family: {result.n_systems} systems, {len(result.pairs)} pairs, "
            f"slope {result.slope:.4f}, r2 {result.r_squared:.4f}"
        )
        print(f"{result.family}: pairs={len(result.pairs)} slope={result.slope:.4f} r2={result.r_squared:.4f} -> {out_dir}")
        return EXIT_OK


def setup_gs_study_commands(experiment: ExperimentConfig, options: RunOptions) -> GsStudyCommands:
    """Setup function for the ground-state study command"""
    return GsStudyCommands(experiment, options)
