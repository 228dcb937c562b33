"""
Configuration module for adiabat

This module centralizes process-wide settings (read from the environment, with
adiabat.env loaded first) and parses the experiment documents handed to the
command line with --config.

Experiment documents are flat "key = value" files; dotted prefixes group keys
into sections (grid.*, potential.*, evolve.*, analysis.*, gs.*, sweep.*).
See docs/formats.md for the full grammar.
"""

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from errors import ConfigError

# Paths
PROJECT_ROOT = Path(__file__).parent
ENV_FILE = PROJECT_ROOT / "adiabat.env"

load_dotenv(ENV_FILE)

# Logging Configuration
LOG_LEVEL = os.getenv("ADIABAT_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("ADIABAT_LOG_FILE", "adiabat.log")

# Worker pool for sweeps
DEFAULT_WORKERS = int(os.getenv("ADIABAT_WORKERS", "1"))

# Grid defaults (box [-L, L], dx = 2L / (n_points - 1))
DEFAULT_HALF_WIDTH = float(os.getenv("ADIABAT_HALF_WIDTH", "15.0"))
DEFAULT_GRID_POINTS = int(os.getenv("ADIABAT_GRID_POINTS", "1201"))

# Time stepping defaults
DEFAULT_DT = float(os.getenv("ADIABAT_DT", "0.001"))
DEFAULT_OUTPUT_STRIDE = int(os.getenv("ADIABAT_OUTPUT_STRIDE", "100"))
DEFAULT_T_MAX = float(os.getenv("ADIABAT_T_MAX", "100.0"))

# Analysis defaults
DEFAULT_ADIABATIC_SLOPE = float(os.getenv("ADIABAT_ADIABATIC_SLOPE", "1.5"))
DEFAULT_OCCUPANCY_MARGIN = float(os.getenv("ADIABAT_OCCUPANCY_MARGIN", "0.05"))

# Bundled-system selection
SCAN_SEEDS = int(os.getenv("ADIABAT_SCAN_SEEDS", "400"))

# Ground-state study families
SHO_REFERENCE_OMEGA = 0.1
SHO_FREQUENCIES = (0.05,) + tuple(round(0.1 * k, 10) for k in range(1, 23))


def validate_config():
    """Validate process-wide settings; returns a list of problems"""
    errors = []

    if LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append(f"ADIABAT_LOG_LEVEL must be a logging level name, got {LOG_LEVEL!r}.")

    if DEFAULT_WORKERS < 1:
        errors.append("ADIABAT_WORKERS must be at least 1.")

    if DEFAULT_HALF_WIDTH <= 0:
        errors.append("ADIABAT_HALF_WIDTH must be positive.")

    if DEFAULT_GRID_POINTS < 3:
        errors.append("ADIABAT_GRID_POINTS must be at least 3.")

    if not 0 < DEFAULT_DT <= 0.01:
        errors.append("ADIABAT_DT must lie in (0, 0.01].")

    if DEFAULT_OUTPUT_STRIDE < 1:
        errors.append("ADIABAT_OUTPUT_STRIDE must be at least 1.")

    if DEFAULT_ADIABATIC_SLOPE <= 0:
        errors.append("ADIABAT_ADIABATIC_SLOPE must be positive.")

    if DEFAULT_OCCUPANCY_MARGIN < 0:
        errors.append("ADIABAT_OCCUPANCY_MARGIN must be nonnegative.")

    if SCAN_SEEDS < 1:
        errors.append("ADIABAT_SCAN_SEEDS must be at least 1.")

    return errors


# ─── Experiment Documents ───────────────────────────────────────────────────

POTENTIAL_PREFIXES = ("bundled:", "harmonic:", "random:")


@dataclass(frozen=True)
class GridSettings:
    half_width: float = DEFAULT_HALF_WIDTH
    n_points: int = DEFAULT_GRID_POINTS


@dataclass(frozen=True)
class EvolveSettings:
    potential: str = "bundled:ho"
    epsilon0: Tuple[float, ...] = (0.01,)
    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_T_MAX
    output_stride: int = DEFAULT_OUTPUT_STRIDE
    level_m: int = 1
    level_n: int = 0


@dataclass(frozen=True)
class AnalysisSettings:
    slope: float = DEFAULT_ADIABATIC_SLOPE
    margin: float = DEFAULT_OCCUPANCY_MARGIN
    t_ref: Optional[float] = None


@dataclass(frozen=True)
class GsSettings:
    family: str = "sho"
    sho_reference: float = SHO_REFERENCE_OMEGA
    sho_frequencies: Tuple[float, ...] = SHO_FREQUENCIES
    random_count: int = 10
    random_scale: float = 0.1
    random_half_width: float = 15.0
    random_seed: int = 1


@dataclass(frozen=True)
class SweepCell:
    label: str
    potential: str
    epsilon0: float


@dataclass(frozen=True)
class RunOptions:
    """Command-line output switches shared by every command."""

    out_dir: Path = Path("out")
    workers: int = DEFAULT_WORKERS
    svg: bool = False
    png: bool = False
    frames: bool = False

    @property
    def figures(self) -> bool:
        return self.svg or self.png


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    grid: GridSettings = field(default_factory=GridSettings)
    evolve: EvolveSettings = field(default_factory=EvolveSettings)
    analysis: AnalysisSettings = field(default_factory=AnalysisSettings)
    gs: GsSettings = field(default_factory=GsSettings)
    cells: Tuple[SweepCell, ...] = ()
    source: Optional[Path] = None
    digest: str = ""

    @property
    def base_dir(self) -> Path:
        return self.source.parent if self.source else Path.cwd()

    def provenance(self, seed: Optional[int] = None, dt: Optional[float] = None) -> str:
        """First-line comment stamped on every output CSV."""
        seed_text = "none" if seed is None else str(seed)
        dt_text = "none" if dt is None else repr(dt)
        return (
            f"adiabat config_sha256={self.digest or 'none'} seed={seed_text} "
            f"grid={-self.grid.half_width!r}:{self.grid.half_width!r}:{self.grid.n_points} dt={dt_text}"
        )


class _Reader:
    """Typed access to a parsed document, collecting every problem before failing."""

    def __init__(self, doc: Dict[str, Optional[str]], path: str):
        self.doc = {k.strip(): (v or "").strip() for k, v in doc.items()}
        self.path = path
        self.problems: List[str] = []
        self.bad_fields: List[str] = []

    def fail(self, key: str, message: str) -> None:
        self.problems.append(f"{key}: {message}")
        self.bad_fields.append(key)

    def text(self, key: str, default: Optional[str] = None) -> Optional[str]:
        value = self.doc.get(key, "")
        return value if value else default

    def number(self, key: str, default, cast=float, low=None, high=None, low_open=False):
        raw = self.doc.get(key, "")
        if not raw:
            return default
        try:
            value = cast(raw)
        except ValueError:
            self.fail(key, f"expected a number, got {raw!r}")
            return default
        if low is not None and (value <= low if low_open else value < low):
            self.fail(key, f"must be {'>' if low_open else '>='} {low}, got {value}")
        if high is not None and value > high:
            self.fail(key, f"must be <= {high}, got {value}")
        return value

    def numbers(self, key: str, default: Tuple[float, ...], low_open_zero: bool = False) -> Tuple[float, ...]:
        raw = self.doc.get(key, "")
        if not raw:
            return default
        values = []
        for part in raw.split(","):
            try:
                values.append(float(part))
            except ValueError:
                self.fail(key, f"expected comma-separated numbers, got {raw!r}")
                return default
        if low_open_zero and any(v <= 0 for v in values):
            self.fail(key, f"all values must be positive, got {raw!r}")
        return tuple(values)


def _check_potential(reader: _Reader, key: str, reference: str, base_dir: Path) -> str:
    if reference.startswith(POTENTIAL_PREFIXES):
        return reference
    path = Path(reference)
    if not path.is_absolute():
        path = base_dir / path
    if not path.is_file():
        reader.fail(key, f"potential file not found: {path}")
    return str(path)


def _parse_cell(reader: _Reader, key: str, raw: str, base_dir: Path) -> Optional[SweepCell]:
    potential, sep, eps = raw.rpartition("@")
    if not sep:
        reader.fail(key, f"expected '<potential> @ <epsilon0>', got {raw!r}")
        return None
    try:
        epsilon0 = float(eps)
    except ValueError:
        reader.fail(key, f"epsilon0 is not a number: {eps!r}")
        return None
    if epsilon0 <= 0:
        reader.fail(key, f"epsilon0 must be positive, got {epsilon0}")
    label = key.split(".", 2)[2]
    return SweepCell(label, _check_potential(reader, key, potential.strip(), base_dir), epsilon0)


def parse_experiment(
    doc: Dict[str, Optional[str]],
    command: Optional[str] = None,
    source: Optional[Path] = None,
    digest: str = "",
) -> ExperimentConfig:
    reader = _Reader(doc, str(source) if source else "<document>")
    base_dir = source.parent if source else Path.cwd()

    experiment = reader.text("experiment", command)
    if command and experiment != command:
        reader.fail("experiment", f"document is for {experiment!r} but was run with {command!r}")
    if experiment not in ("gs-study", "evolve", "sweep", "calibrate", "scan"):
        reader.fail("experiment", f"must be one of gs-study, evolve, sweep, calibrate, scan; got {experiment!r}")

    grid = GridSettings(
        half_width=reader.number("grid.half_width", DEFAULT_HALF_WIDTH, low=0, low_open=True),
        n_points=reader.number("grid.n_points", DEFAULT_GRID_POINTS, cast=int, low=3),
    )

    potential = reader.text("potential.source", "bundled:ho")
    evolve = EvolveSettings(
        potential=_check_potential(reader, "potential.source", potential, base_dir),
        epsilon0=reader.numbers("evolve.epsilon0", (0.01,), low_open_zero=True),
        dt=reader.number("evolve.dt", DEFAULT_DT, low=0, high=0.01, low_open=True),
        t_max=reader.number("evolve.t_max", DEFAULT_T_MAX, low=0, low_open=True),
        output_stride=reader.number("evolve.output_stride", DEFAULT_OUTPUT_STRIDE, cast=int, low=1),
        level_m=reader.number("evolve.m", 1, cast=int, low=0),
        level_n=reader.number("evolve.n", 0, cast=int, low=0),
    )
    if evolve.level_m == evolve.level_n:
        reader.fail("evolve.m", "levels m and n must differ")

    analysis = AnalysisSettings(
        slope=reader.number("analysis.slope", DEFAULT_ADIABATIC_SLOPE, low=0, low_open=True),
        margin=reader.number("analysis.margin", DEFAULT_OCCUPANCY_MARGIN, low=0),
        t_ref=reader.number("analysis.t_ref", None, low=0),
    )

    family = reader.text("gs.family", "sho")
    if family not in ("sho", "random"):
        reader.fail("gs.family", f"must be 'sho' or 'random', got {family!r}")
    gs = GsSettings(
        family=family,
        sho_reference=reader.number("gs.sho.reference", SHO_REFERENCE_OMEGA, low=0, low_open=True),
        sho_frequencies=reader.numbers("gs.sho.frequencies", SHO_FREQUENCIES, low_open_zero=True),
        random_count=reader.number("gs.random.count", 10, cast=int),
        random_scale=reader.number("gs.random.lambda", 0.1, low=0),
        random_half_width=reader.number("gs.random.L", 15.0, low=0, low_open=True),
        random_seed=reader.number("gs.random.seed", 1, cast=int),
    )
    if experiment == "gs-study":
        # the SHO family is the reference oscillator plus every listed frequency
        if family == "random":
            systems, key = gs.random_count, "gs.random.count"
        else:
            systems, key = 1 + len(gs.sho_frequencies), "gs.sho.frequencies"
        if systems < 2:
            reader.fail(key, f"need >= 2 systems, got {systems}")

    cells = []
    for key in sorted((k for k in reader.doc if k.startswith("sweep.cell.")), key=_natural_key):
        cell = _parse_cell(reader, key, reader.doc[key], base_dir)
        if cell is not None:
            cells.append(cell)
    if experiment == "sweep" and not cells:
        reader.fail("sweep.cell", "sweep needs at least one 'sweep.cell.<name> = <potential> @ <epsilon0>' entry")

    if reader.problems:
        raise ConfigError(
            f"{reader.path}: " + "; ".join(reader.problems),
            fields=tuple(reader.bad_fields),
        )
    return ExperimentConfig(
        experiment=experiment,
        grid=grid,
        evolve=evolve,
        analysis=analysis,
        gs=gs,
        cells=tuple(cells),
        source=source,
        digest=digest,
    )


def _natural_key(key: str):
    label = key.split(".", 2)[2]
    return (0, int(label), "") if label.isdigit() else (1, 0, label)


def load_experiment(path, command: Optional[str] = None) -> ExperimentConfig:
    """Parse an experiment document; every problem is reported with its key."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}", fields=("config",))
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return parse_experiment(dotenv_values(path), command=command, source=path.resolve(), digest=digest)
