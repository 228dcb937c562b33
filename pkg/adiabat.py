"""
adiabat - command-line entry point

Wires experiment documents to the study pipelines:

    python adiabat.py gs-study  --config configs/gs_sho.cfg    --out out/gs_sho --svg
    python adiabat.py evolve    --config configs/evolve_ho.cfg --out out/ho --svg --frames
    python adiabat.py sweep     --config configs/sweep_protocol.cfg --out out/sweep --workers 4
    python adiabat.py calibrate --config configs/evolve_ho.cfg --out out/calibration
    python adiabat.py scan      --out out/scan

Exit codes: 0 success, 1 experiment failure, 2 configuration error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import config
from config import ExperimentConfig, RunOptions, load_experiment, parse_experiment, validate_config
from errors import EXIT_CONFIG, ConfigError
from evolve import setup_evolve_commands
from gs_study import setup_gs_study_commands
from scan import setup_scan_commands
from sweep import setup_sweep_commands

COMMANDS = ("gs-study", "evolve", "sweep", "calibrate", "scan")
LOG_FORMAT = "%(asctime)s %(levelname)s:%(name)s: %(message)s"

logger = logging.getLogger("Adiabat")


# ─── Logging Configuration ──────────────────────────────────────────────────


def setup_logging(level: str = config.LOG_LEVEL, log_file: Optional[str] = config.LOG_FILE) -> None:
    # Clear any existing root handlers to avoid double logging
    root = logging.getLogger()
    for h in root.handlers[:]:
        root.removeHandler(h)
    root.setLevel(getattr(logging, level.upper(), logging.INFO))

    console = logging.StreamHandler()
    console.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(console)

    if log_file:
        file_handler = logging.FileHandler(log_file, mode="a")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(file_handler)


# ─── Argument Parsing ───────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adiabat",
        description="Degree of adiabaticity of 1D single-particle systems from wavefunction and density metrics.",
    )
    parser.add_argument("command", choices=COMMANDS, help="study to run")
    parser.add_argument("--config", type=Path, help="experiment document (key = value); defaults apply when omitted")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: out/<command>)")
    parser.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS, help="process pool size for sweep")
    parser.add_argument("--svg", action="store_true", help="write SVG figures")
    parser.add_argument("--png", action="store_true", help="also rasterize figures to PNG (needs Pillow)")
    parser.add_argument("--frames", action="store_true", help="write one density CSV per output time")
    parser.add_argument("--log-level", default=config.LOG_LEVEL, type=str.upper,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"), help="override ADIABAT_LOG_LEVEL")
    return parser


def load_document(command: str, path: Optional[Path]) -> ExperimentConfig:
    if path is None:
        return parse_experiment({"experiment": command}, command=command)
    return load_experiment(path, command=command)


def dispatch(experiment: ExperimentConfig, options: RunOptions) -> int:
    command = experiment.experiment
    if command == "gs-study":
        return setup_gs_study_commands(experiment, options).cmd_gs_study()
    if command == "sweep":
        return setup_sweep_commands(experiment, options).cmd_sweep()
    if command == "scan":
        return setup_scan_commands(experiment, options).cmd_scan()
    evolve_commands = setup_evolve_commands(experiment, options)
    if command == "calibrate":
        return evolve_commands.cmd_calibrate()
    return evolve_commands.cmd_evolve()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    problems = validate_config()
    if args.workers < 1:
        problems.append("--workers must be at least 1.")
    if problems:
        for problem in problems:
            logger.error(f"Configuration error: {problem}")
        return EXIT_CONFIG

    try:
        experiment = load_document(args.command, args.config)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    options = RunOptions(
        out_dir=args.out or Path("out") / args.command,
        workers=args.workers,
        svg=args.svg,
        png=args.png,
        frames=args.frames,
    )
    logger.info(f"Running {args.command} (config sha256 {experiment.digest or 'none'}) into {options.out_dir}")
    status = dispatch(experiment, options)
    logger.info(f"{args.command} finished with exit code {status}")
    return status


if __name__ == "__main__":
    sys.exit(main())
