"""Command-line entry point for the plasmodium experiments."""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from loguru import logger

from app.config import LOG_FORMAT, load_experiment_config, settings
from app.core.errors import ConfigError, InputError, PlasmodiumError
from app.schemas import CentroidRunConfig, SweepConfig
from app.services.batch_runner import (
    CONFIG_MODELS,
    expand_grid,
    run_batch,
    run_sweep,
    seed_range,
)
from app.services.centroid_experiment import prepare_mask


def configure_logging(level: Optional[str] = None) -> None:
    """Send log records to stderr in the project format."""
    logger.remove()
    logger.add(sys.stderr, level=level or settings.log_level, format=LOG_FORMAT)


def parse_frames(value: str) -> Optional[int]:
    """``off`` or a positive step interval."""
    if value.lower() == "off":
        return None
    try:
        every = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a step interval or 'off', got {value!r}")
    if every < 1:
        raise argparse.ArgumentTypeError(f"frame interval must be >= 1, got {every}")
    return every


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plasmodium",
        description="Virtual plasmodium experiments: centroid, mean and tracking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("centroid", "approximate the centroid of a shape"),
        ("mean", "approximate the arithmetic mean of a data series"),
        ("track", "track a target moving on a spiral"),
        ("sweep", "run a parameter grid of one experiment"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, required=True, help="TOML config file")
        p.add_argument("--seed", type=int, default=0, help="first seed (default: 0)")
        p.add_argument("--runs", type=int, default=1, help="number of seeded runs (default: 1)")
        p.add_argument(
            "--out", type=Path, default=None, help="output directory (default: PLASMODIUM_OUTPUT_DIR)"
        )
        p.add_argument(
            "--frames",
            type=parse_frames,
            default=None,
            metavar="EVERY|off",
            help="write a frame every EVERY steps (default: off)",
        )
        p.add_argument("--frame-format", choices=("pgm", "png"), default="pgm")
        p.add_argument(
            "--workers", type=int, default=None, help="concurrent runs (default: PLASMODIUM_WORKERS)"
        )
    return parser


def _execute(args: argparse.Namespace) -> None:
    if args.seed < 0:
        raise InputError(f"--seed must be >= 0, got {args.seed}")
    seeds = seed_range(args.seed, args.runs)
    workers = args.workers if args.workers is not None else settings.workers
    if workers < 1:
        raise InputError(f"--workers must be >= 1, got {workers}")
    out_dir = args.out if args.out is not None else settings.output_dir
    options = dict(
        workers=workers,
        frames_every=args.frames,
        frame_suffix=f".{args.frame_format}",
        log_level=settings.log_level,
    )

    # Everything that can be rejected is checked before the output directory exists
    if args.command == "sweep":
        sweep = load_experiment_config(args.config, SweepConfig)
        for _, config in expand_grid(sweep):
            if isinstance(config, CentroidRunConfig):
                prepare_mask(config)
        run_sweep(sweep, seeds, out_dir, **options)
        return

    config = load_experiment_config(args.config, CONFIG_MODELS[args.command])
    if isinstance(config, CentroidRunConfig):
        prepare_mask(config)
    run_batch(args.command, config, seeds, out_dir, **options)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name; defaults to ``sys.argv[1:]``

    Returns:
        Exit status: 0 on success, 2 on usage, config or input errors, 1 otherwise
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else 0

    try:
        _execute(args)
    except (ConfigError, InputError, FileNotFoundError) as e:
        logger.error(str(e))
        return 2
    except PlasmodiumError as e:
        logger.error(f"Run failed: {e}")
        return 1
    return 0


def cli() -> None:
    configure_logging()
    sys.exit(main())


if __name__ == "__main__":
    cli()
