"""Frame rendering and CSV/JSON emission of run metrics."""

from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from app.core.world import World
from app.schemas import BatchSummary, RunMetrics, StepRecord
from app.utils.array_utils import save_raster, to_greyscale
from app.utils.file_utils import ensure_directory

PARTICLE_LEVEL = 255
TRAIL_TOP = 191
BASE_COLUMNS = ["step", "x", "y", "population", "error"]


def render_frame(world: World, trail_ceiling: float = 50.0) -> np.ndarray:
    """
    Greyscale snapshot: trail as a clamped background, particles in white.

    The background never reaches the particle level, so every white pixel
    is a particle.

    Args:
        world: World to draw
        trail_ceiling: Concentration drawn at the brightest background level

    Returns:
        uint8 raster indexed [y, x]
    """
    frame = to_greyscale(world.trail.values, trail_ceiling, TRAIL_TOP)
    frame[world.occupancy.occupied()] = PARTICLE_LEVEL
    return frame


class FrameRecorder:
    """Step hook that writes a frame every ``every`` steps."""

    def __init__(self, directory: Union[str, Path], stem: str, every: int, suffix: str = ".pgm"):
        if every < 1:
            raise ValueError(f"Frame interval must be >= 1, got {every}")
        self.directory = ensure_directory(directory)
        self.stem = stem
        self.every = every
        self.suffix = suffix
        self.written = 0

    def __call__(self, world: World) -> None:
        if world.step % self.every != 0:
            return
        path = self.directory / f"{self.stem}_{world.step:06d}{self.suffix}"
        try:
            save_raster(render_frame(world), path)
            self.written += 1
        except OSError as e:
            logger.warning(f"Could not write frame {path}: {e}")


def metrics_frame(metrics: RunMetrics) -> pd.DataFrame:
    """Per-step records as a data frame; optional columns appear only when set."""
    rows = [r.model_dump(exclude_none=True) for r in metrics.records]
    if not rows:
        return pd.DataFrame(columns=BASE_COLUMNS)
    df = pd.DataFrame(rows)
    extra = [c for c in df.columns if c not in BASE_COLUMNS]
    return df[BASE_COLUMNS + extra]


def write_csv(metrics: RunMetrics, path: Union[str, Path]) -> Path:
    """
    Write one run's per-step records.

    Args:
        metrics: Run metrics
        path: Destination CSV

    Returns:
        Path written
    """
    path = Path(path)
    metrics_frame(metrics).to_csv(path, index=False)
    return path


def read_csv(path: Union[str, Path]) -> list[StepRecord]:
    """Parse a file written by :func:`write_csv`."""
    df = pd.read_csv(path, float_precision="round_trip")
    df = df.astype({"step": int, "population": int})
    return [
        StepRecord(**{k: v for k, v in row.items() if not pd.isna(v)})
        for row in df.to_dict(orient="records")
    ]


def runs_frame(runs: Sequence[RunMetrics]) -> pd.DataFrame:
    """One row per run: seed, halting and final error plus experiment extras."""
    rows = []
    for r in sorted(runs, key=lambda m: m.seed):
        row = {
            "experiment": r.experiment,
            "seed": r.seed,
            "final_error": r.final_error,
            "halt_step": r.halt_step,
            "halt_reason": r.halt_reason,
            "covariate": r.covariate,
        }
        row.update(r.extra)
        rows.append(row)
    return pd.DataFrame(rows)


def write_summary(
    summary: BatchSummary, runs: Sequence[RunMetrics], directory: Union[str, Path]
) -> tuple[Path, Path]:
    """
    Write ``summary.json`` and ``runs.csv``.

    The summary's sigma is the population standard deviation (divide by n),
    stated in its ``sigma_convention`` field.

    Returns:
        (summary path, runs path)
    """
    directory = ensure_directory(directory)
    summary_path = directory / "summary.json"
    summary_path.write_text(summary.model_dump_json(indent=2) + "\n")
    runs_path = directory / "runs.csv"
    runs_frame(runs).to_csv(runs_path, index=False)
    return summary_path, runs_path
