"""Seeded batch execution on a worker pool, and parameter sweeps."""

import asyncio
import itertools
import sys
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import pandas as pd
from loguru import logger
from pydantic import BaseModel, ValidationError

from app.config import LOG_FORMAT
from app.core.errors import ConfigError, InputError
from app.schemas import (
    BatchSummary,
    CentroidRunConfig,
    MeanRunConfig,
    RunMetrics,
    SweepConfig,
    TrackingRunConfig,
)
from app.services.centroid_experiment import run_centroid
from app.services.mean_experiment import run_mean
from app.services.metrics import aggregate
from app.services.reporting import FrameRecorder, write_csv, write_summary
from app.services.tracking_experiment import run_tracking
from app.utils.file_utils import ensure_directory, run_stem

CONFIG_MODELS: dict[str, type[BaseModel]] = {
    "centroid": CentroidRunConfig,
    "mean": MeanRunConfig,
    "track": TrackingRunConfig,
}

# Name of the per-run covariate each experiment reports, if any
COVARIATES: dict[str, Optional[str]] = {
    "centroid": None,
    "mean": "series_std",
    "track": None,
}


def run_experiment(
    kind: str,
    config: BaseModel,
    seed: int,
    frames_dir: Optional[Path] = None,
    frames_every: Optional[int] = None,
    frame_suffix: str = ".pgm",
) -> RunMetrics:
    """
    Run one experiment with the given seed.

    Top-level so it can be shipped to a worker process.

    Args:
        kind: "centroid", "mean" or "track"
        config: Validated config of the matching model
        seed: Run seed, overriding the config's
        frames_dir: Directory for frames of this run
        frames_every: Frame interval in steps; None disables frames
        frame_suffix: Frame file suffix, ".pgm" or ".png"

    Returns:
        The run's metrics
    """
    cfg = config.model_copy(update={"seed": seed})
    hook = None
    if frames_dir is not None and frames_every:
        hook = FrameRecorder(frames_dir, run_stem(kind, seed), frames_every, frame_suffix)

    if kind == "centroid":
        return run_centroid(cfg, on_step=hook).metrics
    if kind == "mean":
        return run_mean(cfg, on_step=hook).metrics
    if kind == "track":
        return run_tracking(cfg, on_step=hook).metrics
    raise InputError(f"Unknown experiment kind: {kind}")


def _init_worker(log_level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level=log_level)


class BatchRunner:
    """
    Runs one experiment over a range of seeds.

    Runs are independent, so they are dispatched concurrently to an executor
    with at most ``workers`` in flight. Results come back ordered by seed and
    do not depend on the worker count.
    """

    def __init__(
        self,
        kind: str,
        config: BaseModel,
        workers: int = 1,
        frames_every: Optional[int] = None,
        frames_root: Optional[Path] = None,
        frame_suffix: str = ".pgm",
        log_level: str = "INFO",
    ):
        """
        Initialize batch runner.

        Args:
            kind: Experiment kind
            config: Validated experiment config
            workers: Maximum concurrent runs; > 1 uses worker processes
            frames_every: Frame interval in steps, None for no frames
            frames_root: Directory under which each run gets a frames folder
            frame_suffix: Frame file suffix
            log_level: Level for worker process logging
        """
        if kind not in CONFIG_MODELS:
            raise InputError(f"Unknown experiment kind: {kind}")
        if workers < 1:
            raise InputError(f"workers must be >= 1, got {workers}")
        self.kind = kind
        self.config = config
        self.workers = workers
        self.frames_every = frames_every
        self.frames_root = frames_root
        self.frame_suffix = frame_suffix
        self.log_level = log_level
        self.semaphore = asyncio.Semaphore(workers)

    def _executor(self) -> Executor:
        if self.workers > 1:
            return ProcessPoolExecutor(
                max_workers=self.workers,
                initializer=_init_worker,
                initargs=(self.log_level,),
            )
        return ThreadPoolExecutor(max_workers=1)

    def _frames_dir(self, seed: int) -> Optional[Path]:
        if self.frames_root is None or not self.frames_every:
            return None
        return self.frames_root / run_stem(self.kind, seed)

    async def _run_one(self, executor: Executor, seed: int) -> RunMetrics:
        async with self.semaphore:
            loop = asyncio.get_running_loop()
            logger.debug(f"Dispatching {self.kind} seed={seed}")
            return await loop.run_in_executor(
                executor,
                run_experiment,
                self.kind,
                self.config,
                seed,
                self._frames_dir(seed),
                self.frames_every,
                self.frame_suffix,
            )

    async def run(self, seeds: Sequence[int]) -> list[RunMetrics]:
        """
        Execute every seed.

        Args:
            seeds: Seeds to run

        Returns:
            Metrics sorted by seed
        """
        if not seeds:
            raise InputError("A batch needs at least one seed")
        logger.info(f"Running {len(seeds)} {self.kind} run(s) on {self.workers} worker(s)")
        with self._executor() as executor:
            results = await asyncio.gather(*(self._run_one(executor, s) for s in seeds))
        return sorted(results, key=lambda m: m.seed)


def seed_range(seed: int, runs: int) -> list[int]:
    """Seeds S, S+1, ..., S+N-1."""
    if runs < 1:
        raise InputError(f"runs must be >= 1, got {runs}")
    return list(range(seed, seed + runs))


def write_batch(kind: str, runs: Sequence[RunMetrics], out_dir: Union[str, Path]) -> BatchSummary:
    """
    Write per-run CSVs plus the batch summary.

    Args:
        kind: Experiment kind
        runs: Metrics of every run
        out_dir: Output directory

    Returns:
        Batch summary
    """
    out_dir = ensure_directory(out_dir)
    for metrics in runs:
        write_csv(metrics, out_dir / f"{run_stem(kind, metrics.seed)}.csv")
    summary = aggregate(runs, COVARIATES[kind])
    write_summary(summary, runs, out_dir)
    rho = f"{summary.rho:.3f}" if summary.rho is not None else "n/a"
    logger.info(
        f"{kind}: {summary.n_runs} run(s), MAE={summary.mae:.3f} "
        f"sigma={summary.sigma:.3f} rho={rho} -> {out_dir}"
    )
    return summary


def run_batch(
    kind: str,
    config: BaseModel,
    seeds: Sequence[int],
    out_dir: Union[str, Path],
    workers: int = 1,
    frames_every: Optional[int] = None,
    frame_suffix: str = ".pgm",
    log_level: str = "INFO",
) -> BatchSummary:
    """Run a seeded batch and write its outputs."""
    out_dir = Path(out_dir)
    runner = BatchRunner(
        kind,
        config,
        workers=workers,
        frames_every=frames_every,
        frames_root=out_dir / "frames",
        frame_suffix=frame_suffix,
        log_level=log_level,
    )
    runs = asyncio.run(runner.run(seeds))
    return write_batch(kind, runs, out_dir)


# ============ Sweeps ============


def set_dotted(data: dict[str, Any], key: str, value: Any) -> None:
    """Set ``data["a"]["b"]`` for key ``"a.b"``, creating tables as needed."""
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"Sweep key {key!r} descends into non-table {part!r}")
        node = child
    node[parts[-1]] = value


def _deep_copy(data: dict[str, Any]) -> dict[str, Any]:
    return {k: _deep_copy(v) if isinstance(v, dict) else v for k, v in data.items()}


def expand_grid(sweep: SweepConfig) -> list[tuple[dict[str, Any], BaseModel]]:
    """
    Cartesian product of the sweep grid, each point validated.

    Returns:
        (overrides, config) for every grid point, in product order
    """
    keys = list(sweep.grid)
    model = CONFIG_MODELS[sweep.experiment]
    points = []
    for values in itertools.product(*(sweep.grid[k] for k in keys)):
        overrides = dict(zip(keys, values))
        data = _deep_copy(sweep.base)
        for key, value in overrides.items():
            set_dotted(data, key, value)
        try:
            points.append((overrides, model.model_validate(data)))
        except ValidationError as e:
            raise ConfigError(f"Sweep point {overrides} is invalid: {e}") from e
    return points


def run_sweep(
    sweep: SweepConfig,
    seeds: Sequence[int],
    out_dir: Union[str, Path],
    workers: int = 1,
    frames_every: Optional[int] = None,
    frame_suffix: str = ".pgm",
    log_level: str = "INFO",
) -> pd.DataFrame:
    """
    Run every grid point over the same seeds.

    Each point writes into its own ``point_NNN`` directory; ``sweep.csv``
    collects one summary row per point.

    Returns:
        The sweep table
    """
    points = expand_grid(sweep)
    out_dir = ensure_directory(out_dir)
    logger.info(f"Sweep over {len(points)} point(s) of {sweep.experiment}")

    rows = []
    for index, (overrides, config) in enumerate(points):
        point_dir = out_dir / f"point_{index:03d}"
        summary = run_batch(
            sweep.experiment,
            config,
            seeds,
            point_dir,
            workers=workers,
            frames_every=frames_every,
            frame_suffix=frame_suffix,
            log_level=log_level,
        )
        row: dict[str, Any] = {"point": index, **overrides}
        row.update(summary.model_dump(exclude={"seeds", "experiment"}))
        rows.append(row)

    table = pd.DataFrame(rows)
    table.to_csv(out_dir / "sweep.csv", index=False)
    logger.info(f"Wrote {out_dir / 'sweep.csv'}")
    return table
