"""Arithmetic mean approximation of a series encoded as a thick polyline."""

from typing import Optional

from loguru import logger

from app.core.world import World, spawn_streams
from app.data.series import (
    DataSeries,
    SeriesLayout,
    arithmetic_mean,
    encode_series,
    geometric_mean,
    harmonic_mean,
    series_from_spec,
)
from app.schemas import EngineConfig, MeanResult, MeanRunConfig, RunMetrics, ShrinkPolicy
from app.services.harness import StepHook, centroid_or_none, fill_mask, hold_program, record


def release_policies(cfg: MeanRunConfig) -> EngineConfig:
    """Engine with turnover and background removal both starting when the hold ends."""
    turnover = cfg.engine.turnover
    start = max(turnover.start_step, cfg.hold_steps)
    shrink = ShrinkPolicy(
        kind="uniform_random" if cfg.p_remove > 0 else "none",
        p_remove=cfg.p_remove,
        start_step=cfg.hold_steps,
    )
    return cfg.engine.model_copy(
        update={"shrink": shrink, "turnover": turnover.model_copy(update={"start_step": start})}
    )


def run_mean(
    cfg: MeanRunConfig,
    series: Optional[DataSeries] = None,
    on_step: Optional[StepHook] = None,
) -> MeanResult:
    """
    Run one arithmetic mean approximation.

    The series is drawn from the run's data stream (or taken from the
    config), encoded on the lattice and filled with particles. After the hold
    the material contracts under turnover and background removal; the final blob row, mapped back
    through the inverted value axis, is the estimate.

    Args:
        cfg: Run configuration
        series: Series to use instead of drawing one
        on_step: Called with the world after initialization and after every step

    Returns:
        Mean result; errors are in value units (pixels at scale 1)
    """
    streams = spawn_streams(cfg.seed)
    data = series if series is not None else series_from_spec(cfg.series, streams.data)
    enc = cfg.encoding
    layout = SeriesLayout(enc, len(data), data.lo, data.hi)
    mask = encode_series(data, enc, layout.width, layout.height)
    truth = arithmetic_mean(data)

    engine = release_policies(cfg)
    program = hold_program(mask, cfg.hold_steps, engine.projection_magnitude)
    world = World(mask.width, mask.height, engine, streams.engine, program)
    placed = fill_mask(world, mask, streams.init)

    logger.info(
        f"Mean run seed={cfg.seed}: n={len(data)} sorted={data.sorted} "
        f"{placed} particles, mean={truth:.2f}"
    )

    def value_error(centroid: tuple[float, float]) -> float:
        return abs(layout.value(centroid[1]) - truth)

    centroid = centroid_or_none(world)
    records = [record(world, centroid, value_error(centroid))]
    if on_step:
        on_step(world)

    halt_reason = "step_cap"
    while world.step < cfg.max_steps:
        world.advance()
        if on_step:
            on_step(world)

        current = centroid_or_none(world)
        if current is None:
            halt_reason = "population"
            break
        centroid = current
        records.append(record(world, centroid, value_error(centroid)))

        if len(world.population) < cfg.halt_population:
            halt_reason = "population"
            break
        if world.step % cfg.log_every == 0:
            logger.debug(
                f"step={world.step} population={len(world.population)} "
                f"value={layout.value(centroid[1]):.2f}"
            )

    if halt_reason == "step_cap":
        logger.warning(
            f"Mean run seed={cfg.seed} hit max_steps={cfg.max_steps} "
            f"with {len(world.population)} particles left"
        )

    final_value = layout.value(centroid[1])
    gmean = geometric_mean(data)
    hmean = harmonic_mean(data)
    extra = {
        "final_value": final_value,
        "arithmetic_mean": truth,
        "signed_error": final_value - truth,
        "series_std": data.std(),
        "initial_population": float(placed),
    }
    if gmean is not None:
        extra["geometric_mean"] = gmean
    if hmean is not None:
        extra["harmonic_mean"] = hmean

    logger.info(
        f"Mean run seed={cfg.seed} halted ({halt_reason}) at step {world.step}: "
        f"value={final_value:.2f} mean={truth:.2f}"
    )

    metrics = RunMetrics(
        experiment="mean",
        seed=cfg.seed,
        records=records,
        final_error=records[-1].error,
        halt_step=world.step,
        halt_reason=halt_reason,
        covariate=data.std(),
        extra=extra,
    )
    return MeanResult(
        metrics=metrics,
        series=list(data.values),
        final_value=final_value,
        arithmetic_mean=truth,
        geometric_mean=gmean,
        harmonic_mean=hmean,
    )
