"""Centroid approximation: hold a blob in a shape, release it, shrink it."""

from typing import Optional

from loguru import logger

from app.core.errors import InputError
from app.core.world import World, spawn_streams
from app.data.shapes import (
    ShapeMask,
    builtin_shape,
    convex_hull_mask,
    image_centroid,
    load_shape_mask,
)
from app.schemas import CentroidResult, CentroidRunConfig, MaskSource, RunMetrics, ShrinkPolicy
from app.services.harness import (
    StepHook,
    centroid_or_none,
    distance,
    fill_mask,
    hold_program,
    min_margin,
    record,
)


def resolve_mask(source: MaskSource) -> ShapeMask:
    """Load or generate the shape a config names."""
    if source.image is not None:
        return load_shape_mask(source.image, source.threshold)
    if source.builtin is not None:
        return builtin_shape(source.builtin, source.builtin_size)
    return convex_hull_mask(source.hull_points)


def prepare_mask(cfg: CentroidRunConfig, mask: Optional[ShapeMask] = None) -> ShapeMask:
    """
    Resolve the configured shape and pad it with the lattice margin.

    Args:
        cfg: Run configuration
        mask: Shape to use instead of ``cfg.mask``

    Returns:
        Padded mask holding enough particles to reach the halt threshold
    """
    shape = mask if mask is not None else resolve_mask(cfg.mask)
    margin = cfg.margin if cfg.margin is not None else min_margin(cfg.engine.sensor.so)
    padded = shape.padded(margin)

    cells = padded.count()
    placed = cells if cfg.density >= 1.0 else max(1, int(round(cfg.density * cells)))
    if placed < cfg.halt_population:
        raise InputError(
            f"Mask gives {placed} particles, fewer than halt population {cfg.halt_population}"
        )
    return padded


def shrink_policy_for(cfg: CentroidRunConfig) -> ShrinkPolicy:
    """Removal starts when the hold ends, or ``shrink_delay`` steps later when delayed."""
    start = cfg.hold_steps + (cfg.shrink_delay if cfg.shrink_schedule == "delayed" else 0)
    return ShrinkPolicy(kind="uniform_random", p_remove=cfg.p_remove, start_step=start)


def run_centroid(
    cfg: CentroidRunConfig,
    mask: Optional[ShapeMask] = None,
    on_step: Optional[StepHook] = None,
) -> CentroidResult:
    """
    Run one centroid approximation.

    The blob fills the shape, is held by attractant projected over the shape
    for ``hold_steps`` steps, then adapts while particles are removed. The run
    halts when the population drops below ``halt_population``.

    Args:
        cfg: Run configuration
        mask: Shape to use instead of ``cfg.mask``
        on_step: Called with the world after initialization and after every step

    Returns:
        Centroid result with the per-step error trace
    """
    streams = spawn_streams(cfg.seed)
    padded = prepare_mask(cfg, mask)
    truth = image_centroid(padded)

    engine = cfg.engine.model_copy(update={"shrink": shrink_policy_for(cfg)})
    program = hold_program(padded, cfg.hold_steps, engine.projection_magnitude)
    world = World(padded.width, padded.height, engine, streams.engine, program)
    placed = fill_mask(world, padded, streams.init, cfg.density)

    logger.info(
        f"Centroid run seed={cfg.seed}: {placed} particles on {padded.width}x{padded.height}, "
        f"schedule={cfg.shrink_schedule}, truth=({truth[0]:.2f}, {truth[1]:.2f})"
    )

    centroid = centroid_or_none(world)
    records = [record(world, centroid, distance(centroid, truth))]
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
        records.append(record(world, centroid, distance(centroid, truth)))

        if len(world.population) < cfg.halt_population:
            halt_reason = "population"
            break
        if world.step % cfg.log_every == 0:
            logger.debug(
                f"step={world.step} population={len(world.population)} "
                f"error={records[-1].error:.2f}"
            )

    if halt_reason == "step_cap":
        logger.warning(
            f"Centroid run seed={cfg.seed} hit max_steps={cfg.max_steps} "
            f"with {len(world.population)} particles left"
        )

    final_error = records[-1].error
    logger.info(
        f"Centroid run seed={cfg.seed} halted ({halt_reason}) at step {world.step}: "
        f"error={final_error:.2f}"
    )

    metrics = RunMetrics(
        experiment="centroid",
        seed=cfg.seed,
        records=records,
        final_error=final_error,
        halt_step=world.step,
        halt_reason=halt_reason,
        extra={
            "truth_x": truth[0],
            "truth_y": truth[1],
            "initial_population": float(placed),
        },
    )
    return CentroidResult(metrics=metrics, image_centroid=truth, final_centroid=centroid)
