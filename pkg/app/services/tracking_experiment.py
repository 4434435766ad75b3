"""Moving-target tracking by an oscillatory blob driven by noisy stimuli."""

import math
from typing import Optional

import numpy as np
from loguru import logger

from app.core.errors import InputError, TargetOutOfArena
from app.core.lattice import StimulusEvent, disc_sites, outside_square
from app.core.particle import random_heading
from app.core.world import World, spawn_streams
from app.schemas import RunMetrics, SpiralParams, TrackingResult, TrackingRunConfig
from app.services.harness import StepHook, centroid_or_none, distance, min_margin, record


def spiral_target(
    k: int,
    params: SpiralParams,
    center: tuple[float, float],
    arena: Optional[tuple[int, int]] = None,
    margin: float = 0.0,
) -> tuple[float, float]:
    """
    Position of the target after ``k`` updates on an outward Archimedean spiral.

    Args:
        k: Update index, >= 0
        params: Spiral growth and angular step
        center: Spiral origin
        arena: (width, height) used to detect the target leaving the arena
        margin: Distance from every edge the target must keep

    Returns:
        (x, y) target position
    """
    if k < 0:
        raise InputError(f"Update index must be >= 0, got {k}")
    theta = k * params.angular_step
    radius = params.growth * theta
    x = center[0] + radius * math.cos(theta)
    y = center[1] + radius * math.sin(theta)

    if arena is not None:
        width, height = arena
        if not (margin <= x <= width - 1 - margin and margin <= y <= height - 1 - margin):
            raise TargetOutOfArena((x, y), k)
    return x, y


def add_noise(
    pos: tuple[float, float],
    sigma: float,
    rng: np.random.Generator,
    bounds: Optional[tuple[int, int]] = None,
) -> tuple[float, float]:
    """
    Contaminate a position with independent Gaussian noise per axis.

    Args:
        pos: True (x, y)
        sigma: Standard deviation per axis, >= 0
        rng: Data random stream
        bounds: (width, height); the result is clamped into the arena

    Returns:
        Noisy (x, y)
    """
    if sigma < 0:
        raise InputError(f"Noise sigma must be >= 0, got {sigma}")
    x, y = pos
    if sigma > 0:
        dx, dy = rng.normal(0.0, sigma, 2)
        x, y = x + float(dx), y + float(dy)
    if bounds is not None:
        width, height = bounds
        x = min(max(x, 0.0), width - 1.0)
        y = min(max(y, 0.0), height - 1.0)
    return x, y


def alternation_phases(start: int, length: int, period: int) -> list[tuple[int, int, bool]]:
    """
    Split ``[start, start + length)`` into runs of the global alternation.

    Steps with ``step // period`` even attract, odd ones repel, so the
    pattern is independent of when target updates happen.

    Returns:
        (start, duration, attract) segments in time order
    """
    segments = []
    step, end = start, start + length
    while step < end:
        phase_end = min((step // period + 1) * period, end)
        segments.append((step, phase_end - step, (step // period) % 2 == 0))
        step = phase_end
    return segments


def stimulus_events(
    cfg: TrackingRunConfig, start: int, noisy: tuple[float, float]
) -> list[StimulusEvent]:
    """Events driven by one noisy reading, covering steps from ``start`` on."""
    size = cfg.arena_size
    engine = cfg.engine
    site = (float(round(noisy[0])), float(round(noisy[1])))

    def attract(at: int, duration: int) -> StimulusEvent:
        return StimulusEvent(
            start=at,
            duration=duration,
            kind="attractant_points",
            sites=disc_sites(size, size, site, cfg.point_radius),
            magnitude=engine.projection_magnitude,
        )

    def repel(at: int, duration: int) -> StimulusEvent:
        return StimulusEvent(
            start=at,
            duration=duration,
            kind="illumination_mask",
            sites=outside_square(size, size, noisy, cfg.mask_size),
            magnitude=engine.illumination_weight,
        )

    if cfg.stimulus == "positive":
        return [attract(start, cfg.projection_steps)]
    if cfg.stimulus == "negative":
        return [repel(start, cfg.projection_steps)]
    return [
        attract(at, duration) if attracting else repel(at, duration)
        for at, duration, attracting in alternation_phases(
            start, cfg.update_period, cfg.alternation_period
        )
    ]


def seed_window(world: World, cfg: TrackingRunConfig, rng: np.random.Generator) -> None:
    """Place the population on distinct random cells of the central window."""
    side = cfg.init_window
    x0 = (cfg.arena_size - side) // 2
    chosen = rng.choice(side * side, size=cfg.population, replace=False)
    for index in chosen:
        x, y = x0 + int(index) % side, x0 + int(index) // side
        world.add_particle(float(x), float(y), heading=random_heading(rng))


def run_tracking(cfg: TrackingRunConfig, on_step: Optional[StepHook] = None) -> TrackingResult:
    """
    Run one tracking experiment.

    Every ``update_period`` steps the target advances along the spiral (it
    stays at the centre until the coalescence gate) and a noisy reading of
    its position drives the configured stimulus. The run ends when the
    spiral leaves the arena margin.

    Args:
        cfg: Run configuration
        on_step: Called with the world after initialization and after every step

    Returns:
        Tracking result with target, stimulus and blob traces
    """
    streams = spawn_streams(cfg.seed)
    size = cfg.arena_size
    center = ((size - 1) / 2.0, (size - 1) / 2.0)
    margin = cfg.edge_margin if cfg.edge_margin is not None else min_margin(cfg.engine.sensor.so)

    world = World(size, size, cfg.engine, streams.engine)
    seed_window(world, cfg, streams.init)

    logger.info(
        f"Tracking run seed={cfg.seed}: {len(world.population)} particles, "
        f"stimulus={cfg.stimulus}, sigma={cfg.noise_sigma}"
    )

    target = spiral_target(0, cfg.spiral, center)
    noisy = target
    blob = centroid_or_none(world)
    records = [
        record(
            world,
            blob,
            distance(target, blob),
            target_x=target[0],
            target_y=target[1],
            stimulus_x=noisy[0],
            stimulus_y=noisy[1],
        )
    ]
    if on_step:
        on_step(world)

    halt_reason = "step_cap"
    while world.step < cfg.max_steps:
        step = world.step
        if step % cfg.update_period == 0:
            k = max(0, (step - cfg.coalescence_steps) // cfg.update_period)
            try:
                target = spiral_target(k, cfg.spiral, center, (size, size), margin)
            except TargetOutOfArena as e:
                logger.info(f"Tracking run seed={cfg.seed}: {e}")
                halt_reason = "target_exited"
                break
            noisy = add_noise(target, cfg.noise_sigma, streams.data, (size, size))
            for event in stimulus_events(cfg, step, noisy):
                world.program.add(event)

        world.advance()
        if on_step:
            on_step(world)

        current = centroid_or_none(world)
        if current is None:
            halt_reason = "population"
            break
        blob = current
        records.append(
            record(
                world,
                blob,
                distance(target, blob),
                target_x=target[0],
                target_y=target[1],
                stimulus_x=noisy[0],
                stimulus_y=noisy[1],
            )
        )
        if world.step % cfg.log_every == 0:
            logger.debug(f"step={world.step} error={records[-1].error:.2f}")

    scored = [r.error for r in records if r.step >= cfg.coalescence_steps]
    final_error = float(np.mean(scored)) if scored else records[-1].error

    logger.info(
        f"Tracking run seed={cfg.seed} halted ({halt_reason}) at step {world.step}: "
        f"mean error={final_error:.2f}"
    )

    metrics = RunMetrics(
        experiment="track",
        seed=cfg.seed,
        records=records,
        final_error=final_error,
        halt_step=world.step,
        halt_reason=halt_reason,
        extra={
            "max_error": float(max(scored)) if scored else records[-1].error,
            "last_error": records[-1].error,
            "arena_half_diagonal": math.hypot(size, size) / 2.0,
        },
    )
    return TrackingResult(
        metrics=metrics,
        steps=[r.step for r in records],
        target=[(r.target_x, r.target_y) for r in records],
        stimulus=[(r.stimulus_x, r.stimulus_y) for r in records],
        blob=[(r.x, r.y) for r in records],
        errors=[r.error for r in records],
        score_start=cfg.coalescence_steps,
    )
