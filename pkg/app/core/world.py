"""Simulation world and the randomized per-step scheduler."""

import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.core.lattice import IlluminationMask, OccupancyGrid, StimulusProgram, TrailField
from app.core.particle import (
    Particle,
    motor_stage_fluid,
    motor_stage_oscillatory,
    random_heading,
    sensory_stage,
)
from app.core.population import Population, apply_shrinkage, apply_turnover
from app.schemas import EngineConfig


@dataclass(frozen=True)
class StepStats:
    """What happened during one scheduler step."""

    step: int
    moves: int
    removed: int
    born: int
    died: int


class World:
    """
    Lattice, population and stimuli for one simulation run.

    All mutation happens on the caller's thread; a world is never shared
    between runs.
    """

    def __init__(
        self,
        width: int,
        height: int,
        engine: EngineConfig,
        rng: np.random.Generator,
        program: Optional[StimulusProgram] = None,
    ):
        self.engine = engine
        self.rng = rng
        self.trail = TrailField(width, height)
        self.occupancy = OccupancyGrid(width, height)
        self.population = Population(self.occupancy)
        self.program = program if program is not None else StimulusProgram()
        self.illumination = IlluminationMask.inactive(width, height)
        self.step = 0

    @property
    def width(self) -> int:
        return self.trail.width

    @property
    def height(self) -> int:
        return self.trail.height

    def add_particle(self, x: float, y: float, heading: Optional[float] = None) -> Particle:
        """Place a particle; a random heading is drawn from the world stream when omitted."""
        if heading is None:
            heading = random_heading(self.rng)
        return self.population.spawn(x, y, heading)

    def advance(self) -> StepStats:
        """Run one scheduler step with the world's own stream."""
        return scheduler_step(self, self.rng)

    def state_digest(self) -> str:
        """Hash of the full world state, for determinism checks."""
        digest = hashlib.sha256()
        digest.update(np.int64(self.step).tobytes())
        for p in self.population:
            digest.update(np.array([p.id], dtype=np.int64).tobytes())
            digest.update(np.array([p.x, p.y, p.heading, p.osc_dx, p.osc_dy]).tobytes())
        digest.update(self.trail.values.tobytes())
        return digest.hexdigest()


def run_motor_stage(world: World, rng: np.random.Generator) -> int:
    """
    Motor stage over all particles in a fresh random order.

    Returns:
        Number of cell-changing moves
    """
    engine = world.engine
    particles = list(world.population)
    moves = 0
    oscillatory = engine.motor.kind == "oscillatory"
    for index in rng.permutation(len(particles)):
        p = particles[index]
        if oscillatory:
            moved = motor_stage_oscillatory(
                p, world.occupancy, world.trail, engine.motor.pid, rng, engine.deposit
            )
        else:
            moved = motor_stage_fluid(p, world.occupancy, world.trail, rng, engine.deposit)
        moves += moved
    return moves


def run_sensory_stage(world: World, rng: np.random.Generator) -> None:
    """Sensory stage over all particles in a fresh random order."""
    engine = world.engine
    particles = list(world.population)
    for index in rng.permutation(len(particles)):
        p = particles[index]
        p.heading = sensory_stage(
            p, world.trail, world.illumination, engine.sensor, rng, engine.illumination_mode
        )


def scheduler_step(world: World, rng: np.random.Generator) -> StepStats:
    """
    Advance the world by one step.

    Order: stimulus projection, motor and sensory stages (order configurable),
    diffusion/damping, then shrinkage and turnover.

    Args:
        world: World to advance
        rng: Random stream consumed in iteration order

    Returns:
        Step statistics
    """
    engine = world.engine
    step = world.step

    world.illumination = world.program.apply(world.trail, step)
    world.population.clear_moved()

    if engine.stage_order == "motor_first":
        moves = run_motor_stage(world, rng)
        run_sensory_stage(world, rng)
    else:
        run_sensory_stage(world, rng)
        moves = run_motor_stage(world, rng)

    world.trail.diffuse(engine.damping)

    removed = apply_shrinkage(world.population, engine.shrink, step, rng)
    born = died = 0
    turnover = engine.turnover
    if turnover.enabled and step >= turnover.start_step and step % turnover.frequency == 0:
        born, died = apply_turnover(world.population, turnover, rng)

    world.step += 1
    return StepStats(step=step, moves=moves, removed=removed, born=born, died=died)


@dataclass(frozen=True)
class RunStreams:
    """Independent random streams of one run."""

    engine: np.random.Generator
    init: np.random.Generator
    data: np.random.Generator


def spawn_streams(seed: int) -> RunStreams:
    """Derive the engine, init and data streams from a run seed."""
    engine, init, data = np.random.SeedSequence(seed).spawn(3)
    return RunStreams(
        engine=np.random.default_rng(engine),
        init=np.random.default_rng(init),
        data=np.random.default_rng(data),
    )
