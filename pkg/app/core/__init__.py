"""Simulation engine: lattice, particles, population dynamics and scheduler."""

from app.core.lattice import (
    IlluminationMask,
    OccupancyGrid,
    StimulusEvent,
    StimulusProgram,
    TrailField,
    deposit,
    diffuse_and_damp,
    project_attractant,
    sample_weighted,
)
from app.core.particle import (
    Particle,
    motor_stage_fluid,
    motor_stage_oscillatory,
    sensory_stage,
)
from app.core.population import Population, apply_shrinkage, apply_turnover
from app.core.world import RunStreams, StepStats, World, scheduler_step, spawn_streams

__all__ = [
    "IlluminationMask",
    "OccupancyGrid",
    "StimulusEvent",
    "StimulusProgram",
    "TrailField",
    "deposit",
    "diffuse_and_damp",
    "project_attractant",
    "sample_weighted",
    "Particle",
    "motor_stage_fluid",
    "motor_stage_oscillatory",
    "sensory_stage",
    "Population",
    "apply_shrinkage",
    "apply_turnover",
    "RunStreams",
    "StepStats",
    "World",
    "scheduler_step",
    "spawn_streams",
]
