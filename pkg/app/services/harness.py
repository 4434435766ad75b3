"""Pieces shared by the experiment harnesses."""

import math
from typing import Callable, Optional

import numpy as np

from app.core.errors import EstimationError
from app.core.lattice import StimulusEvent, StimulusProgram
from app.core.particle import random_heading
from app.core.world import World
from app.data.shapes import ShapeMask, blob_centroid
from app.schemas import StepRecord

StepHook = Callable[[World], None]


def hold_program(mask: ShapeMask, hold_steps: int, magnitude: float) -> StimulusProgram:
    """Program projecting attractant over the whole mask for the first ``hold_steps`` steps."""
    program = StimulusProgram()
    if hold_steps > 0:
        program.add(
            StimulusEvent(
                start=0,
                duration=hold_steps,
                kind="attractant_pattern",
                sites=mask.inside.copy(),
                magnitude=magnitude,
            )
        )
    return program


def fill_mask(
    world: World, mask: ShapeMask, rng: np.random.Generator, density: float = 1.0
) -> int:
    """
    Seed one particle per inside cell, or a uniform subsample of them.

    Particles sit exactly on their cell coordinates, so a full fill has the
    mask's centroid.

    Returns:
        Number of particles placed
    """
    cells = mask.cells()
    if density < 1.0:
        k = max(1, int(round(density * len(cells))))
        chosen = np.sort(rng.choice(len(cells), size=k, replace=False))
        cells = cells[chosen]
    for x, y in cells:
        world.add_particle(float(x), float(y), heading=random_heading(rng))
    return len(cells)


def centroid_or_none(world: World) -> Optional[tuple[float, float]]:
    try:
        return blob_centroid(world.population)
    except EstimationError:
        return None


def record(world: World, centroid: tuple[float, float], error: float, **extra: float) -> StepRecord:
    return StepRecord(
        step=world.step,
        x=centroid[0],
        y=centroid[1],
        population=len(world.population),
        error=error,
        **extra,
    )


def distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def min_margin(so: float) -> int:
    """Smallest lattice margin that keeps sensors of edge particles off the boundary."""
    return int(math.ceil(2 * so))
