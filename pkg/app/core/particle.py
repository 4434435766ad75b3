"""Particle state and the two-stage particle algorithm (sensory, motor)."""

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from app.core.lattice import IlluminationMask, OccupancyGrid, TrailField, deposit, sample_weighted
from app.schemas import SensorParams


@dataclass(slots=True)
class Particle:
    """
    A single particle of the virtual material.

    ``(x, y)`` is continuous; the particle's lattice cell is its floor.
    ``osc_dx``/``osc_dy`` hold displacement accumulated while blocked in
    oscillatory mode and stay zero in fluid mode.
    """

    id: int
    x: float
    y: float
    heading: float
    osc_dx: float = 0.0
    osc_dy: float = 0.0
    moved: bool = False

    @property
    def cell(self) -> tuple[int, int]:
        return math.floor(self.x), math.floor(self.y)


def normalize_heading(heading: float) -> float:
    """Wrap into [0, 360)."""
    heading %= 360.0
    # tiny negatives wrap to exactly 360.0 in floating point
    return 0.0 if heading >= 360.0 else heading


def random_heading(rng: np.random.Generator) -> float:
    return normalize_heading(rng.random() * 360.0)


def sensor_cells(p: Particle, sp: SensorParams) -> tuple[tuple[int, int], ...]:
    """Cells under the FL, F and FR sensors."""
    cells = []
    for angle in (p.heading - sp.sa, p.heading, p.heading + sp.sa):
        rad = math.radians(angle)
        cells.append(
            (math.floor(p.x + sp.so * math.cos(rad)), math.floor(p.y + sp.so * math.sin(rad)))
        )
    return tuple(cells)


def sense(
    p: Particle,
    trail: TrailField,
    mask: Optional[IlluminationMask],
    sp: SensorParams,
    illumination_mode: Literal["sensor", "body"] = "sensor",
) -> tuple[float, float, float]:
    """
    Read the three sensors.

    In ``sensor`` mode each exposed sensor cell is weighted on its own. In
    ``body`` mode all three reads are weighted when the particle's own cell
    is exposed.

    Returns:
        (FL, F, FR) concentrations
    """
    fl_cell, f_cell, fr_cell = sensor_cells(p, sp)
    if illumination_mode == "sensor":
        return (
            sample_weighted(trail, fl_cell, mask),
            sample_weighted(trail, f_cell, mask),
            sample_weighted(trail, fr_cell, mask),
        )

    fl = sample_weighted(trail, fl_cell, None)
    f = sample_weighted(trail, f_cell, None)
    fr = sample_weighted(trail, fr_cell, None)
    if mask is not None and mask.is_exposed(*p.cell):
        return fl * mask.weight, f * mask.weight, fr * mask.weight
    return fl, f, fr


def choose_heading(
    heading: float, fl: float, f: float, fr: float, ra: float, rng: np.random.Generator
) -> float:
    """
    Sensory branch: rotate towards the strongest source.

    Forward strictly strongest keeps the heading; forward strictly weakest
    turns by RA to a random side; otherwise turn towards the larger side
    sensor. Remaining ties keep the heading.
    """
    if f > fl and f > fr:
        return heading
    if f < fl and f < fr:
        turn = -ra if rng.random() < 0.5 else ra
        return normalize_heading(heading + turn)
    if fl > fr:
        return normalize_heading(heading - ra)
    if fr > fl:
        return normalize_heading(heading + ra)
    return heading


def sensory_stage(
    p: Particle,
    trail: TrailField,
    mask: Optional[IlluminationMask],
    sp: SensorParams,
    rng: np.random.Generator,
    illumination_mode: Literal["sensor", "body"] = "sensor",
) -> float:
    """
    Compute the particle's new heading from its sensors.

    Args:
        p: Live particle
        trail: Chemoattractant field
        mask: Current illumination, or None
        sp: Sensor morphology
        rng: Engine random stream
        illumination_mode: How illumination weights the reads

    Returns:
        New heading in [0, 360)
    """
    fl, f, fr = sense(p, trail, mask, sp, illumination_mode)
    return choose_heading(p.heading, fl, f, fr, sp.ra, rng)


def _step_forward(p: Particle) -> tuple[float, float, float, float]:
    rad = math.radians(p.heading)
    ux, uy = math.cos(rad), math.sin(rad)
    return p.x + ux, p.y + uy, ux, uy


def motor_stage_fluid(
    p: Particle,
    occupancy: OccupancyGrid,
    trail: TrailField,
    rng: np.random.Generator,
    deposit_amount: float = 5.0,
) -> bool:
    """
    Move one pixel forwards, or pick a random heading when blocked.

    Args:
        p: Live particle
        occupancy: Particle grid
        trail: Field receiving deposits
        rng: Engine random stream
        deposit_amount: Trail units deposited on a cell change

    Returns:
        True when the particle changed cell
    """
    nx, ny, _, _ = _step_forward(p)
    src = (math.floor(p.x), math.floor(p.y))
    dst = (math.floor(nx), math.floor(ny))

    if dst == src:
        p.x, p.y = nx, ny
        return False

    if occupancy.is_free(*dst):
        occupancy.move(p.id, src, dst)
        p.x, p.y = nx, ny
        deposit(trail, dst, deposit_amount)
        p.moved = True
        return True

    p.heading = random_heading(rng)
    return False


def motor_stage_oscillatory(
    p: Particle,
    occupancy: OccupancyGrid,
    trail: TrailField,
    pid: float,
    rng: np.random.Generator,
    deposit_amount: float = 5.0,
) -> bool:
    """
    Inertial movement: a blocked particle keeps its heading and accumulates
    its intended displacement until the cell directly ahead frees up.

    With probability ``pid`` per step the accumulated displacement is reset
    and the heading resampled.

    Returns:
        True when the particle changed cell
    """
    nx, ny, ux, uy = _step_forward(p)
    src = (math.floor(p.x), math.floor(p.y))
    dst = (math.floor(nx), math.floor(ny))
    changed = False

    if dst == src or occupancy.is_free(*dst):
        if dst != src:
            occupancy.move(p.id, src, dst)
            deposit(trail, dst, deposit_amount)
            p.moved = True
            changed = True
        p.x, p.y = nx, ny
        p.osc_dx = 0.0
        p.osc_dy = 0.0
    else:
        p.osc_dx += ux
        p.osc_dy += uy

    if rng.random() < pid:
        p.osc_dx = 0.0
        p.osc_dy = 0.0
        p.heading = random_heading(rng)

    return changed
