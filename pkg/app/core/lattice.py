"""Chemoattractant lattice, single-occupancy particle grid and stimulus projection."""

from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional, Union

import numpy as np
from scipy.ndimage import convolve

from app.core.errors import ContractViolation

EMPTY = -1

_MEAN_KERNEL = np.ones((3, 3), dtype=np.float64)

Sites = Union[np.ndarray, Iterable[tuple[int, int]]]


class TrailField:
    """2D grid of non-negative chemoattractant concentrations.

    Values are stored row-major as ``values[y, x]``; dimensions are fixed for
    the lifetime of the field.
    """

    def __init__(self, width: int, height: int, values: Optional[np.ndarray] = None):
        if width < 1 or height < 1:
            raise ContractViolation(f"Field dimensions must be positive: {width}x{height}")
        self._width = width
        self._height = height
        if values is None:
            values = np.zeros((height, width), dtype=np.float64)
        elif values.shape != (height, width):
            raise ContractViolation(
                f"Values shape {values.shape} does not match {height}x{width}"
            )
        self.values = values

    @property
    def width(self) -> int:
        return self._width

    @property
    def height(self) -> int:
        return self._height

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self._width and 0 <= y < self._height

    def value(self, x: int, y: int) -> float:
        """Concentration at a cell; out-of-bounds reads return 0."""
        if 0 <= x < self._width and 0 <= y < self._height:
            return float(self.values[y, x])
        return 0.0

    def total(self) -> float:
        return float(self.values.sum())

    def copy(self) -> "TrailField":
        return TrailField(self._width, self._height, self.values.copy())

    def diffuse(self, damping: float) -> None:
        """Diffuse and damp in place."""
        self.values = diffuse_and_damp(self, damping).values


def diffuse_and_damp(trail: TrailField, damping: float) -> TrailField:
    """
    One diffusion pass: damped 3x3 mean filter.

    Out-of-bounds neighbours contribute 0 and still count in the divisor of 9,
    so mass leaks at the edges.

    Args:
        trail: Field to diffuse
        damping: Multiplier in (0, 1] applied to the mean

    Returns:
        New field
    """
    if not 0.0 < damping <= 1.0:
        raise ContractViolation(f"Damping must be in (0, 1], got {damping}")

    out = convolve(trail.values, _MEAN_KERNEL, mode="constant", cval=0.0)
    out *= damping / 9.0
    np.maximum(out, 0.0, out=out)
    return TrailField(trail.width, trail.height, out)


def deposit(trail: TrailField, cell: tuple[int, int], amount: float) -> None:
    """
    Add chemoattractant to a single cell.

    Args:
        trail: Field to modify
        cell: (x, y) lattice coordinate
        amount: Non-negative concentration to add
    """
    x, y = cell
    if not trail.in_bounds(x, y):
        raise ContractViolation(f"Deposit outside lattice at ({x}, {y})")
    if amount < 0:
        raise ContractViolation(f"Deposit amount must be >= 0, got {amount}")
    trail.values[y, x] += amount


def project_attractant(trail: TrailField, sites: Sites, magnitude: float) -> None:
    """
    Add ``magnitude`` to every stimulus site for this step.

    Args:
        trail: Field to modify
        sites: Boolean mask of the field's shape, or (x, y) coordinates
        magnitude: Concentration per site per step
    """
    if isinstance(sites, np.ndarray) and sites.dtype == np.bool_:
        if sites.shape != trail.values.shape:
            raise ContractViolation(
                f"Site mask shape {sites.shape} does not match field {trail.values.shape}"
            )
        trail.values[sites] += magnitude
        return

    for x, y in sites:
        if not trail.in_bounds(x, y):
            raise ContractViolation(f"Stimulus site outside lattice at ({x}, {y})")
        trail.values[y, x] += magnitude


@dataclass
class IlluminationMask:
    """Cells exposed to simulated light; sensed values there are scaled by ``weight``."""

    exposed: np.ndarray
    weight: float = 0.1
    active: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.weight <= 1.0:
            raise ContractViolation(f"Illumination weight must be in (0, 1], got {self.weight}")

    @classmethod
    def inactive(cls, width: int, height: int) -> "IlluminationMask":
        return cls(np.zeros((height, width), dtype=bool), active=False)

    def is_exposed(self, x: int, y: int) -> bool:
        if not self.active:
            return False
        h, w = self.exposed.shape
        return 0 <= x < w and 0 <= y < h and bool(self.exposed[y, x])


def sample_weighted(
    trail: TrailField, cell: tuple[int, int], mask: Optional[IlluminationMask]
) -> float:
    """
    Read a sensor cell, applying illumination weighting.

    Args:
        trail: Field to read
        cell: (x, y) sensor cell
        mask: Current illumination, or None

    Returns:
        Concentration, scaled when the cell is exposed; 0 out of bounds
    """
    x, y = cell
    if not (0 <= x < trail.width and 0 <= y < trail.height):
        return 0.0
    value = float(trail.values[y, x])
    if mask is not None and mask.active and mask.exposed[y, x]:
        value *= mask.weight
    return value


class OccupancyGrid:
    """Lattice mapping each cell to at most one particle identity."""

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.cells = np.full((height, width), EMPTY, dtype=np.int64)

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def occupant(self, x: int, y: int) -> Optional[int]:
        pid = int(self.cells[y, x])
        return None if pid == EMPTY else pid

    def is_free(self, x: int, y: int) -> bool:
        """In bounds and unoccupied."""
        return 0 <= x < self.width and 0 <= y < self.height and self.cells[y, x] == EMPTY

    def place(self, pid: int, x: int, y: int) -> None:
        if not self.is_free(x, y):
            raise ContractViolation(f"Cannot place particle {pid} at ({x}, {y})")
        self.cells[y, x] = pid

    def vacate(self, x: int, y: int) -> None:
        self.cells[y, x] = EMPTY

    def move(self, pid: int, src: tuple[int, int], dst: tuple[int, int]) -> None:
        sx, sy = src
        dx, dy = dst
        if self.cells[sy, sx] != pid:
            raise ContractViolation(f"Particle {pid} is not at ({sx}, {sy})")
        self.place(pid, dx, dy)
        self.cells[sy, sx] = EMPTY

    def occupied(self) -> np.ndarray:
        return self.cells != EMPTY

    def count(self) -> int:
        return int(np.count_nonzero(self.cells != EMPTY))

    def window_counts(self, size: int) -> np.ndarray:
        """Occupied cells in the ``size`` x ``size`` window centred on every cell."""
        kernel = np.ones((size, size), dtype=np.int64)
        return convolve(self.occupied().astype(np.int64), kernel, mode="constant", cval=0)


StimulusKindName = Literal["attractant_points", "attractant_pattern", "illumination_mask"]


@dataclass
class StimulusEvent:
    """
    One timed stimulus.

    For attractant kinds ``sites`` marks where attractant is projected and
    ``magnitude`` is the concentration per step. For illumination ``sites``
    marks exposed cells and ``magnitude`` is the sensing weight.
    """

    start: int
    duration: int
    kind: StimulusKindName
    sites: np.ndarray
    magnitude: float

    def __post_init__(self) -> None:
        if self.start < 0:
            raise ContractViolation(f"Stimulus start must be >= 0, got {self.start}")
        if self.duration < 1:
            raise ContractViolation(f"Stimulus duration must be >= 1, got {self.duration}")

    @property
    def end(self) -> int:
        return self.start + self.duration

    def is_active(self, step: int) -> bool:
        return self.start <= step < self.end


@dataclass
class StimulusProgram:
    """Time-ordered sequence of stimulus events."""

    events: list[StimulusEvent] = field(default_factory=list)

    def __post_init__(self) -> None:
        for prev, cur in zip(self.events, self.events[1:]):
            if cur.start < prev.start:
                raise ContractViolation("Stimulus events must be time-ordered")

    def add(self, event: StimulusEvent) -> None:
        if self.events and event.start < self.events[-1].start:
            raise ContractViolation(
                f"Event at step {event.start} precedes last event at {self.events[-1].start}"
            )
        self.events.append(event)

    def active(self, step: int) -> list[StimulusEvent]:
        found = []
        for event in self.events:
            if event.start > step:
                break
            if event.is_active(step):
                found.append(event)
        return found

    def apply(self, trail: TrailField, step: int) -> IlluminationMask:
        """
        Project this step's attractants and build its illumination.

        Events that ended before ``step`` are dropped; steps are applied in
        increasing order.

        Args:
            trail: Field receiving attractant
            step: Current scheduler step

        Returns:
            Union of active illumination masks (inactive when there are none)
        """
        if any(event.end <= step for event in self.events):
            self.events = [event for event in self.events if event.end > step]

        exposed: Optional[np.ndarray] = None
        weight = 1.0
        for event in self.active(step):
            if event.kind == "illumination_mask":
                exposed = event.sites.copy() if exposed is None else exposed | event.sites
                weight = min(weight, event.magnitude)
            else:
                project_attractant(trail, event.sites, event.magnitude)

        if exposed is None:
            return IlluminationMask.inactive(trail.width, trail.height)
        return IlluminationMask(exposed, weight=weight, active=True)


def disc_sites(width: int, height: int, center: tuple[float, float], radius: float) -> np.ndarray:
    """Boolean mask of cells within ``radius`` of ``center`` (clipped to the lattice)."""
    ys, xs = np.mgrid[0:height, 0:width]
    cx, cy = center
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= radius * radius


def outside_square(width: int, height: int, center: tuple[float, float], size: int) -> np.ndarray:
    """Boolean mask that is True everywhere except a ``size`` square centred on ``center``."""
    exposed = np.ones((height, width), dtype=bool)
    x0 = int(round(center[0] - size / 2))
    y0 = int(round(center[1] - size / 2))
    x1, y1 = x0 + size, y0 + size
    exposed[max(y0, 0) : max(min(y1, height), 0), max(x0, 0) : max(min(x1, width), 0)] = False
    return exposed
