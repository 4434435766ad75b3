"""Population container, blob shrinkage and division/survival turnover."""

import math
from typing import Iterator

import numpy as np
from loguru import logger

from app.core.errors import ContractViolation
from app.core.lattice import OccupancyGrid
from app.core.particle import Particle, random_heading
from app.schemas import ShrinkPolicy, TurnoverPolicy

_NEIGHBOURS = [(dx, dy) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if dx or dy]


class Population:
    """
    Live particles keyed by identity, kept in step with an occupancy grid.

    Iteration order is insertion order, so it is a pure function of the
    run's history.
    """

    def __init__(self, occupancy: OccupancyGrid):
        self.occupancy = occupancy
        self.particles: dict[int, Particle] = {}
        self._next_id = 0
        # deletions made by the last survival test, spent by replacement-limited division
        self.turnover_credit = 0

    def __len__(self) -> int:
        return len(self.particles)

    def __iter__(self) -> Iterator[Particle]:
        return iter(self.particles.values())

    def spawn(self, x: float, y: float, heading: float) -> Particle:
        """Create a particle at a continuous position whose cell must be free."""
        cx, cy = math.floor(x), math.floor(y)
        if not self.occupancy.is_free(cx, cy):
            raise ContractViolation(f"Cannot spawn on occupied or outside cell ({cx}, {cy})")
        particle = Particle(id=self._next_id, x=x, y=y, heading=heading)
        self._next_id += 1
        self.occupancy.place(particle.id, cx, cy)
        self.particles[particle.id] = particle
        return particle

    def remove(self, pid: int) -> None:
        particle = self.particles.pop(pid)
        self.occupancy.vacate(*particle.cell)

    def positions(self) -> np.ndarray:
        """(n, 2) array of continuous (x, y) positions."""
        if not self.particles:
            return np.empty((0, 2), dtype=np.float64)
        return np.array([(p.x, p.y) for p in self.particles.values()], dtype=np.float64)

    def clear_moved(self) -> None:
        for p in self.particles.values():
            p.moved = False


def apply_shrinkage(
    pop: Population, policy: ShrinkPolicy, step: int, rng: np.random.Generator
) -> int:
    """
    Remove each particle independently with probability ``p_remove``.

    Args:
        pop: Population to shrink
        policy: Shrink policy
        step: Current scheduler step
        rng: Engine random stream

    Returns:
        Number of particles removed
    """
    if step < 0:
        raise ContractViolation(f"Step must be >= 0, got {step}")
    if policy.kind == "none" or step < policy.start_step or not pop.particles:
        return 0

    ids = list(pop.particles)
    draws = rng.random(len(ids))
    doomed = [pid for pid, draw in zip(ids, draws) if draw < policy.p_remove]
    for pid in doomed:
        pop.remove(pid)
    return len(doomed)


def apply_turnover(
    pop: Population, policy: TurnoverPolicy, rng: np.random.Generator
) -> tuple[int, int]:
    """
    Run one division/survival test over the whole population.

    Division candidates are chosen against the occupancy before any child is
    placed; children are then spawned in random parent order, one per parent
    at most. Survival is evaluated afterwards on the updated occupancy and all
    deletions are applied together.

    With ``birth_limit="replacement"`` a test creates at most as many children
    as the previous test deleted, so turnover never grows the population past
    its size when turnover began.

    Args:
        pop: Population to update
        policy: Turnover thresholds and windows
        rng: Engine random stream

    Returns:
        (born, died)
    """
    if not policy.enabled or not pop.particles:
        return 0, 0

    occupancy = pop.occupancy
    division_counts = occupancy.window_counts(policy.division_window)
    candidates = []
    for p in pop:
        if not p.moved:
            continue
        cx, cy = p.cell
        if policy.division_min <= division_counts[cy, cx] <= policy.division_max:
            candidates.append(p)

    limit = pop.turnover_credit if policy.birth_limit == "replacement" else None
    born = 0
    for index in rng.permutation(len(candidates)):
        if limit is not None and born >= limit:
            break
        px, py = candidates[index].cell
        free = [(px + dx, py + dy) for dx, dy in _NEIGHBOURS if occupancy.is_free(px + dx, py + dy)]
        if not free:
            continue
        cx, cy = free[int(rng.integers(len(free)))]
        pop.spawn(float(cx), float(cy), random_heading(rng))
        born += 1

    survival_counts = occupancy.window_counts(policy.survival_window)
    doomed = []
    for p in pop:
        cx, cy = p.cell
        if not policy.survival_min <= survival_counts[cy, cx] <= policy.survival_max:
            doomed.append(p.id)
    for pid in doomed:
        pop.remove(pid)
    pop.turnover_credit = len(doomed)

    if born or doomed:
        logger.trace(f"Turnover: born={born} died={len(doomed)} population={len(pop)}")
    return born, len(doomed)
