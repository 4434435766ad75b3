"""Pydantic schemas for experiment configs, engine parameters and results."""

import math
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class StrictModel(BaseModel):
    """Config base: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")


# ============ Engine Schemas ============


class SensorParams(StrictModel):
    """Sensor morphology of a particle."""

    so: float = Field(default=9.0, ge=3.0, description="Sensor offset, pixels")
    sa: float = Field(default=90.0, gt=0.0, le=180.0, description="Sensor angle, degrees")
    ra: float = Field(default=45.0, gt=0.0, le=180.0, description="Rotation angle, degrees")


class MotorMode(StrictModel):
    """Motor behaviour of the population."""

    kind: Literal["fluid", "oscillatory"] = "fluid"
    pid: float = Field(
        default=0.05, ge=0.0, le=1.0, description="Reset probability per step (oscillatory)"
    )


class ShrinkPolicy(StrictModel):
    """Uniform random removal of particles."""

    kind: Literal["none", "uniform_random"] = "none"
    p_remove: float = Field(default=0.0005, ge=0.0, le=1.0)
    start_step: int = Field(default=0, ge=0, description="Step at which removal begins")


class TurnoverPolicy(StrictModel):
    """Division and survival rules that keep thin material connected."""

    enabled: bool = False
    frequency: int = Field(default=2, ge=1, description="Steps between tests")
    division_window: int = Field(default=9, ge=1)
    division_min: int = Field(default=1, ge=0)
    division_max: int = Field(default=10, ge=0)
    survival_window: int = Field(default=5, ge=1)
    survival_min: int = Field(default=0, ge=0)
    survival_max: int = Field(default=24, ge=0)
    start_step: int = Field(default=0, ge=0, description="First step on which turnover runs")
    birth_limit: Literal["none", "replacement"] = Field(
        default="none",
        description="replacement: children per test capped at the previous test's deletions",
    )

    @field_validator("division_window", "survival_window")
    @classmethod
    def validate_odd(cls, v: int) -> int:
        """Windows are centred on the particle, so they must be odd-sided."""
        if v % 2 == 0:
            raise ValueError(f"window must be odd-sided, got {v}")
        return v


class EngineConfig(StrictModel):
    """Everything the scheduler needs to advance a world."""

    sensor: SensorParams = Field(default_factory=SensorParams)
    motor: MotorMode = Field(default_factory=MotorMode)
    damping: float = Field(default=0.9, gt=0.0, le=1.0)
    deposit: float = Field(default=5.0, ge=0.0, description="Trail units per cell-changing move")
    projection_magnitude: float = Field(
        default=10.0, ge=0.0, description="Attractant units per site per step"
    )
    illumination_weight: float = Field(default=0.1, gt=0.0, le=1.0)
    illumination_mode: Literal["sensor", "body"] = "sensor"
    stage_order: Literal["motor_first", "sensory_first"] = "motor_first"
    shrink: ShrinkPolicy = Field(default_factory=ShrinkPolicy)
    turnover: TurnoverPolicy = Field(default_factory=TurnoverPolicy)


# ============ Experiment Config Schemas ============

BuiltinShape = Literal["circle", "square", "ring", "l_shape", "c_shape", "crescent", "lizard"]


class MaskSource(StrictModel):
    """Where a centroid experiment gets its shape from. Exactly one source is set."""

    image: Optional[Path] = None
    threshold: int = Field(default=128, ge=0, le=255)
    builtin: Optional[BuiltinShape] = None
    builtin_size: int = Field(default=120, ge=8)
    hull_points: Optional[list[tuple[float, float]]] = None

    @model_validator(mode="after")
    def validate_single_source(self) -> "MaskSource":
        """Reject configs naming zero or several sources."""
        given = [s for s in (self.image, self.builtin, self.hull_points) if s is not None]
        if len(given) != 1:
            raise ValueError("exactly one of image, builtin, hull_points must be set")
        if self.hull_points is not None and len(self.hull_points) < 3:
            raise ValueError("hull_points needs at least 3 points")
        return self


class CentroidRunConfig(StrictModel):
    """Shape centroid approximation by adaptation and shrinkage."""

    mask: MaskSource = Field(default_factory=lambda: MaskSource(builtin="circle"))
    hold_steps: int = Field(default=50, ge=0)
    shrink_schedule: Literal["immediate", "delayed"] = "immediate"
    shrink_delay: int = Field(default=5000, ge=0, description="Extra steps for delayed schedule")
    p_remove: float = Field(default=0.0005, ge=0.0, le=1.0)
    halt_population: int = Field(default=50, ge=1)
    density: float = Field(default=1.0, gt=0.0, le=1.0)
    margin: Optional[int] = Field(default=None, ge=0, description="Lattice margin, >= 2*SO")
    engine: EngineConfig = Field(default_factory=EngineConfig)
    max_steps: int = Field(default=60000, ge=1)
    log_every: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_margin(self) -> "CentroidRunConfig":
        """An explicit margin must keep edge sensors on the lattice (>= 2*SO)."""
        minimum = math.ceil(2 * self.engine.sensor.so)
        if self.margin is not None and self.margin < minimum:
            raise ValueError(f"margin {self.margin} is smaller than 2*SO ({minimum})")
        return self


class SeriesSpec(StrictModel):
    """How the data series of a mean experiment is obtained."""

    distribution: Literal["uniform", "skewed"] = "uniform"
    n: int = Field(default=20, ge=2)
    lo: float = 0.0
    hi: float = 100.0
    sorted: bool = False
    values: Optional[list[float]] = None

    @model_validator(mode="after")
    def validate_domain(self) -> "SeriesSpec":
        """Domain must be non-empty and explicit values must lie inside it."""
        if not self.lo < self.hi:
            raise ValueError(f"lo must be < hi, got [{self.lo}, {self.hi}]")
        if self.values is not None:
            if len(self.values) < 2:
                raise ValueError("values needs at least 2 entries")
            if any(v < self.lo or v > self.hi for v in self.values):
                raise ValueError("values must lie within [lo, hi]")
        return self


class SeriesEncoding(StrictModel):
    """Spatial encoding of a 1D series as a thick polyline."""

    spacing: int = Field(default=20, ge=1, description="Pixels between data points")
    stroke_width: int = Field(default=6, ge=1)
    scale: float = Field(default=1.0, gt=0.0, description="Pixels per value unit")
    margin: int = Field(default=16, ge=0)


def _turnover_engine() -> EngineConfig:
    return EngineConfig(turnover=TurnoverPolicy(enabled=True, birth_limit="replacement"))


class MeanRunConfig(StrictModel):
    """Arithmetic mean approximation of a spatially encoded series."""

    series: SeriesSpec = Field(default_factory=SeriesSpec)
    encoding: SeriesEncoding = Field(default_factory=SeriesEncoding)
    hold_steps: int = Field(default=20, ge=0)
    p_remove: float = Field(
        default=0.0005, ge=0.0, le=1.0, description="Background removal after the hold"
    )
    halt_population: int = Field(default=50, ge=1)
    engine: EngineConfig = Field(default_factory=_turnover_engine)
    max_steps: int = Field(default=60000, ge=1)
    log_every: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_margin(self) -> "MeanRunConfig":
        """The stroke must stay at least SO+1 pixels away from the lattice edge."""
        so = self.engine.sensor.so
        clearance = self.encoding.margin - self.encoding.stroke_width / 2.0
        if clearance < so + 1:
            raise ValueError(
                f"encoding margin {self.encoding.margin} leaves less than SO+1 ({so + 1}) "
                "pixels to the edge"
            )
        return self


class SpiralParams(StrictModel):
    """Archimedean spiral r = growth * theta, theta = k * angular_step."""

    growth: float = Field(default=5.0, ge=0.0, description="Radius gain per radian, pixels")
    angular_step: float = Field(default=0.2, gt=0.0, description="Radians per target update")


StimulusKind = Literal["positive", "negative", "alternating"]


def _tracking_engine() -> EngineConfig:
    return EngineConfig(damping=0.93, motor=MotorMode(kind="oscillatory", pid=0.05))


class TrackingRunConfig(StrictModel):
    """Noisy moving-target tracking by an oscillatory blob."""

    population: int = Field(default=1500, ge=1)
    init_window: int = Field(default=80, ge=1)
    arena_size: int = Field(default=400, ge=16)
    stimulus: StimulusKind = "negative"
    noise_sigma: float = Field(default=0.0, ge=0.0)
    update_period: int = Field(default=25, ge=1)
    projection_steps: int = Field(default=10, ge=1)
    alternation_period: int = Field(default=10, ge=1)
    mask_size: int = Field(default=50, ge=1)
    point_radius: int = Field(default=3, ge=0)
    coalescence_steps: int = Field(default=250, ge=0)
    edge_margin: Optional[int] = Field(default=None, ge=0, description="Defaults to 2*SO")
    spiral: SpiralParams = Field(default_factory=SpiralParams)
    engine: EngineConfig = Field(default_factory=_tracking_engine)
    max_steps: int = Field(default=20000, ge=1)
    log_every: int = Field(default=1000, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def validate_geometry(self) -> "TrackingRunConfig":
        """Init window and mask must fit the arena; the window must hold the population."""
        if self.init_window > self.arena_size:
            raise ValueError("init_window exceeds arena_size")
        if self.mask_size > self.arena_size:
            raise ValueError("mask_size exceeds arena_size")
        if self.population > self.init_window * self.init_window:
            raise ValueError("population does not fit in init_window")
        return self


class SweepConfig(StrictModel):
    """Grid of parameter overrides applied to a base experiment config."""

    experiment: Literal["centroid", "mean", "track"]
    base: dict[str, Any] = Field(default_factory=dict)
    grid: dict[str, list[Any]]

    @field_validator("grid")
    @classmethod
    def validate_grid(cls, v: dict[str, list[Any]]) -> dict[str, list[Any]]:
        """Each swept key needs at least one value."""
        if not v:
            raise ValueError("grid must name at least one parameter")
        for key, values in v.items():
            if not values:
                raise ValueError(f"grid entry '{key}' has no values")
        return v


# ============ Result Schemas ============


class StepRecord(BaseModel):
    """One recorded scheduler step."""

    step: int
    x: float
    y: float
    population: int
    error: float = Field(ge=0.0)
    target_x: Optional[float] = None
    target_y: Optional[float] = None
    stimulus_x: Optional[float] = None
    stimulus_y: Optional[float] = None


class RunMetrics(BaseModel):
    """Per-run trace and final summary."""

    experiment: str
    seed: int
    records: list[StepRecord] = Field(default_factory=list)
    final_error: float = Field(ge=0.0)
    halt_step: int
    halt_reason: Literal["population", "target_exited", "step_cap"]
    covariate: Optional[float] = None
    extra: dict[str, float] = Field(default_factory=dict)

    @field_validator("records")
    @classmethod
    def validate_steps_increasing(cls, v: list[StepRecord]) -> list[StepRecord]:
        """Recorded steps must be strictly increasing."""
        for prev, cur in zip(v, v[1:]):
            if cur.step <= prev.step:
                raise ValueError(f"steps not strictly increasing at {cur.step}")
        return v


class CentroidResult(BaseModel):
    """Outcome of a centroid run."""

    metrics: RunMetrics
    image_centroid: tuple[float, float]
    final_centroid: tuple[float, float]

    @property
    def final_error(self) -> float:
        return self.metrics.final_error


class MeanResult(BaseModel):
    """Outcome of an arithmetic-mean run."""

    metrics: RunMetrics
    series: list[float]
    final_value: float
    arithmetic_mean: float
    geometric_mean: Optional[float] = None
    harmonic_mean: Optional[float] = None

    @property
    def signed_error(self) -> float:
        return self.final_value - self.arithmetic_mean


class TrackingResult(BaseModel):
    """Outcome of a tracking run; traces are aligned on ``steps``."""

    metrics: RunMetrics
    steps: list[int]
    target: list[tuple[float, float]]
    stimulus: list[tuple[float, float]]
    blob: list[tuple[float, float]]
    errors: list[float]
    score_start: int

    @property
    def scored_errors(self) -> list[float]:
        """Errors from the coalescence gate onwards."""
        return [e for s, e in zip(self.steps, self.errors) if s >= self.score_start]


class BatchSummary(BaseModel):
    """Aggregate statistics over repeated seeded runs."""

    experiment: str
    n_runs: int = Field(ge=1)
    mae: float = Field(ge=0.0)
    sigma: float = Field(ge=0.0, description="Population standard deviation (divide by n)")
    rho: Optional[float] = None
    covariate: Optional[str] = None
    fraction_above: Optional[float] = None
    seeds: list[int] = Field(default_factory=list)
    sigma_convention: Literal["population"] = "population"
