"""1D data series: generation, spatial encoding and reference statistics."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from app.core.errors import ContractViolation, InputError
from app.data.shapes import ShapeMask, is_connected, stroke_mask
from app.schemas import SeriesEncoding, SeriesSpec

SKEW_HIGH = (80.0, 100.0)
SKEW_LOW = (0.0, 20.0)
SKEW_P_HIGH = 0.9


@dataclass(frozen=True)
class DataSeries:
    """Values in a closed domain ``[lo, hi]``."""

    values: tuple[float, ...]
    lo: float = 0.0
    hi: float = 100.0
    sorted: bool = False

    def __post_init__(self) -> None:
        if not self.lo < self.hi:
            raise ContractViolation(f"Empty domain [{self.lo}, {self.hi}]")
        if any(v < self.lo or v > self.hi for v in self.values):
            raise ContractViolation(f"Series values outside [{self.lo}, {self.hi}]")

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)

    def std(self) -> float:
        return float(np.std(self.as_array()))

    def sorted_copy(self) -> "DataSeries":
        return DataSeries(tuple(sorted(self.values)), self.lo, self.hi, sorted=True)


def gen_uniform_series(n: int, lo: float, hi: float, rng: np.random.Generator) -> DataSeries:
    """
    ``n`` independent uniform draws from ``[lo, hi]``.

    Args:
        n: Length, >= 2
        lo: Lower bound
        hi: Upper bound, > lo
        rng: Data random stream

    Returns:
        Unsorted series
    """
    if n < 2:
        raise ContractViolation(f"Series length must be >= 2, got {n}")
    if not lo < hi:
        raise ContractViolation(f"lo must be < hi, got [{lo}, {hi}]")
    values = np.clip(rng.uniform(lo, hi, n), lo, hi)
    return DataSeries(tuple(float(v) for v in values), lo, hi)


def gen_skewed_series(n: int, rng: np.random.Generator) -> DataSeries:
    """
    Series heavily biased towards high values: each value is uniform in
    [80, 100] with probability 0.9, otherwise uniform in [0, 20].
    """
    if n < 2:
        raise ContractViolation(f"Series length must be >= 2, got {n}")
    high = rng.random(n) < SKEW_P_HIGH
    values = np.where(high, rng.uniform(*SKEW_HIGH, n), rng.uniform(*SKEW_LOW, n))
    return DataSeries(tuple(float(v) for v in values), 0.0, 100.0)


def series_from_spec(spec: SeriesSpec, rng: np.random.Generator) -> DataSeries:
    """Build the series a mean run uses: explicit values or a seeded draw."""
    if spec.values is not None:
        series = DataSeries(tuple(spec.values), spec.lo, spec.hi)
    elif spec.distribution == "skewed":
        series = gen_skewed_series(spec.n, rng)
    else:
        series = gen_uniform_series(spec.n, spec.lo, spec.hi, rng)
    return series.sorted_copy() if spec.sorted else series


def arithmetic_mean(series: DataSeries) -> float:
    return float(np.mean(series.as_array()))


def geometric_mean(series: DataSeries) -> Optional[float]:
    """Geometric mean, or None when a value is not strictly positive."""
    values = series.as_array()
    if (values <= 0).any():
        return None
    return float(stats.gmean(values))


def harmonic_mean(series: DataSeries) -> Optional[float]:
    """Harmonic mean, or None when a value is not strictly positive."""
    values = series.as_array()
    if (values <= 0).any():
        return None
    return float(stats.hmean(values))


class SeriesLayout:
    """
    Affine placement of a series on the lattice.

    Point ``i`` sits at column ``margin + i * spacing``. Values map to rows on
    an inverted axis: ``row = margin + (hi - v) * scale``, so larger values
    sit on lower row numbers. A point is drawn centred on ``floor(row) + 0.5``
    and :meth:`value` reads positions back through the same convention.
    """

    def __init__(self, enc: SeriesEncoding, n: int, lo: float, hi: float):
        self.enc = enc
        self.n = n
        self.lo = lo
        self.hi = hi

    @property
    def width(self) -> int:
        return 2 * self.enc.margin + (self.n - 1) * self.enc.spacing + 1

    @property
    def height(self) -> int:
        return 2 * self.enc.margin + math.ceil((self.hi - self.lo) * self.enc.scale) + 2

    def column(self, i: int) -> float:
        return float(self.enc.margin + i * self.enc.spacing)

    def row(self, value: float) -> float:
        return self.enc.margin + (self.hi - value) * self.enc.scale

    def centre(self, value: float) -> float:
        """Row on which a point of ``value`` is drawn: the snapped row plus half a cell."""
        return math.floor(self.row(value)) + 0.5

    def value(self, y: float) -> float:
        """Value whose drawn centre is ``y``; exact for values on whole rows."""
        return self.hi - (y - 0.5 - self.enc.margin) / self.enc.scale

    def site(self, i: int, value: float) -> tuple[float, float]:
        """
        Pixel site of data point ``i``.

        Rows snap to the nearest cell boundary so an even stroke width
        covers whole rows symmetrically.
        """
        return self.column(i), self.centre(value)


def encode_series(
    series: DataSeries,
    enc: SeriesEncoding,
    width: Optional[int] = None,
    height: Optional[int] = None,
) -> ShapeMask:
    """
    Rasterize a series as a thick polyline through its data points.

    Args:
        series: Data to encode
        enc: Spacing, stroke width, scale and margin
        width: Lattice width; defaults to the layout's width
        height: Lattice height; defaults to the layout's height

    Returns:
        Shape mask, 4-connected end to end
    """
    layout = SeriesLayout(enc, len(series), series.lo, series.hi)
    width = width if width is not None else layout.width
    height = height if height is not None else layout.height
    half = enc.stroke_width / 2.0
    sites = [layout.site(i, v) for i, v in enumerate(series.values)]

    for x, y in sites:
        if x - half < 0 or y - half < 0 or x + half > width - 1 or y + half > height - 1:
            raise InputError(f"Encoded point ({x}, {y}) does not fit a {width}x{height} lattice")

    mask = ShapeMask(stroke_mask(width, height, sites, half))
    if not is_connected(mask):
        raise InputError("Encoded series is not a single connected path")
    return mask
