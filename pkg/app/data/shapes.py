"""Shape masks, reference centroids and blob summary positions."""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from loguru import logger
from PIL import UnidentifiedImageError
from scipy.ndimage import label
from scipy.spatial import ConvexHull, QhullError

from app.core.errors import EstimationError, InputError
from app.core.population import Population
from app.utils.array_utils import load_raster, save_raster


@dataclass
class ShapeMask:
    """Boolean raster; ``inside[y, x]`` marks cells belonging to the shape."""

    inside: np.ndarray

    @property
    def width(self) -> int:
        return int(self.inside.shape[1])

    @property
    def height(self) -> int:
        return int(self.inside.shape[0])

    def count(self) -> int:
        return int(np.count_nonzero(self.inside))

    def cells(self) -> np.ndarray:
        """(n, 2) integer (x, y) coordinates of inside cells, row-major order."""
        ys, xs = np.nonzero(self.inside)
        return np.column_stack([xs, ys])

    def padded(self, margin: int) -> "ShapeMask":
        """Copy surrounded by ``margin`` empty cells on every side."""
        return ShapeMask(np.pad(self.inside, margin, mode="constant", constant_values=False))

    def to_raster(self) -> np.ndarray:
        """8-bit raster: inside 255, outside 0."""
        return np.where(self.inside, 255, 0).astype(np.uint8)


def load_shape_mask(image: Union[str, Path, np.ndarray], threshold: int = 128) -> ShapeMask:
    """
    Threshold a greyscale raster into a shape mask.

    Args:
        image: Path to a greyscale image (PGM required, PNG and others via Pillow)
            or an already loaded 2D array
        threshold: Pixels >= threshold are inside

    Returns:
        Shape mask with the raster's dimensions
    """
    if isinstance(image, np.ndarray):
        pixels = image
    else:
        try:
            pixels = load_raster(image)
        except FileNotFoundError as e:
            raise InputError(f"Shape image not found: {image}") from e
        except (UnidentifiedImageError, OSError) as e:
            raise InputError(f"Unreadable shape image {image}: {e}") from e

    if pixels.ndim != 2 or pixels.size == 0:
        raise InputError(f"Shape image must be a non-empty 2D raster, got shape {pixels.shape}")

    mask = ShapeMask(pixels >= threshold)
    if mask.count() == 0:
        raise InputError(f"Shape image has no pixels >= {threshold}")

    logger.debug(f"Loaded shape mask {mask.width}x{mask.height} with {mask.count()} cells")
    return mask


def save_shape_mask(mask: ShapeMask, path: Union[str, Path]) -> Path:
    """Dump a mask as a greyscale raster for debugging."""
    return save_raster(mask.to_raster(), path)


def image_centroid(mask: ShapeMask) -> tuple[float, float]:
    """
    Mean coordinate of all inside cells.

    Args:
        mask: Shape mask with at least one inside cell

    Returns:
        (x, y) centroid
    """
    ys, xs = np.nonzero(mask.inside)
    if xs.size == 0:
        raise InputError("Cannot compute centroid of an empty mask")
    return float(xs.mean()), float(ys.mean())


def blob_centroid(blob: Union[Population, np.ndarray]) -> tuple[float, float]:
    """
    Mean continuous position of a particle population.

    Args:
        blob: Population or (n, 2) array of positions

    Returns:
        (x, y) centroid
    """
    positions = blob.positions() if isinstance(blob, Population) else np.asarray(blob)
    if positions.size == 0:
        raise EstimationError("Cannot estimate centroid of an empty population")
    mean = positions.mean(axis=0)
    return float(mean[0]), float(mean[1])


def is_connected(mask: ShapeMask) -> bool:
    """True when the inside cells form a single 4-connected component."""
    _, n_components = label(mask.inside)
    return n_components == 1


def stroke_mask(
    width: int, height: int, points: Sequence[tuple[float, float]], half_width: float
) -> np.ndarray:
    """
    Rasterize a polyline as the cells within ``half_width`` of any segment.

    Endpoints get round caps, so every vertex is surrounded by a full disc.

    Args:
        width: Raster width
        height: Raster height
        points: Polyline vertices (x, y); a single point gives a disc
        half_width: Distance threshold in pixels

    Returns:
        Boolean raster
    """
    inside = np.zeros((height, width), dtype=bool)
    pts = [np.asarray(p, dtype=np.float64) for p in points]
    segments = list(zip(pts, pts[1:])) if len(pts) > 1 else [(pts[0], pts[0])]
    reach = int(np.ceil(half_width)) + 1

    for a, b in segments:
        x0 = max(int(np.floor(min(a[0], b[0]))) - reach, 0)
        x1 = min(int(np.ceil(max(a[0], b[0]))) + reach, width - 1)
        y0 = max(int(np.floor(min(a[1], b[1]))) - reach, 0)
        y1 = min(int(np.ceil(max(a[1], b[1]))) + reach, height - 1)
        if x0 > x1 or y0 > y1:
            continue
        ys, xs = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
        d = b - a
        length_sq = float(d @ d)
        if length_sq == 0.0:
            t = np.zeros_like(xs, dtype=np.float64)
        else:
            t = np.clip(((xs - a[0]) * d[0] + (ys - a[1]) * d[1]) / length_sq, 0.0, 1.0)
        dist_sq = (xs - (a[0] + t * d[0])) ** 2 + (ys - (a[1] + t * d[1])) ** 2
        inside[y0 : y1 + 1, x0 : x1 + 1] |= dist_sq <= half_width * half_width

    return inside


def convex_hull_mask(
    points: Sequence[tuple[float, float]], width: int | None = None, height: int | None = None
) -> ShapeMask:
    """
    Mask of the convex hull of a point set (e.g. city locations).

    Args:
        points: (x, y) pixel coordinates, at least 3 non-collinear
        width: Raster width; defaults to just enclosing the points
        height: Raster height; defaults to just enclosing the points

    Returns:
        Shape mask of cells inside or on the hull
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise InputError("Convex hull needs at least 3 (x, y) points")
    if (pts < 0).any():
        raise InputError("Convex hull points must have non-negative coordinates")
    try:
        hull = ConvexHull(pts)
    except QhullError as e:
        raise InputError(f"Degenerate point set for convex hull: {e}") from e

    width = width if width is not None else int(np.ceil(pts[:, 0].max())) + 1
    height = height if height is not None else int(np.ceil(pts[:, 1].max())) + 1
    ys, xs = np.mgrid[0:height, 0:width]
    grid = np.column_stack([xs.ravel(), ys.ravel()]).astype(np.float64)
    # hull.equations rows are (nx, ny, offset) with nx*x + ny*y + offset <= 0 inside
    signed = grid @ hull.equations[:, :2].T + hull.equations[:, 2]
    inside = (signed <= 1e-9).all(axis=1).reshape(height, width)

    mask = ShapeMask(inside)
    if mask.count() == 0:
        raise InputError("Convex hull covers no lattice cells")
    return mask


def _disc(xs: np.ndarray, ys: np.ndarray, cx: float, cy: float, r: float) -> np.ndarray:
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def _annular_arc(
    xs: np.ndarray, ys: np.ndarray, c: float, r_out: float, r_in: float, span_deg: float
) -> np.ndarray:
    """Annulus restricted to ``span_deg`` degrees centred on the negative x axis."""
    ring = _disc(xs, ys, c, c, r_out) & ~_disc(xs, ys, c, c, r_in)
    angle = np.degrees(np.arctan2(ys - c, xs - c))
    off_axis = 180.0 - np.abs(angle)
    return ring & (off_axis <= span_deg / 2)


def _lizard(size: int) -> np.ndarray:
    s = size / 120.0
    # most of the mass sits in the torso; limbs and tail are short stubs
    inside = stroke_mask(size, size, [(42 * s, 60 * s), (74 * s, 60 * s)], 16 * s)
    inside |= stroke_mask(size, size, [(92 * s, 60 * s)], 10 * s)
    inside |= stroke_mask(size, size, [(42 * s, 60 * s), (26 * s, 66 * s), (18 * s, 78 * s)], 4 * s)
    for hip, foot in [
        ((48 * s, 60 * s), (40 * s, 34 * s)),
        ((48 * s, 60 * s), (40 * s, 86 * s)),
        ((68 * s, 60 * s), (76 * s, 34 * s)),
        ((68 * s, 60 * s), (76 * s, 86 * s)),
    ]:
        inside |= stroke_mask(size, size, [hip, foot], 4 * s)
    return inside


def builtin_shape(name: str, size: int = 120) -> ShapeMask:
    """
    Procedural test shapes on a ``size`` x ``size`` canvas.

    ``circle``, ``square`` and ``ring`` are convex (the ring with a hole);
    ``l_shape`` and ``c_shape`` are concave; ``crescent`` is strongly concave
    with its centroid outside the shape; ``lizard`` is a compact torso with a head,
    four stubby legs and a short tail.

    Args:
        name: Shape name
        size: Canvas side in pixels

    Returns:
        Shape mask
    """
    ys, xs = np.mgrid[0:size, 0:size]
    c = (size - 1) / 2.0
    r = size / 2.0 - 2.0

    if name == "circle":
        inside = _disc(xs, ys, c, c, r)
    elif name == "square":
        lo, hi = size // 8, size - size // 8
        inside = (xs >= lo) & (xs < hi) & (ys >= lo) & (ys < hi)
    elif name == "ring":
        inside = _disc(xs, ys, c, c, r) & ~_disc(xs, ys, c, c, r * 0.4)
    elif name == "l_shape":
        lo, hi, bar = size // 8, size - size // 8, size // 3
        inside = ((xs >= lo) & (xs < lo + bar) & (ys >= lo) & (ys < hi)) | (
            (xs >= lo) & (xs < hi) & (ys >= hi - bar) & (ys < hi)
        )
    elif name == "c_shape":
        inside = _annular_arc(xs, ys, c, r, r * 0.45, 270.0)
    elif name == "crescent":
        inside = _annular_arc(xs, ys, c, r, r * 0.7, 160.0)
    elif name == "lizard":
        inside = _lizard(size)
    else:
        raise InputError(f"Unknown builtin shape: {name}")

    return ShapeMask(inside)


def centroid_inside(mask: ShapeMask) -> bool:
    """Whether the cell nearest the mask centroid belongs to the shape."""
    x, y = image_centroid(mask)
    cx, cy = int(round(x)), int(round(y))
    return bool(mask.inside[cy, cx])


