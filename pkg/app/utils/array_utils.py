"""Greyscale raster conversion and image I/O."""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image


def to_greyscale(values: np.ndarray, ceiling: float = 255.0, top: int = 255) -> np.ndarray:
    """
    Linearly map concentrations to 8-bit grey levels.

    Args:
        values: Non-negative array
        ceiling: Concentration mapped to ``top``; larger values clamp
        top: Highest grey level used

    Returns:
        uint8 array of the same shape
    """
    if ceiling <= 0:
        raise ValueError(f"ceiling must be positive, got {ceiling}")
    scaled = np.clip(values * (top / ceiling), 0.0, float(top))
    return np.floor(scaled).astype(np.uint8)


def load_raster(path: Union[str, Path]) -> np.ndarray:
    """
    Read an image as an 8-bit greyscale array.

    Args:
        path: Image path (PGM, PNG, ...)

    Returns:
        uint8 array indexed [y, x]
    """
    with Image.open(path) as img:
        return np.asarray(img.convert("L"), dtype=np.uint8).copy()


def save_raster(pixels: np.ndarray, path: Union[str, Path]) -> Path:
    """
    Write an 8-bit greyscale array; the format follows the file suffix.

    Args:
        pixels: uint8 array indexed [y, x]
        path: Destination (``.pgm`` writes binary portable greymap)

    Returns:
        Path written
    """
    path = Path(path)
    Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8)).save(path)
    return path
