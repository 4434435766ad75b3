"""File utility functions."""

from pathlib import Path
from typing import Union


def ensure_directory(path: Union[str, Path]) -> Path:
    """Ensure directory exists, create if not."""
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def run_stem(experiment: str, seed: int) -> str:
    """File stem shared by every artifact of one run."""
    return f"{experiment}_seed{seed:06d}"
