"""Plasmodium - virtual slime mould simulation for spatial computation."""

__version__ = "0.1.0"
