"""Utility functions for array conversion and files."""
