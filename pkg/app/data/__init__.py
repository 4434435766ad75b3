"""Spatial experiment inputs and their exact reference statistics."""
