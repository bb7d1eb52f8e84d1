"""Geometry recovered from the symbols of a first-order 2x2 operator."""

__version__ = "0.1.0"
