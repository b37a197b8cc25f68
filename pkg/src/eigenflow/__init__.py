"""Recursive eigen-extrusion: iterate a matrix to its normalized eigenvector matrix."""

__version__ = "0.1.0"
