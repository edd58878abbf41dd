"""Offline figure regeneration from closed-loop trajectory CSVs."""

from .figures import KINDS, FigureSpec, SaturationError, load_overlay, render
from .io import SCHEMA, LoadError, TrajectoryTable, load_trajectory

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "SCHEMA",
    "FigureSpec",
    "LoadError",
    "SaturationError",
    "TrajectoryTable",
    "load_overlay",
    "load_trajectory",
    "render",
]
