"""Logical-location table structure: grids, conversions, metrics, a cascade regressor and a synthetic generator."""

from .core import (
    EMPTY,
    GridError,
    InvalidGrid,
    LogicalLocation,
    MissingQuad,
    OverlapError,
    SpatialQuad,
    TableCell,
    TableGrid,
    ValidationReport,
    dimensions,
    occupancy,
    validate,
)
from .io import read_jsonl, write_jsonl
from .transform import Direction, adjacency_pairs, adjacency_triplets, from_markup, to_markup

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "Direction",
    "GridError",
    "InvalidGrid",
    "LogicalLocation",
    "MissingQuad",
    "OverlapError",
    "SpatialQuad",
    "TableCell",
    "TableGrid",
    "ValidationReport",
    "adjacency_pairs",
    "adjacency_triplets",
    "dimensions",
    "from_markup",
    "occupancy",
    "read_jsonl",
    "to_markup",
    "validate",
    "write_jsonl",
]
