"""Logical-grid data model: cells, validation and slot occupancy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

EMPTY = -1


class GridError(ValueError):
    pass


class InvalidGrid(GridError):
    """Raised when an operation needs a valid grid and gets one with overlaps
    or malformed locations."""


class OverlapError(InvalidGrid):
    pass


class MissingQuad(GridError):
    pass


@dataclass(frozen=True, order=True)
class LogicalLocation:
    """Inclusive grid rectangle ``(r_s, r_e, c_s, c_e)``, 0-based.

    Construction does not enforce ordering so that malformed predictions can
    still be loaded and reported by :func:`validate`.
    """

    r_s: int
    r_e: int
    c_s: int
    c_e: int

    def __post_init__(self) -> None:
        for name in ("r_s", "r_e", "c_s", "c_e"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def well_formed(self) -> bool:
        return 0 <= self.r_s <= self.r_e and 0 <= self.c_s <= self.c_e

    @property
    def row_span(self) -> int:
        return self.r_e - self.r_s + 1

    @property
    def col_span(self) -> int:
        return self.c_e - self.c_s + 1

    @property
    def is_spanning(self) -> bool:
        return self.r_e != self.r_s or self.c_e != self.c_s

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.r_s, self.r_e, self.c_s, self.c_e)

    def intersects(self, other: "LogicalLocation") -> bool:
        return (
            self.r_s <= other.r_e
            and other.r_s <= self.r_e
            and self.c_s <= other.c_e
            and other.c_s <= self.c_e
        )


@dataclass(frozen=True)
class SpatialQuad:
    """Four corners in pixels, ordered TL, TR, BR, BL."""

    corners: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        pts = tuple((float(x), float(y)) for x, y in self.corners)
        if len(pts) != 4:
            raise ValueError(f"quad needs exactly 4 points, got {len(pts)}")
        for x, y in pts:
            if not (math.isfinite(x) and math.isfinite(y)) or x < 0 or y < 0:
                raise ValueError(f"quad coordinates must be finite and >= 0: {pts}")
        object.__setattr__(self, "corners", pts)
        if self.area <= 0:
            raise ValueError(f"degenerate quad: {pts}")

    @classmethod
    def from_box(cls, x0: float, y0: float, x1: float, y1: float) -> "SpatialQuad":
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    @property
    def signed_area(self) -> float:
        # shoelace; positive for clockwise order in image (y-down) coordinates
        s = 0.0
        for k in range(4):
            x0, y0 = self.corners[k]
            x1, y1 = self.corners[(k + 1) % 4]
            s += x0 * y1 - x1 * y0
        return 0.5 * s

    @property
    def area(self) -> float:
        return abs(self.signed_area)

    @property
    def centroid(self) -> tuple[float, float]:
        xs = [p[0] for p in self.corners]
        ys = [p[1] for p in self.corners]
        return (sum(xs) / 4.0, sum(ys) / 4.0)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.corners]
        ys = [p[1] for p in self.corners]
        return (min(xs), min(ys), max(xs), max(ys))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.corners, dtype=np.float64)


@dataclass(frozen=True)
class TableCell:
    id: int
    logical: LogicalLocation
    quad: Optional[SpatialQuad] = None
    content: Optional[str] = None


@dataclass(frozen=True)
class TableGrid:
    cells: tuple[TableCell, ...] = ()
    image_size: Optional[tuple[float, float]] = None

    def __post_init__(self) -> None:
        cells = tuple(self.cells)
        seen = set()
        for c in cells:
            if c.id in seen:
                raise GridError(f"duplicate cell id {c.id}")
            seen.add(c.id)
        object.__setattr__(self, "cells", cells)
        if self.image_size is not None:
            w, h = self.image_size
            object.__setattr__(self, "image_size", (float(w), float(h)))

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    @classmethod
    def from_locations(
        cls,
        locations: Iterable[Sequence[int]],
        quads: Optional[Sequence[Optional[SpatialQuad]]] = None,
        image_size: Optional[tuple[float, float]] = None,
    ) -> "TableGrid":
        cells = []
        for i, loc in enumerate(locations):
            q = quads[i] if quads is not None else None
            cells.append(TableCell(i, LogicalLocation(*loc), q))
        return cls(tuple(cells), image_size)

    def cell(self, cell_id: int) -> TableCell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(cell_id)

    @property
    def has_quads(self) -> bool:
        return all(c.quad is not None for c in self.cells)

    def locations(self) -> list[tuple[int, int, int, int]]:
        return [c.logical.as_tuple() for c in self.cells]

    def with_locations(self, locations: Sequence[LogicalLocation]) -> "TableGrid":
        if len(locations) != len(self.cells):
            raise ValueError("location count does not match cell count")
        cells = tuple(
            TableCell(c.id, loc, c.quad, c.content) for c, loc in zip(self.cells, locations)
        )
        return TableGrid(cells, self.image_size)

    def canonical(self) -> tuple:
        """Id-free comparison key: sorted (location, content) pairs."""
        return tuple(sorted((c.logical.as_tuple(), c.content or "") for c in self.cells))


@dataclass
class ValidationReport:
    valid: bool
    overlaps: list[tuple[int, int]] = field(default_factory=list)
    out_of_bounds: list[int] = field(default_factory=list)
    holes: list[tuple[int, int]] = field(default_factory=list)


def dimensions(grid: TableGrid) -> tuple[int, int]:
    if not grid.cells:
        return (0, 0)
    rows = max(c.logical.r_e for c in grid.cells) + 1
    cols = max(c.logical.c_e for c in grid.cells) + 1
    return (max(rows, 0), max(cols, 0))


def validate(grid: TableGrid) -> ValidationReport:
    bad = [c.id for c in grid.cells if not c.logical.well_formed]
    good = [c for c in grid.cells if c.logical.well_formed]

    overlaps = []
    # sweep by r_s keeps this well below N^2 on real tables
    order = sorted(good, key=lambda c: (c.logical.r_s, c.id))
    for a_idx, a in enumerate(order):
        for b in order[a_idx + 1 :]:
            if b.logical.r_s > a.logical.r_e:
                break
            if a.logical.intersects(b.logical):
                overlaps.append((min(a.id, b.id), max(a.id, b.id)))
    overlaps.sort()

    holes = []
    if good:
        rows = max(c.logical.r_e for c in good) + 1
        cols = max(c.logical.c_e for c in good) + 1
        covered = np.zeros((rows, cols), dtype=bool)
        for c in good:
            loc = c.logical
            covered[loc.r_s : loc.r_e + 1, loc.c_s : loc.c_e + 1] = True
        holes = [(int(r), int(c)) for r, c in zip(*np.nonzero(~covered))]

    return ValidationReport(
        valid=not overlaps and not bad, overlaps=overlaps, out_of_bounds=bad, holes=holes
    )


def occupancy(grid: TableGrid) -> np.ndarray:
    """Return a ``rows x cols`` int array of cell ids, ``EMPTY`` where uncovered."""
    for c in grid.cells:
        if not c.logical.well_formed:
            raise InvalidGrid(f"cell {c.id} has malformed location {c.logical.as_tuple()}")
    rows, cols = dimensions(grid)
    occ = np.full((rows, cols), EMPTY, dtype=np.int64)
    for c in grid.cells:
        loc = c.logical
        block = occ[loc.r_s : loc.r_e + 1, loc.c_s : loc.c_e + 1]
        taken = block[block != EMPTY]
        if taken.size:
            raise OverlapError(f"cells {int(taken[0])} and {c.id} overlap")
        block[...] = c.id
    return occ


def require_valid(grid: TableGrid) -> None:
    report = validate(grid)
    if not report.valid:
        raise InvalidGrid(
            f"invalid grid: overlaps={report.overlaps[:5]} malformed={report.out_of_bounds[:5]}"
        )
