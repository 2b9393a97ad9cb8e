"""Position embedding and per-table geometric inputs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import MissingQuad, TableCell, TableGrid
from ..transform import adjacency_pairs

N_DESCRIPTOR = 12


class DomainError(ValueError):
    pass


class EmptyInput(ValueError):
    pass


def position_embedding(x, y, d: int) -> np.ndarray:
    """Sinusoidal 2-D embedding of normalized coordinates.

    The first ``d/2`` entries encode ``x`` and the last ``d/2`` encode ``y``,
    each as interleaved ``(sin, cos)`` pairs whose periods grow geometrically
    from 1 by ``10000**(4k/d)``. Accepts scalars or equal-shape arrays; the
    embedding is appended as a trailing axis.
    """
    if d % 4:
        raise ValueError("d must be divisible by 4")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(~np.isfinite(x)) or np.any(~np.isfinite(y)) or x.min(initial=0) < 0 or y.min(initial=0) < 0 \
            or x.max(initial=0) > 1 or y.max(initial=0) > 1:
        raise DomainError("coordinates must lie in [0, 1]")
    k = np.arange(d // 4)
    omega = 2.0 * np.pi / 10000.0 ** (4.0 * k / d)
    out = np.empty(x.shape + (d,), dtype=np.float64)
    half = d // 2
    for axis, v in ((0, x), (1, y)):
        ang = v[..., None] * omega
        block = out[..., axis * half : (axis + 1) * half]
        block[..., 0::2] = np.sin(ang)
        block[..., 1::2] = np.cos(ang)
    return out


def normalized_corners(cells: Sequence[TableCell], image_size) -> np.ndarray:
    """``(N, 4, 2)`` corner coordinates divided by image width/height, clipped to [0, 1]."""
    if not cells:
        raise EmptyInput("at least one cell is required")
    pts = np.empty((len(cells), 4, 2), dtype=np.float64)
    for i, c in enumerate(cells):
        if c.quad is None:
            raise MissingQuad(f"cell {c.id} has no quad")
        pts[i] = c.quad.as_array()
    if image_size is None:
        w, h = pts[..., 0].max(), pts[..., 1].max()
    else:
        w, h = image_size
    return np.clip(pts / np.array([w, h], dtype=np.float64), 0.0, 1.0)


def descriptors(corners: np.ndarray) -> np.ndarray:
    """Centroid, bounding width/height and the 8 corner coordinates per cell."""
    n = corners.shape[0]
    out = np.empty((n, N_DESCRIPTOR), dtype=np.float64)
    out[:, 0:2] = corners.mean(axis=1)
    out[:, 2:4] = corners.max(axis=1) - corners.min(axis=1)
    out[:, 4:] = corners.reshape(n, 8)
    return out


@dataclass
class TableInputs:
    """Everything the network and the losses need for one table."""

    desc: np.ndarray  # (N, 12)
    corners: np.ndarray  # (N, 4, 2)
    corner_pe: np.ndarray  # (N, 4, d)
    target: Optional[np.ndarray] = None  # (N, 4) float
    pairs_r: Optional[np.ndarray] = None  # (P, 2) rows into cells: (right, left)
    pairs_c: Optional[np.ndarray] = None  # (Q, 2): (under, over)
    span_r: Optional[np.ndarray] = None  # indices of multi-row cells
    span_c: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.desc.shape[0]


def table_inputs(grid: TableGrid, d: int, with_targets: bool = True) -> TableInputs:
    cells = grid.cells
    corners = normalized_corners(cells, grid.image_size)
    inp = TableInputs(
        desc=descriptors(corners),
        corners=corners,
        corner_pe=position_embedding(corners[..., 0], corners[..., 1], d),
    )
    if with_targets:
        inp.target = np.array(grid.locations(), dtype=np.float64)
        index = {c.id: k for k, c in enumerate(cells)}
        a_r, a_c = adjacency_pairs(grid)
        inp.pairs_r = np.array(sorted((index[p.i], index[p.j]) for p in a_r), dtype=np.int64).reshape(-1, 2)
        inp.pairs_c = np.array(sorted((index[p.i], index[p.j]) for p in a_c), dtype=np.int64).reshape(-1, 2)
        t = inp.target
        inp.span_r = np.nonzero(t[:, 1] != t[:, 0])[0]
        inp.span_c = np.nonzero(t[:, 3] != t[:, 2])[0]
    return inp
