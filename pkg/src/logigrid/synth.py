"""Seeded synthetic tables with spanning cells and distorted cell quads."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .core import LogicalLocation, SpatialQuad, TableCell, TableGrid, dimensions

_WORDS = (
    "total", "net", "2019", "2020", "revenue", "cost", "n/a", "0.5", "12.3", "id",
    "name", "mean", "std", "value", "rate", "-", "yes", "no", "A", "B",
)


class ConfigError(ValueError):
    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(message)


@dataclass
class SynthConfig:
    n_tables: int = 100
    rows: tuple[int, int] = (2, 8)
    cols: tuple[int, int] = (2, 8)
    span_probability: float = 0.2
    max_span: int = 3
    jitter: float = 0.0
    rotation: float = 0.0
    hole_probability: float = 0.0
    image_size: tuple[int, int] = (1000, 1000)
    content: bool = False
    seed: int = 0

    def validate(self) -> "SynthConfig":
        if self.n_tables < 0:
            raise ConfigError("n_tables must be >= 0", "n_tables")
        for name in ("rows", "cols"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ConfigError(f"{name} range must satisfy 1 <= min <= max, got {(lo, hi)}", name)
        for name in ("span_probability", "hole_probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}", name)
        if self.max_span < 1:
            raise ConfigError("max_span must be >= 1", "max_span")
        # corners move by at most jitter x cell size, so 0.5 keeps quads non-degenerate
        if not 0.0 <= self.jitter < 0.5:
            raise ConfigError(f"jitter must lie in [0, 0.5), got {self.jitter}", "jitter")
        if not 0.0 <= self.rotation <= 45.0:
            raise ConfigError(f"rotation must lie in [0, 45] degrees, got {self.rotation}", "rotation")
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise ConfigError("image_size must be positive", "image_size")
        return self

    @classmethod
    def from_dict(cls, obj: dict) -> "SynthConfig":
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}", sorted(extra)[0])
        kw = dict(obj)
        for name in ("rows", "cols", "image_size"):
            if name in kw:
                kw[name] = tuple(kw[name])
        return cls(**kw)

    @classmethod
    def from_json(cls, path) -> "SynthConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)


def _layout(rng: np.random.Generator, rows: int, cols: int, cfg: SynthConfig) -> list[LogicalLocation]:
    taken = np.zeros((rows, cols), dtype=bool)
    out = []
    for r in range(rows):
        for c in range(cols):
            if taken[r, c]:
                continue
            rs = cs = 1
            if cfg.span_probability > 0 and rng.random() < cfg.span_probability:
                want_r = int(rng.integers(1, cfg.max_span + 1))
                want_c = int(rng.integers(1, cfg.max_span + 1))
                while cs < want_c and c + cs < cols and not taken[r, c + cs]:
                    cs += 1
                while rs < want_r and r + rs < rows and not taken[r + rs, c : c + cs].any():
                    rs += 1
            elif cfg.hole_probability > 0 and rng.random() < cfg.hole_probability:
                continue
            taken[r : r + rs, c : c + cs] = True
            out.append(LogicalLocation(r, r + rs - 1, c, c + cs - 1))
    return out


def _boundaries(rng: np.random.Generator, n: int, lo: float, hi: float) -> np.ndarray:
    sizes = rng.uniform(0.6, 1.4, size=n)
    return lo + (hi - lo) * np.concatenate([[0.0], np.cumsum(sizes) / sizes.sum()])


def generate_table(cfg: SynthConfig, index: int) -> TableGrid:
    rng = np.random.default_rng([cfg.seed, index])
    rows = int(rng.integers(cfg.rows[0], cfg.rows[1] + 1))
    cols = int(rng.integers(cfg.cols[0], cfg.cols[1] + 1))
    locs = _layout(rng, rows, cols, cfg)
    w, h = cfg.image_size
    mx0, mx1 = rng.uniform(0.05, 0.15, size=2) * w
    my0, my1 = rng.uniform(0.05, 0.15, size=2) * h
    xs = _boundaries(rng, cols, mx0, w - mx1)
    ys = _boundaries(rng, rows, my0, h - my1)
    theta = math.radians(rng.uniform(-cfg.rotation, cfg.rotation)) if cfg.rotation > 0 else 0.0
    cx, cy = (xs[0] + xs[-1]) / 2, (ys[0] + ys[-1]) / 2
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cells = []
    for k, loc in enumerate(locs):
        x0, x1 = xs[loc.c_s], xs[loc.c_e + 1]
        y0, y1 = ys[loc.r_s], ys[loc.r_e + 1]
        pts = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64)
        if theta:
            dx, dy = pts[:, 0] - cx, pts[:, 1] - cy
            pts = np.stack([cx + cos_t * dx - sin_t * dy, cy + sin_t * dx + cos_t * dy], axis=1)
        if cfg.jitter > 0:
            noise = rng.uniform(-cfg.jitter, cfg.jitter, size=(4, 2))
            pts = pts + noise * np.array([x1 - x0, y1 - y0])
        pts[:, 0] = np.clip(pts[:, 0], 0.0, w)
        pts[:, 1] = np.clip(pts[:, 1], 0.0, h)
        text = None
        if cfg.content:
            text = " ".join(rng.choice(_WORDS, size=int(rng.integers(1, 3))))
        quad = SpatialQuad(tuple((float(x), float(y)) for x, y in pts))
        cells.append(TableCell(k, loc, quad, text))
    return TableGrid(tuple(cells), (float(w), float(h)))


def generate(cfg: SynthConfig) -> list[TableGrid]:
    cfg.validate()
    return [generate_table(cfg, i) for i in range(cfg.n_tables)]


def regular_grid(rows: int, cols: int, image_size: tuple[int, int] = (1000, 1000)) -> TableGrid:
    """Unit-span grid with equal-sized axis-aligned cells."""
    w, h = image_size
    cw, ch = w / (cols + 2), h / (rows + 2)
    cells = []
    for r in range(rows):
        for c in range(cols):
            quad = SpatialQuad.from_box((c + 1) * cw, (r + 1) * ch, (c + 2) * cw, (r + 2) * ch)
            cells.append(TableCell(len(cells), LogicalLocation(r, r, c, c), quad))
    return TableGrid(tuple(cells), (float(w), float(h)))


def make_shifted_variant(grid: TableGrid, row_offset_from: int) -> TableGrid:
    """Move every cell starting at or below ``row_offset_from`` down one row."""
    rows, _ = dimensions(grid)
    if not 0 <= row_offset_from < rows:
        raise IndexError(f"row_offset_from={row_offset_from} outside 0..{rows - 1}")
    locs = []
    for c in grid.cells:
        l = c.logical
        if l.r_s >= row_offset_from:
            l = LogicalLocation(l.r_s + 1, l.r_e + 1, l.c_s, l.c_e)
        locs.append(l)
    return grid.with_locations(locs)


def spanning_fraction(grids) -> float:
    n = sum(len(g.cells) for g in grids)
    spans = sum(c.logical.is_spanning for g in grids for c in g.cells)
    return spans / n if n else 0.0
