"""Cell matching and the detection, logical-location and adjacency scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import MissingQuad, TableGrid, validate
from ..transform import adjacency_pairs_bruteforce, adjacency_triplets


@dataclass
class CellMatching:
    pairs: list[tuple[int, int]] = field(default_factory=list)
    iou: dict[tuple[int, int], float] = field(default_factory=dict)
    unmatched_pred: set[int] = field(default_factory=set)
    unmatched_gt: set[int] = field(default_factory=set)

    def pred_to_gt(self) -> dict[int, int]:
        return dict(self.pairs)


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, n_pred: int, n_gt: int) -> "PRF":
        if n_pred == 0 and n_gt == 0:
            return cls(1.0, 1.0, 1.0)
        p = tp / n_pred if n_pred else 0.0
        r = tp / n_gt if n_gt else 0.0
        return cls(p, r, f1_score(p, r))


@dataclass(frozen=True)
class LogicalAccuracy:
    acc_all: float
    acc_row: float
    acc_col: float
    acc_span: Optional[float]


def f1_score(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _boxes(grid: TableGrid, role: str) -> np.ndarray:
    out = np.empty((len(grid.cells), 4), dtype=np.float64)
    for k, c in enumerate(grid.cells):
        if c.quad is None:
            raise MissingQuad(f"{role} cell {c.id} has no quad")
        out[k] = c.quad.bbox
    return out


def box_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of ``(x0, y0, x1, y1)`` boxes, shape ``(len(a), len(b))``."""
    ix0 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy0 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix1 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy1 = np.minimum(a[:, None, 3], b[None, :, 3])
    inter = np.clip(ix1 - ix0, 0, None) * np.clip(iy1 - iy0, 0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return np.where(union > 0, inter / np.where(union > 0, union, 1.0), 0.0)


def match_cells(pred: TableGrid, gt: TableGrid, threshold: float = 0.5) -> CellMatching:
    """Greedy one-to-one matching by descending IoU, ties on ``(pred_id, gt_id)``."""
    pb, gb = _boxes(pred, "pred"), _boxes(gt, "gt")
    pid = [c.id for c in pred.cells]
    gid = [c.id for c in gt.cells]
    m = CellMatching(unmatched_pred=set(pid), unmatched_gt=set(gid))
    if not pid or not gid:
        return m
    ious = box_iou(pb, gb)
    cand = [
        (-float(ious[a, b]), pid[a], gid[b])
        for a, b in zip(*np.nonzero(ious >= threshold))
    ]
    cand.sort()
    for neg, p, g in cand:
        if p in m.unmatched_pred and g in m.unmatched_gt:
            m.pairs.append((p, g))
            m.iou[(p, g)] = -neg
            m.unmatched_pred.discard(p)
            m.unmatched_gt.discard(g)
    m.pairs.sort()
    return m


def identity_matching(pred: TableGrid, gt: TableGrid) -> CellMatching:
    """Match cells sharing an id; for predictions made on the gt cells themselves."""
    pid = {c.id for c in pred.cells}
    gid = {c.id for c in gt.cells}
    both = sorted(pid & gid)
    return CellMatching(
        pairs=[(i, i) for i in both],
        iou={(i, i): 1.0 for i in both},
        unmatched_pred=pid - gid,
        unmatched_gt=gid - pid,
    )


def detection_f1(matching: CellMatching) -> PRF:
    tp = len(matching.pairs)
    return PRF.from_counts(tp, tp + len(matching.unmatched_pred), tp + len(matching.unmatched_gt))


@dataclass
class LogicalCounts:
    n_gt: int = 0
    n_span: int = 0
    all_ok: int = 0
    row_ok: int = 0
    col_ok: int = 0
    span_ok: int = 0

    def __iadd__(self, other: "LogicalCounts") -> "LogicalCounts":
        for k in self.__dataclass_fields__:
            setattr(self, k, getattr(self, k) + getattr(other, k))
        return self

    def ratios(self) -> LogicalAccuracy:
        if self.n_gt == 0:
            return LogicalAccuracy(1.0, 1.0, 1.0, None)
        return LogicalAccuracy(
            self.all_ok / self.n_gt,
            self.row_ok / self.n_gt,
            self.col_ok / self.n_gt,
            self.span_ok / self.n_span if self.n_span else None,
        )


def logical_counts(pred: TableGrid, gt: TableGrid, matching: CellMatching) -> LogicalCounts:
    g2p = {g: p for p, g in matching.pairs}
    ploc = {c.id: c.logical for c in pred.cells}
    out = LogicalCounts()
    for c in gt.cells:
        g = c.logical
        out.n_gt += 1
        span = g.is_spanning
        out.n_span += span
        p = ploc.get(g2p.get(c.id, None))
        if p is None:
            continue
        rows = (p.r_s, p.r_e) == (g.r_s, g.r_e)
        cols = (p.c_s, p.c_e) == (g.c_s, g.c_e)
        out.row_ok += rows
        out.col_ok += cols
        out.all_ok += rows and cols
        out.span_ok += span and rows and cols
    return out


def logical_accuracy(pred: TableGrid, gt: TableGrid, matching: CellMatching) -> LogicalAccuracy:
    """Per-cell accuracy over gt cells; unmatched gt cells count as wrong."""
    return logical_counts(pred, gt, matching).ratios()


def adjacency_counts(pred: TableGrid, gt: TableGrid, matching: CellMatching) -> tuple[int, int, int]:
    """``(true positives, predicted relations, gt relations)`` in gt-id space.

    Overlapping predictions are scored with the raw adjacency predicates.
    """
    gt_rel = adjacency_triplets(gt)
    p2g = matching.pred_to_gt()
    if validate(pred).valid:
        pred_pairs = adjacency_triplets(pred)
    else:
        a_r, a_c = adjacency_pairs_bruteforce(pred, check=False)
        pred_pairs = {(p.i, p.j, p.direction) for p in a_r | a_c}

    def to_gt(i: int):
        return p2g[i] if i in p2g else ("pred", i)

    pred_rel = {(to_gt(i), to_gt(j), d) for i, j, d in pred_pairs}
    return len(pred_rel & gt_rel), len(pred_rel), len(gt_rel)


def adjacency_f1(pred: TableGrid, gt: TableGrid, matching: CellMatching) -> PRF:
    return PRF.from_counts(*adjacency_counts(pred, gt, matching))
