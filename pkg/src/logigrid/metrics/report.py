"""Per-sample and corpus metric reports for aligned prediction/gt grids."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

from ..core import TableGrid, validate
from ..transform import MarkupSequence, to_markup
from .bleu import corpus_bleu
from .scores import (
    PRF,
    CellMatching,
    LogicalCounts,
    adjacency_counts,
    logical_counts,
    match_cells,
)
from .teds import teds

ALL_METRICS = ("detection", "logical", "adjacency", "teds", "bleu")
SPATIAL_METRICS = ("detection", "logical", "adjacency")


@dataclass
class SampleMetrics:
    index: int
    pred_valid: bool
    detection_counts: Optional[tuple[int, int, int]] = None
    logical: Optional[LogicalCounts] = None
    adjacency_counts: Optional[tuple[int, int, int]] = None
    teds: Optional[float] = None
    bleu: Optional[float] = None

    def row(self) -> dict:
        out: dict = {"index": self.index, "pred_valid": self.pred_valid}
        if self.detection_counts is not None:
            prf = PRF.from_counts(*self.detection_counts)
            out.update(det_p=prf.precision, det_r=prf.recall, det_f1=prf.f1)
        if self.logical is not None:
            acc = self.logical.ratios()
            out.update(acc_all=acc.acc_all, acc_row=acc.acc_row, acc_col=acc.acc_col, acc_span=acc.acc_span)
        if self.adjacency_counts is not None:
            prf = PRF.from_counts(*self.adjacency_counts)
            out.update(adj_p=prf.precision, adj_r=prf.recall, adj_f1=prf.f1)
        if self.teds is not None:
            out["teds"] = self.teds
        if self.bleu is not None:
            out["bleu"] = self.bleu
        return out


@dataclass
class MetricReport:
    n_samples: int
    detection: Optional[PRF] = None
    logical: Optional[dict] = None
    adjacency: Optional[PRF] = None
    teds: Optional[float] = None
    bleu: Optional[float] = None
    samples: list[SampleMetrics] = field(default_factory=list)

    def to_dict(self, per_sample: bool = False) -> dict:
        out: dict = {"n_samples": self.n_samples}
        for name in ("detection", "adjacency"):
            v = getattr(self, name)
            if v is not None:
                out[name] = asdict(v)
        if self.logical is not None:
            out["logical"] = self.logical
        if self.teds is not None:
            out["teds"] = self.teds
        if self.bleu is not None:
            out["bleu"] = self.bleu
        out["invalid_predictions"] = [s.index for s in self.samples if not s.pred_valid]
        if per_sample:
            out["samples"] = [s.row() for s in self.samples]
        return out

    def write_csv(self, path) -> None:
        rows = [s.row() for s in self.samples]
        keys: list[str] = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=keys)
            w.writeheader()
            for r in rows:
                w.writerow(r)


def evaluate_sample(
    index: int,
    pred: TableGrid,
    gt: TableGrid,
    metrics: Sequence[str] = ALL_METRICS,
    threshold: float = 0.5,
    content_mode: bool = False,
    matching: Optional[CellMatching] = None,
) -> tuple[SampleMetrics, Optional[MarkupSequence], Optional[MarkupSequence]]:
    valid = validate(pred).valid
    s = SampleMetrics(index, valid)
    if any(k in metrics for k in SPATIAL_METRICS):
        m = matching if matching is not None else match_cells(pred, gt, threshold)
        if "detection" in metrics:
            s.detection_counts = (len(m.pairs), len(pred.cells), len(gt.cells))
        if "logical" in metrics:
            s.logical = logical_counts(pred, gt, m)
        if "adjacency" in metrics:
            s.adjacency_counts = adjacency_counts(pred, gt, m)
    pm = gm = None
    if "teds" in metrics or "bleu" in metrics:
        gm = to_markup(gt, content_mode)
        # overlapping predictions have no markup rendering; they score zero
        pm = to_markup(pred, content_mode) if valid else MarkupSequence(())
        if "teds" in metrics:
            s.teds = teds(pm, gm, content_mode) if valid else 0.0
        if "bleu" in metrics:
            s.bleu = corpus_bleu([pm], [gm])
    return s, pm, gm


def evaluate(
    preds: Sequence[TableGrid],
    gts: Sequence[TableGrid],
    metrics: Iterable[str] = ALL_METRICS,
    threshold: float = 0.5,
    content_mode: bool = False,
) -> MetricReport:
    """Score aligned prediction/gt grids. Ratios are micro-averaged over the
    corpus except TEDS (mean of per-table scores) and BLEU (corpus BLEU)."""
    metrics = tuple(metrics)
    unknown = set(metrics) - set(ALL_METRICS)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    if len(preds) != len(gts):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(gts)} ground truths")
    report = MetricReport(n_samples=len(gts))
    det = [0, 0, 0]
    logical = LogicalCounts()
    adj = [0, 0, 0]
    markups_p, markups_g = [], []
    for k, (p, g) in enumerate(zip(preds, gts)):
        s, pm, gm = evaluate_sample(k, p, g, metrics, threshold, content_mode)
        report.samples.append(s)
        if s.detection_counts is not None:
            det = [a + b for a, b in zip(det, s.detection_counts)]
        if s.logical is not None:
            logical += s.logical
        if s.adjacency_counts is not None:
            adj = [a + b for a, b in zip(adj, s.adjacency_counts)]
        if pm is not None:
            markups_p.append(pm)
            markups_g.append(gm)
    if "detection" in metrics:
        report.detection = PRF.from_counts(*det)
    if "logical" in metrics:
        report.logical = asdict(logical.ratios())
    if "adjacency" in metrics:
        report.adjacency = PRF.from_counts(*adj)
    if "teds" in metrics:
        vals = [s.teds for s in report.samples]
        report.teds = math.fsum(vals) / len(vals) if vals else 1.0
    if "bleu" in metrics:
        report.bleu = corpus_bleu(markups_p, markups_g) if markups_p else 1.0
    return report
