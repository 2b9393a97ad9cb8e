"""Detection, logical-location, adjacency, TEDS and BLEU metrics."""

from .bleu import bleu, corpus_bleu
from .report import ALL_METRICS, MetricReport, evaluate
from .scores import (
    PRF,
    CellMatching,
    LogicalAccuracy,
    adjacency_f1,
    box_iou,
    detection_f1,
    identity_matching,
    logical_accuracy,
    match_cells,
)
from .teds import markup_tree, ted, teds
from .tree import Node, tree_edit_distance

__all__ = [
    "ALL_METRICS",
    "CellMatching",
    "LogicalAccuracy",
    "MetricReport",
    "Node",
    "PRF",
    "adjacency_f1",
    "bleu",
    "box_iou",
    "corpus_bleu",
    "detection_f1",
    "evaluate",
    "identity_matching",
    "logical_accuracy",
    "markup_tree",
    "match_cells",
    "ted",
    "teds",
    "tree_edit_distance",
]
