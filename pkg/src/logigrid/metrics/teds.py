"""Tree-edit-distance similarity between table markups."""

from __future__ import annotations

from typing import Union

import numpy as np

from .._kernels import levenshtein, tree_distance
from ..transform import MarkupSequence, parse_structure
from .tree import Node, postorder

Markup = Union[MarkupSequence, str]


def markup_tree(seq: Markup) -> Node:
    """``table -> tr -> td`` tree; td labels carry ``(rowspan, colspan)``."""
    root = Node(("table",))
    for row in parse_structure(seq):
        tr = Node(("tr",))
        for rs, cs, text in row:
            tr.children.append(Node(("td", rs, cs), text=text or ""))
        root.children.append(tr)
    return root


def normalized_text_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return min(1.0, levenshtein(a, b) / longest)


def table_rename_costs(nodes1: list[Node], nodes2: list[Node], content_mode: bool) -> np.ndarray:
    vocab: dict = {}
    ids1 = np.array([vocab.setdefault(n.label, len(vocab)) for n in nodes1], dtype=np.int64)
    ids2 = np.array([vocab.setdefault(n.label, len(vocab)) for n in nodes2], dtype=np.int64)
    costs = (ids1[:, None] != ids2[None, :]).astype(np.float64)
    if content_mode:
        td1 = [i for i, n in enumerate(nodes1) if n.label[0] == "td"]
        td2 = [j for j, n in enumerate(nodes2) if n.label[0] == "td"]
        for i in td1:
            a = nodes1[i].text or ""
            for j in td2:
                if ids1[i] == ids2[j]:
                    costs[i, j] = normalized_text_distance(a, nodes2[j].text or "")
    return costs


def _distance_and_size(pred: Markup, gt: Markup, content_mode: bool) -> tuple[float, int]:
    p1 = postorder(markup_tree(pred))
    p2 = postorder(markup_tree(gt))
    costs = table_rename_costs(p1.nodes, p2.nodes, content_mode)
    dist = tree_distance(p1.lmld, p1.keyroots, p2.lmld, p2.keyroots, costs)
    return float(dist), max(len(p1.nodes), len(p2.nodes))


def ted(pred: Markup, gt: Markup, content_mode: bool = False) -> float:
    return _distance_and_size(pred, gt, content_mode)[0]


def teds(pred: Markup, gt: Markup, content_mode: bool = False) -> float:
    """``1 - TED / max(|T_pred|, |T_gt|)``, floored at 0.

    TED can exceed the larger tree's size when the shapes differ a lot (a
    wide two-row table against a tall one-column table), hence the floor.
    """
    dist, size = _distance_and_size(pred, gt, content_mode)
    return max(0.0, 1.0 - dist / size)
