"""Ordered labelled trees and the edit distance between them."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .._kernels import tree_distance


@dataclass
class Node:
    label: Any
    children: list["Node"] = field(default_factory=list)
    text: Optional[str] = None

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


@dataclass
class PostorderIndex:
    nodes: list[Node]
    lmld: np.ndarray
    keyroots: np.ndarray


def postorder(root: Optional[Node]) -> PostorderIndex:
    nodes: list[Node] = []
    if root is not None:
        # iterative: a long row list must not hit the recursion limit
        stack: list[tuple[Node, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded or not node.children:
                nodes.append(node)
                continue
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    lmld = list(range(len(nodes)))
    _fill_lmld(nodes, lmld)
    last: dict[int, int] = {}
    for i, l in enumerate(lmld):
        last[l] = i
    keyroots = np.array(sorted(last.values()), dtype=np.int64)
    return PostorderIndex(nodes, np.asarray(lmld, dtype=np.int64), keyroots)


def _fill_lmld(nodes: list[Node], lmld: list[int]) -> None:
    pos = {id(n): i for i, n in enumerate(nodes)}
    for i, n in enumerate(nodes):
        if n.children:
            first = n.children[0]
            while first.children:
                first = first.children[0]
            lmld[i] = pos[id(first)]


def unit_rename(a: Node, b: Node) -> float:
    return 0.0 if a.label == b.label else 1.0


def rename_matrix(
    t1: PostorderIndex, t2: PostorderIndex, rename: Callable[[Node, Node], float]
) -> np.ndarray:
    out = np.empty((len(t1.nodes), len(t2.nodes)), dtype=np.float64)
    for i, a in enumerate(t1.nodes):
        for j, b in enumerate(t2.nodes):
            out[i, j] = rename(a, b)
    return out


def tree_edit_distance(
    t1: Optional[Node],
    t2: Optional[Node],
    rename: Callable[[Node, Node], float] = unit_rename,
    rename_costs: Optional[np.ndarray] = None,
) -> float:
    """Ordered tree edit distance with unit insert/delete costs."""
    p1, p2 = postorder(t1), postorder(t2)
    if rename_costs is None:
        rename_costs = rename_matrix(p1, p2, rename)
    return float(tree_distance(p1.lmld, p1.keyroots, p2.lmld, p2.keyroots, rename_costs))
