"""Pure-Python reference versions of the compiled kernels in ``_ckernels.pyx``."""

from __future__ import annotations

import numpy as np


def tree_distance(lmld1, keyroots1, lmld2, keyroots2, rename) -> float:
    """Zhang-Shasha ordered tree edit distance.

    Nodes are numbered in postorder. ``lmld`` holds the leftmost leaf
    descendant of each node, ``keyroots`` the LR-keyroots in increasing
    order, ``rename`` the ``n1 x n2`` substitution-cost matrix. Insert and
    delete cost 1 per node.
    """
    l1 = [int(v) for v in lmld1]
    l2 = [int(v) for v in lmld2]
    n1, n2 = len(l1), len(l2)
    if n1 == 0 or n2 == 0:
        return float(n1 + n2)
    ren = np.asarray(rename, dtype=np.float64).tolist()
    td = [[0.0] * n2 for _ in range(n1)]
    for i in keyroots1:
        li = l1[i]
        m = i - li + 2
        for j in keyroots2:
            lj = l2[j]
            n = j - lj + 2
            fd = [[0.0] * n for _ in range(m)]
            for x in range(1, m):
                fd[x][0] = fd[x - 1][0] + 1.0
            for y in range(1, n):
                fd[0][y] = fd[0][y - 1] + 1.0
            for x in range(1, m):
                ix = li + x - 1
                lix = l1[ix]
                row, prev = fd[x], fd[x - 1]
                for y in range(1, n):
                    jy = lj + y - 1
                    a = prev[y] + 1.0
                    b = row[y - 1] + 1.0
                    if lix == li and l2[jy] == lj:
                        c = prev[y - 1] + ren[ix][jy]
                        best = a if a < b else b
                        best = c if c < best else best
                        row[y] = best
                        td[ix][jy] = best
                    else:
                        c = fd[lix - li][l2[jy] - lj] + td[ix][jy]
                        best = a if a < b else b
                        row[y] = c if c < best else best
    return td[n1 - 1][n2 - 1]


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def adam_update(param, grad, m, v, step: float, beta1: float, beta2: float, eps: float) -> None:
    """In-place Adam update; ``step`` already includes bias correction."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    param -= step * m / (np.sqrt(v) + eps)
