"""Logical-location losses and their (sub)gradients.

Column order of every ``(N, 4)`` array is ``(r_s, r_e, c_s, c_e)``. At kinks
(hinge argument or absolute value exactly zero) the subgradient 0 is used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..core import LogicalLocation

RS, RE, CS, CE = 0, 1, 2, 3


class LengthMismatch(ValueError):
    pass


def _as_target(gt) -> np.ndarray:
    if isinstance(gt, np.ndarray):
        return gt.astype(np.float64)
    return np.array([g.as_tuple() if isinstance(g, LogicalLocation) else tuple(g) for g in gt],
                    dtype=np.float64).reshape(-1, 4)


def _check_pairs(pairs, n: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size and (arr.min() < 0 or arr.max() >= n):
        raise IndexError(f"adjacent pair index outside 0..{n - 1}")
    return arr


def loss_inter(pred: np.ndarray, pairs_r, pairs_c, with_grad: bool = False):
    """Mutual-exclusion hinge over adjacent pairs.

    For ``(i, j)`` with ``i`` right of ``j``: ``max(c_e[j] - c_s[i] + 1, 0)``;
    for ``i`` under ``j``: ``max(r_e[j] - r_s[i] + 1, 0)``.
    """
    n = pred.shape[0]
    pr, pc = _check_pairs(pairs_r, n), _check_pairs(pairs_c, n)
    t_r = pred[pr[:, 1], CE] - pred[pr[:, 0], CS] + 1.0
    t_c = pred[pc[:, 1], RE] - pred[pc[:, 0], RS] + 1.0
    value = float(np.maximum(t_r, 0).sum() + np.maximum(t_c, 0).sum())
    if not with_grad:
        return value
    grad = np.zeros_like(pred)
    on_r = (t_r > 0).astype(np.float64)
    on_c = (t_c > 0).astype(np.float64)
    np.add.at(grad[:, CE], pr[:, 1], on_r)
    np.add.at(grad[:, CS], pr[:, 0], -on_r)
    np.add.at(grad[:, RE], pc[:, 1], on_c)
    np.add.at(grad[:, RS], pc[:, 0], -on_c)
    return value, grad


def loss_intra(pred: np.ndarray, gt, with_grad: bool = False):
    """Span consistency of multi-row / multi-column cells."""
    target = _as_target(gt)
    if target.shape != pred.shape:
        raise LengthMismatch(f"{pred.shape[0]} predictions vs {target.shape[0]} ground-truth cells")
    mr = target[:, RE] != target[:, RS]
    mc = target[:, CE] != target[:, CS]
    u_r = (pred[:, RS] - pred[:, RE]) - (target[:, RS] - target[:, RE])
    u_c = (pred[:, CS] - pred[:, CE]) - (target[:, CS] - target[:, CE])
    value = float(np.abs(u_r[mr]).sum() + np.abs(u_c[mc]).sum())
    if not with_grad:
        return value
    grad = np.zeros_like(pred)
    s_r = np.sign(u_r) * mr
    s_c = np.sign(u_c) * mc
    grad[:, RS] += s_r
    grad[:, RE] -= s_r
    grad[:, CS] += s_c
    grad[:, CE] -= s_c
    return value, grad


def loss_log(base: Optional[np.ndarray], stack: np.ndarray, gt, with_grad: bool = False):
    """Mean per-cell L1 error, summed over the base and stacking outputs.

    ``base=None`` scores a single (non-cascaded) regressor.
    """
    target = _as_target(gt)
    if target.shape != stack.shape or (base is not None and base.shape != target.shape):
        raise LengthMismatch("predictions and ground truth differ in length")
    n = target.shape[0]
    value = float(np.abs(stack - target).sum()) / n
    if base is not None:
        value += float(np.abs(base - target).sum()) / n
    if not with_grad:
        return value
    g_stack = np.sign(stack - target) / n
    g_base = np.sign(base - target) / n if base is not None else None
    return value, g_base, g_stack


@dataclass
class LossTerms:
    log: float
    inter: float
    intra: float

    @property
    def total(self) -> float:
        return self.log + self.inter + self.intra


def total_loss(base, stack, gt, pairs_r, pairs_c, use_inter: bool = True, use_intra: bool = True,
               with_grad: bool = False):
    """``L_log + L_inter + L_intra`` with the I2C terms on the final output only.

    Disabled terms are reported as 0. With ``with_grad`` returns
    ``(terms, d_base, d_stack)``.
    """
    if with_grad:
        v_log, g_base, g_stack = loss_log(base, stack, gt, with_grad=True)
    else:
        v_log = loss_log(base, stack, gt)
    terms = LossTerms(v_log, 0.0, 0.0)
    if use_inter:
        if with_grad:
            terms.inter, g = loss_inter(stack, pairs_r, pairs_c, with_grad=True)
            g_stack = g_stack + g
        else:
            terms.inter = loss_inter(stack, pairs_r, pairs_c)
    if use_intra:
        if with_grad:
            terms.intra, g = loss_intra(stack, gt, with_grad=True)
            g_stack = g_stack + g
        else:
            terms.intra = loss_intra(stack, gt)
    if with_grad:
        return terms, g_base, g_stack
    return terms


def kink_signature(base, stack, gt, pairs_r, pairs_c) -> list[np.ndarray]:
    """Sign patterns of every hinge/absolute-value argument in the losses."""
    target = _as_target(gt)
    n = stack.shape[0]
    pr, pc = _check_pairs(pairs_r, n), _check_pairs(pairs_c, n)
    sig = [
        np.sign(stack - target),
        np.sign(stack[pr[:, 1], CE] - stack[pr[:, 0], CS] + 1.0),
        np.sign(stack[pc[:, 1], RE] - stack[pc[:, 0], RS] + 1.0),
        np.sign((stack[:, RS] - stack[:, RE]) - (target[:, RS] - target[:, RE])),
        np.sign((stack[:, CS] - stack[:, CE]) - (target[:, CS] - target[:, CE])),
    ]
    if base is not None:
        sig.append(np.sign(base - target))
    return sig


def loss_pieces(base, stack, gt, pairs_r, pairs_c, use_inter: bool = True, use_intra: bool = True) -> np.ndarray:
    """Every additive term of :func:`total_loss` as one flat array (its sum is the loss)."""
    target = _as_target(gt)
    n = stack.shape[0]
    parts = [(np.abs(stack - target) / n).ravel()]
    if base is not None:
        parts.append((np.abs(base - target) / n).ravel())
    if use_inter:
        pr, pc = _check_pairs(pairs_r, n), _check_pairs(pairs_c, n)
        parts.append(np.maximum(stack[pr[:, 1], CE] - stack[pr[:, 0], CS] + 1.0, 0))
        parts.append(np.maximum(stack[pc[:, 1], RE] - stack[pc[:, 0], RS] + 1.0, 0))
    if use_intra:
        mr = target[:, RE] != target[:, RS]
        mc = target[:, CE] != target[:, CS]
        parts.append(np.abs((stack[:, RS] - stack[:, RE]) - (target[:, RS] - target[:, RE]))[mr])
        parts.append(np.abs((stack[:, CS] - stack[:, CE]) - (target[:, CS] - target[:, CE]))[mc])
    return np.concatenate(parts)
