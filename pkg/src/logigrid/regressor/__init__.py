"""Logical-location regressor: cascaded self-attention over cell features."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..core import TableCell
from .config import ConfigError, RegressorConfig
from .embedding import (
    DomainError,
    EmptyInput,
    TableInputs,
    descriptors,
    normalized_corners,
    position_embedding,
    table_inputs,
)
from .gradcheck import GradCheckResult, grad_check, grad_check_suite
from .losses import LengthMismatch, LossTerms, loss_inter, loss_intra, loss_log, total_loss
from .network import Params, cell_features, encode_with_cache, forward, head, init_params
from .training import (
    History,
    NonFiniteLoss,
    heldout_accuracy,
    infer,
    load_checkpoint,
    round_locations,
    save_checkpoint,
    train,
)


def build_cell_features(cells: Sequence[TableCell], params: Params, image_size=None) -> np.ndarray:
    """``(N, d)`` cell representations ``h`` from the cell quads."""
    corners = normalized_corners(cells, image_size)
    d = params["stem.b"].shape[0]
    inp = TableInputs(descriptors(corners), corners, position_embedding(corners[..., 0], corners[..., 1], d))
    return cell_features(inp, params)[0]


def encode(h: np.ndarray, params: Params, stack: str = "base", heads: int = 4) -> np.ndarray:
    layers = sum(1 for name in params.shapes if name.startswith(f"{stack}.") and name.endswith(".wq"))
    return encode_with_cache(h, params, stack, layers, heads)[0]


def base_regress(h_enc: np.ndarray, params: Params) -> np.ndarray:
    return head(h_enc, params, "base")[0]


def stack_regress(h_enc: np.ndarray, l_base: np.ndarray, params: Params, heads: int = 4) -> np.ndarray:
    """Refine the base estimate: ``ReLU(head(encode(l_base W_s + h_enc)))``."""
    s = encode(l_base @ params["stack_proj"] + h_enc, params, "stack", heads)
    return head(s, params, "stack")[0]


__all__ = [
    "ConfigError",
    "DomainError",
    "EmptyInput",
    "GradCheckResult",
    "History",
    "LengthMismatch",
    "LossTerms",
    "NonFiniteLoss",
    "Params",
    "RegressorConfig",
    "base_regress",
    "build_cell_features",
    "encode",
    "forward",
    "grad_check",
    "grad_check_suite",
    "heldout_accuracy",
    "infer",
    "init_params",
    "load_checkpoint",
    "loss_inter",
    "loss_intra",
    "loss_log",
    "round_locations",
    "save_checkpoint",
    "stack_regress",
    "table_inputs",
    "total_loss",
    "train",
]
