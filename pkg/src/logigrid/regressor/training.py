"""Training loop, inference rounding and checkpoint I/O."""

from __future__ import annotations

import base64
import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .._kernels import adam_update
from ..core import LogicalLocation, TableGrid, require_valid
from ..metrics.scores import LogicalCounts, identity_matching, logical_counts
from .config import ConfigError, RegressorConfig
from .embedding import TableInputs, table_inputs
from .losses import LossTerms, total_loss
from .network import Params, backward, forward, init_params, param_shapes

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


class NonFiniteLoss(FloatingPointError):
    pass


@dataclass
class EpochRecord:
    epoch: int
    lr: float
    loss_log: float
    loss_inter: float
    loss_intra: float
    heldout_acc_all: float


@dataclass
class History:
    config: RegressorConfig
    records: list[EpochRecord] = field(default_factory=list)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# config {self.config.to_json()}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "lr", "L_log", "L_inter", "L_intra", "heldout_acc_all"])
            for r in self.records:
                w.writerow([r.epoch, repr(r.lr), repr(r.loss_log), repr(r.loss_inter),
                            repr(r.loss_intra), repr(r.heldout_acc_all)])


class Adam:
    def __init__(self, size: int, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, flat: np.ndarray, grad: np.ndarray, lr: float) -> None:
        self.t += 1
        step = lr * math.sqrt(1 - self.beta2**self.t) / (1 - self.beta1**self.t)
        adam_update(flat, grad, self.m, self.v, step, self.beta1, self.beta2, self.eps)


def loss_and_grad(inp: TableInputs, p: Params, cfg: RegressorConfig,
                  out: Optional[Params] = None) -> tuple[LossTerms, Params]:
    fw = forward(inp, p, cfg)
    base = fw.l_base if cfg.cascade else None
    terms, g_base, g_stack = total_loss(
        base, fw.output, inp.target, inp.pairs_r, inp.pairs_c,
        cfg.loss_inter, cfg.loss_intra, with_grad=True,
    )
    if cfg.cascade:
        grads = backward(fw, inp, p, cfg, g_base, g_stack, out)
    else:
        grads = backward(fw, inp, p, cfg, g_stack, None, out)
    return terms, grads


def loss_value(inp: TableInputs, p: Params, cfg: RegressorConfig) -> float:
    fw = forward(inp, p, cfg)
    base = fw.l_base if cfg.cascade else None
    return total_loss(base, fw.output, inp.target, inp.pairs_r, inp.pairs_c,
                      cfg.loss_inter, cfg.loss_intra).total


def prepare(dataset: Sequence[TableGrid], d: int) -> list[TableInputs]:
    out = []
    for k, g in enumerate(dataset):
        try:
            require_valid(g)
            out.append(table_inputs(g, d))
        except Exception as exc:
            raise ValueError(f"training table {k}: {exc}") from exc
    return out


def train(
    dataset: Sequence[TableGrid],
    config: RegressorConfig,
    heldout: Optional[Sequence[TableGrid]] = None,
    params: Optional[Params] = None,
) -> tuple[Params, History]:
    """One Adam step per table, tables visited in a seeded random order each epoch."""
    config.validate()
    if not dataset:
        raise ConfigError("training dataset is empty")
    inputs = prepare(dataset, config.d)
    rng = np.random.default_rng(config.seed)
    p = params.copy() if params is not None else init_params(config, rng)
    opt = Adam(len(p))
    buf = p.zeros_like()
    history = History(config)
    for epoch in range(config.epochs):
        lr = config.lr_at(epoch)
        sums = np.zeros(3)
        for idx in rng.permutation(len(inputs)):
            terms, grads = loss_and_grad(inputs[idx], p, config, buf)
            if not math.isfinite(terms.total) or not np.all(np.isfinite(grads.flat)):
                raise NonFiniteLoss(
                    f"epoch {epoch}, table {idx}: loss terms {terms} "
                    f"(max |param| = {np.abs(p.flat).max():.3g})"
                )
            sums += (terms.log, terms.inter, terms.intra)
            g = grads.flat
            if config.grad_clip is not None:
                norm = float(np.sqrt(g @ g))
                if norm > config.grad_clip:
                    g *= config.grad_clip / norm
            opt.step(p.flat, g, lr)
        acc = heldout_accuracy(heldout, p, config) if heldout else float("nan")
        means = sums / len(inputs)
        history.records.append(EpochRecord(epoch, lr, *map(float, means), acc))
        log.info("epoch %d lr %.1e L_log %.4f L_inter %.4f L_intra %.4f acc %.4f",
                 epoch, lr, *means, acc)
    return p, history


def raw_predict(grid: TableGrid, p: Params, cfg: RegressorConfig) -> np.ndarray:
    inp = table_inputs(grid, cfg.d, with_targets=False)
    return forward(inp, p, cfg).output


def round_locations(raw: np.ndarray) -> list[LogicalLocation]:
    """Nearest integer (halves away from zero), clamp at 0, then end >= start."""
    r = np.sign(raw) * np.floor(np.abs(raw) + 0.5)
    r = np.maximum(r, 0).astype(np.int64)
    r[:, 1] = np.maximum(r[:, 1], r[:, 0])
    r[:, 3] = np.maximum(r[:, 3], r[:, 2])
    return [LogicalLocation(*map(int, row)) for row in r]


def infer(grid: TableGrid, p: Params, cfg: RegressorConfig) -> tuple[TableGrid, np.ndarray]:
    """Predicted grid (input cells and quads, new logical locations) and the raw reals."""
    raw = raw_predict(grid, p, cfg)
    return grid.with_locations(round_locations(raw)), raw


def heldout_counts(grids: Sequence[TableGrid], p: Params, cfg: RegressorConfig) -> LogicalCounts:
    total = LogicalCounts()
    for g in grids:
        pred, _ = infer(g, p, cfg)
        total += logical_counts(pred, g, identity_matching(pred, g))
    return total


def heldout_accuracy(grids: Sequence[TableGrid], p: Params, cfg: RegressorConfig) -> float:
    return heldout_counts(grids, p, cfg).ratios().acc_all


# -- checkpoints ----------------------------------------------------------------


def save_checkpoint(path, p: Params, cfg: RegressorConfig) -> None:
    tensors = {}
    for name, arr in p.items():
        tensors[name] = {
            "shape": list(arr.shape),
            "data": base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii"),
        }
    doc = {"format": "logigrid-regressor", "version": CHECKPOINT_VERSION, "dtype": "<f8",
           "config": cfg.to_dict(), "tensors": tensors}
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> tuple[Params, RegressorConfig]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != "logigrid-regressor" or doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: not a version-{CHECKPOINT_VERSION} regressor checkpoint")
    cfg = RegressorConfig.from_dict(doc["config"]).validate()
    shapes = param_shapes(cfg)
    p = Params(shapes)
    for name, shape in shapes.items():
        entry = doc["tensors"].get(name)
        if entry is None or tuple(entry["shape"]) != shape:
            raise ValueError(f"{path}: tensor {name} missing or has wrong shape")
        p[name][...] = np.frombuffer(base64.b64decode(entry["data"]), dtype="<f8").reshape(shape)
    return p, cfg
