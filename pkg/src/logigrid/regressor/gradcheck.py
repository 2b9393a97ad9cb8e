"""Central finite-difference check of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import TableGrid
from .config import RegressorConfig
from .embedding import TableInputs, table_inputs
from .losses import kink_signature, loss_pieces
from .network import Params, forward, init_params
from .training import loss_and_grad


@dataclass
class GradCheckResult:
    max_rel_error: float
    checked: int
    excluded: int
    worst_param: Optional[str] = None


def _evaluate(inp: TableInputs, p: Params, cfg: RegressorConfig) -> tuple[np.ndarray, bytes]:
    """Per-term loss contributions and the kink signature at ``p``."""
    fw = forward(inp, p, cfg)
    base = fw.l_base if cfg.cascade else None
    pieces = loss_pieces(base, fw.output, inp.target, inp.pairs_r, inp.pairs_c, cfg.loss_inter, cfg.loss_intra)
    parts = [m.astype(np.int8) for m in fw.relu_masks()]
    parts += [s.astype(np.int8) for s in kink_signature(base, fw.output, inp.target, inp.pairs_r, inp.pairs_c)]
    return pieces, b"".join(x.tobytes() for x in parts)


def grad_check(
    params: Params,
    sample: TableGrid,
    cfg: RegressorConfig,
    epsilon: float = 1e-5,
    n_params: int = 200,
    rng: Optional[np.random.Generator] = None,
) -> GradCheckResult:
    """Max ``|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`` over sampled parameters.

    A parameter whose +/- epsilon perturbation flips any ReLU, hinge or
    absolute-value sign is excluded (the loss is not differentiable there)
    and another one is drawn in its place. The difference ``f(+) - f(-)`` is
    accumulated term by term so the rounding of the (large) total loss does
    not swamp small derivatives.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    inp = table_inputs(sample, cfg.d)
    p = params.copy()
    _, grads = loss_and_grad(inp, p, cfg)
    _, sig0 = _evaluate(inp, p, cfg)
    offsets = params.offsets()
    names = list(offsets)
    worst, worst_name, checked, excluded = 0.0, None, 0, 0
    order = rng.permutation(len(p))
    for idx in order:
        if checked >= n_params:
            break
        old = p.flat[idx]
        p.flat[idx] = old + epsilon
        f_plus, sig_plus = _evaluate(inp, p, cfg)
        p.flat[idx] = old - epsilon
        f_minus, sig_minus = _evaluate(inp, p, cfg)
        p.flat[idx] = old
        if sig_plus != sig0 or sig_minus != sig0:
            excluded += 1
            continue
        numeric = float(np.sum(f_plus - f_minus)) / (2 * epsilon)
        analytic = grads.flat[idx]
        rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
        checked += 1
        if rel > worst:
            worst = rel
            worst_name = next(n for n in names if offsets[n][0] <= idx < offsets[n][1])
    return GradCheckResult(worst, checked, excluded, worst_name)


def grad_check_suite(
    cfg: Optional[RegressorConfig] = None,
    n_instances: int = 5,
    table_seed: int = 2024,
    epsilon: float = 1e-5,
    n_params: int = 200,
) -> list[GradCheckResult]:
    """Fixed protocol: instance ``k`` checks synthetic table ``k`` with params and sampling seeded by ``k``."""
    from ..synth import SynthConfig, generate

    cfg = cfg if cfg is not None else RegressorConfig()
    tables = generate(SynthConfig(n_tables=n_instances, rows=(2, 8), cols=(2, 8),
                                  span_probability=0.2, jitter=0.05, seed=table_seed))
    out = []
    for k, table in enumerate(tables):
        inst = RegressorConfig.from_dict({**cfg.to_dict(), "seed": k})
        params = init_params(inst, np.random.default_rng(k))
        out.append(grad_check(params, table, inst, epsilon, n_params, np.random.default_rng(k)))
    return out
