"""Cascaded self-attention regressor with hand-written backpropagation.

Every learnable tensor is a view into one flat float64 buffer so optimizers
and finite-difference checks can treat the parameters as a single vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .config import RegressorConfig
from .embedding import N_DESCRIPTOR, TableInputs

LN_EPS = 1e-5


class Params:
    def __init__(self, shapes: dict[str, tuple[int, ...]], flat: Optional[np.ndarray] = None):
        self.shapes = {k: tuple(v) for k, v in shapes.items()}
        self._offsets: dict[str, tuple[int, int]] = {}
        offset = 0
        for name, shape in self.shapes.items():
            size = int(np.prod(shape))
            self._offsets[name] = (offset, offset + size)
            offset += size
        if flat is None:
            flat = np.zeros(offset, dtype=np.float64)
        elif flat.shape != (offset,):
            raise ValueError(f"flat buffer has {flat.size} entries, expected {offset}")
        self.flat = flat
        self._views = {
            name: flat[a:b].reshape(self.shapes[name]) for name, (a, b) in self._offsets.items()
        }

    def __getitem__(self, name: str) -> np.ndarray:
        return self._views[name]

    def __setitem__(self, name: str, value) -> None:
        view = self._views[name]
        if value is not view:
            view[...] = value

    def __contains__(self, name: str) -> bool:
        return name in self._views

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self._views.items())

    def zeros_like(self) -> "Params":
        return Params(self.shapes)

    def copy(self) -> "Params":
        return Params(self.shapes, self.flat.copy())

    def offsets(self) -> dict[str, tuple[int, int]]:
        return dict(self._offsets)

    def __len__(self) -> int:
        return self.flat.size


def _layer_shapes(prefix: str, d: int, ffn: int) -> dict[str, tuple[int, ...]]:
    shapes = {
        "ln1_g": (d,), "ln1_b": (d,),
        "wq": (d, d), "wk": (d, d), "wv": (d, d), "wo": (d, d), "bo": (d,),
        "ln2_g": (d,), "ln2_b": (d,),
        "w1": (d, ffn), "b1": (ffn,), "w2": (ffn, d), "b2": (d,),
    }
    return {f"{prefix}.{k}": v for k, v in shapes.items()}


def stack_names(cfg: RegressorConfig) -> list[tuple[str, int]]:
    stacks = [("base", cfg.layers_base)]
    if cfg.cascade:
        stacks.append(("stack", cfg.layers_stack))
    return stacks


def param_shapes(cfg: RegressorConfig) -> dict[str, tuple[int, ...]]:
    d = cfg.d
    shapes: dict[str, tuple[int, ...]] = {
        "stem.w": (N_DESCRIPTOR, d), "stem.b": (d,),
        "corner.w": (2, d), "corner.b": (d,),
        "corner_weights": (4,),
    }
    for name, layers in stack_names(cfg):
        for i in range(layers):
            shapes.update(_layer_shapes(f"{name}.{i}", d, cfg.ffn))
        shapes[f"{name}.lnf_g"] = (d,)
        shapes[f"{name}.lnf_b"] = (d,)
        shapes[f"{name}_head.w"] = (d, 4)
        shapes[f"{name}_head.b"] = (4,)
    if cfg.cascade:
        shapes["stack_proj"] = (4, d)
    return shapes


def init_params(cfg: RegressorConfig, rng: Optional[np.random.Generator] = None) -> Params:
    cfg.validate()
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    p = Params(param_shapes(cfg))
    d = cfg.d
    n_layers = cfg.layers_base + (cfg.layers_stack if cfg.cascade else 0)
    resid_scale = 1.0 / np.sqrt(2.0 * n_layers)
    for name, arr in p.items():
        leaf = name.rsplit(".", 1)[-1]
        if leaf.endswith("_g"):
            arr[...] = 1.0
        elif leaf in ("w", "wq", "wk", "wv", "w1"):
            arr[...] = rng.normal(0.0, 1.0 / np.sqrt(arr.shape[0]), arr.shape)
        elif leaf in ("wo", "w2"):
            arr[...] = rng.normal(0.0, resid_scale / np.sqrt(arr.shape[0]), arr.shape)
    p["stem.w"][...] = rng.normal(0.0, 1.0, p["stem.w"].shape)
    p["corner.w"][...] = rng.normal(0.0, 1.0, p["corner.w"].shape)
    p["corner_weights"][...] = 0.25
    for name, _ in stack_names(cfg):
        p[f"{name}_head.w"][...] = rng.normal(0.0, 0.1 / np.sqrt(d), (d, 4))
        # positive bias keeps the output ReLU alive at the start of training
        p[f"{name}_head.b"][...] = 1.0
    if cfg.cascade:
        p["stack_proj"][...] = rng.normal(0.0, 0.1, (4, d))
    return p


# -- primitive layers ---------------------------------------------------------


def layer_norm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    inv = 1.0 / np.sqrt((xc * xc).mean(axis=-1, keepdims=True) + LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv, g)


def layer_norm_back(dy, cache):
    xhat, inv, g = cache
    dg = (dy * xhat).sum(axis=0)
    db = dy.sum(axis=0)
    dxhat = dy * g
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True) - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dg, db


def softmax(s):
    s = s - s.max(axis=-1, keepdims=True)
    e = np.exp(s)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class LayerCache:
    ln1: tuple
    a: np.ndarray
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray
    attn: np.ndarray
    o: np.ndarray
    ln2: tuple
    b: np.ndarray
    relu_mask: np.ndarray
    r: np.ndarray


def encoder_layer(x, p: Params, prefix: str, heads: int):
    n, d = x.shape
    dh = d // heads
    a, ln1 = layer_norm(x, p[f"{prefix}.ln1_g"], p[f"{prefix}.ln1_b"])
    q = (a @ p[f"{prefix}.wq"]).reshape(n, heads, dh).transpose(1, 0, 2)
    k = (a @ p[f"{prefix}.wk"]).reshape(n, heads, dh).transpose(1, 0, 2)
    v = (a @ p[f"{prefix}.wv"]).reshape(n, heads, dh).transpose(1, 0, 2)
    attn = softmax(q @ k.transpose(0, 2, 1) / np.sqrt(dh))
    o = (attn @ v).transpose(1, 0, 2).reshape(n, d)
    x1 = x + o @ p[f"{prefix}.wo"] + p[f"{prefix}.bo"]
    b, ln2 = layer_norm(x1, p[f"{prefix}.ln2_g"], p[f"{prefix}.ln2_b"])
    u = b @ p[f"{prefix}.w1"] + p[f"{prefix}.b1"]
    mask = u > 0
    r = u * mask
    x2 = x1 + r @ p[f"{prefix}.w2"] + p[f"{prefix}.b2"]
    return x2, LayerCache(ln1, a, q, k, v, attn, o, ln2, b, mask, r)


def encoder_layer_back(dx2, c: LayerCache, p: Params, g: Params, prefix: str, heads: int):
    n, d = dx2.shape
    dh = d // heads
    # feed-forward sublayer
    g[f"{prefix}.b2"] += dx2.sum(axis=0)
    g[f"{prefix}.w2"] += c.r.T @ dx2
    du = (dx2 @ p[f"{prefix}.w2"].T) * c.relu_mask
    g[f"{prefix}.b1"] += du.sum(axis=0)
    g[f"{prefix}.w1"] += c.b.T @ du
    db, dg2, db2 = layer_norm_back(du @ p[f"{prefix}.w1"].T, c.ln2)
    g[f"{prefix}.ln2_g"] += dg2
    g[f"{prefix}.ln2_b"] += db2
    dx1 = dx2 + db
    # attention sublayer
    g[f"{prefix}.bo"] += dx1.sum(axis=0)
    g[f"{prefix}.wo"] += c.o.T @ dx1
    do = (dx1 @ p[f"{prefix}.wo"].T).reshape(n, heads, dh).transpose(1, 0, 2)
    dattn = do @ c.v.transpose(0, 2, 1)
    dv = c.attn.transpose(0, 2, 1) @ do
    ds = c.attn * (dattn - (dattn * c.attn).sum(axis=-1, keepdims=True)) / np.sqrt(dh)
    dq = ds @ c.k
    dk = ds.transpose(0, 2, 1) @ c.q
    dq = dq.transpose(1, 0, 2).reshape(n, d)
    dk = dk.transpose(1, 0, 2).reshape(n, d)
    dv = dv.transpose(1, 0, 2).reshape(n, d)
    g[f"{prefix}.wq"] += c.a.T @ dq
    g[f"{prefix}.wk"] += c.a.T @ dk
    g[f"{prefix}.wv"] += c.a.T @ dv
    da = dq @ p[f"{prefix}.wq"].T + dk @ p[f"{prefix}.wk"].T + dv @ p[f"{prefix}.wv"].T
    dx, dg1, db1 = layer_norm_back(da, c.ln1)
    g[f"{prefix}.ln1_g"] += dg1
    g[f"{prefix}.ln1_b"] += db1
    return dx1 + dx


def encode_with_cache(h, p: Params, name: str, layers: int, heads: int):
    caches = []
    x = h
    for i in range(layers):
        x, c = encoder_layer(x, p, f"{name}.{i}", heads)
        caches.append(c)
    out, lnf = layer_norm(x, p[f"{name}.lnf_g"], p[f"{name}.lnf_b"])
    return out, (caches, lnf)


def encode_back(dout, cache, p: Params, g: Params, name: str, heads: int):
    caches, lnf = cache
    dx, dg, db = layer_norm_back(dout, lnf)
    g[f"{name}.lnf_g"] += dg
    g[f"{name}.lnf_b"] += db
    for i in reversed(range(len(caches))):
        dx = encoder_layer_back(dx, caches[i], p, g, f"{name}.{i}", heads)
    return dx


def head(x, p: Params, name: str):
    u = x @ p[f"{name}_head.w"] + p[f"{name}_head.b"]
    mask = u > 0
    return u * mask, mask


def head_back(dy, x, mask, p: Params, g: Params, name: str):
    du = dy * mask
    g[f"{name}_head.w"] += x.T @ du
    g[f"{name}_head.b"] += du.sum(axis=0)
    return du @ p[f"{name}_head.w"].T


# -- full model -------------------------------------------------------------


@dataclass
class Forward:
    corner_feats: np.ndarray  # (N, 4, d) corner stem + PE
    h: np.ndarray
    h_enc: np.ndarray
    enc_cache: tuple
    l_base: np.ndarray
    base_mask: np.ndarray
    s_in: Optional[np.ndarray] = None
    s_enc: Optional[np.ndarray] = None
    stack_cache: Optional[tuple] = None
    l_stack: Optional[np.ndarray] = None
    stack_mask: Optional[np.ndarray] = None

    @property
    def output(self) -> np.ndarray:
        """Final logical estimate: the stacking output, or the base output without cascade."""
        return self.l_stack if self.l_stack is not None else self.l_base

    def relu_masks(self) -> list[np.ndarray]:
        masks = [c.relu_mask for c in self.enc_cache[0]]
        masks.append(self.base_mask)
        if self.stack_cache is not None:
            masks += [c.relu_mask for c in self.stack_cache[0]]
            masks.append(self.stack_mask)
        return masks


def cell_features(inp: TableInputs, p: Params):
    """``h = stem(desc) + sum_k w_k (corner_stem(corner_k) + PE(corner_k))``."""
    f = inp.desc @ p["stem.w"] + p["stem.b"]
    ft = inp.corners @ p["corner.w"] + p["corner.b"] + inp.corner_pe
    h = f + np.einsum("k,nkd->nd", p["corner_weights"], ft)
    return h, ft


def forward(inp: TableInputs, p: Params, cfg: RegressorConfig) -> Forward:
    h, ft = cell_features(inp, p)
    h_enc, enc_cache = encode_with_cache(h, p, "base", cfg.layers_base, cfg.heads)
    l_base, base_mask = head(h_enc, p, "base")
    fw = Forward(ft, h, h_enc, enc_cache, l_base, base_mask)
    if cfg.cascade:
        fw.s_in = l_base @ p["stack_proj"] + h_enc
        fw.s_enc, fw.stack_cache = encode_with_cache(fw.s_in, p, "stack", cfg.layers_stack, cfg.heads)
        fw.l_stack, fw.stack_mask = head(fw.s_enc, p, "stack")
    return fw


def backward(fw: Forward, inp: TableInputs, p: Params, cfg: RegressorConfig,
             d_base: np.ndarray, d_stack: Optional[np.ndarray], out: Optional[Params] = None) -> Params:
    """Gradients of a loss whose partials w.r.t. the base/stacking outputs are given.

    ``out`` is zeroed and reused when supplied.
    """
    if out is None:
        g = p.zeros_like()
    else:
        g = out
        g.flat[...] = 0.0
    dh_enc = np.zeros_like(fw.h_enc)
    dl_base = d_base.copy()
    if cfg.cascade:
        ds_enc = head_back(d_stack, fw.s_enc, fw.stack_mask, p, g, "stack")
        ds_in = encode_back(ds_enc, fw.stack_cache, p, g, "stack", cfg.heads)
        g["stack_proj"] += fw.l_base.T @ ds_in
        dl_base += ds_in @ p["stack_proj"].T
        dh_enc += ds_in
    dh_enc += head_back(dl_base, fw.h_enc, fw.base_mask, p, g, "base")
    dh = encode_back(dh_enc, fw.enc_cache, p, g, "base", cfg.heads)
    # cell features
    g["stem.w"] += inp.desc.T @ dh
    g["stem.b"] += dh.sum(axis=0)
    g["corner_weights"] += np.einsum("nd,nkd->k", dh, fw.corner_feats)
    dft = p["corner_weights"][None, :, None] * dh[:, None, :]
    g["corner.w"] += np.einsum("nkc,nkd->cd", inp.corners, dft)
    g["corner.b"] += dft.sum(axis=(0, 1))
    return g


def attention_weights(inp: TableInputs, p: Params, cfg: RegressorConfig, stack: str = "base") -> list[np.ndarray]:
    """Per-layer ``(heads, N, N)`` attention matrices of one encoder stack."""
    fw = forward(inp, p, cfg)
    cache = fw.enc_cache if stack == "base" else fw.stack_cache
    return [c.attn for c in cache[0]]
