import numpy as np
import pytest
from hypothesis import given, strategies as st

from logigrid.core import MissingQuad, SpatialQuad, TableCell, TableGrid
from logigrid.regressor import (
    DomainError,
    EmptyInput,
    Params,
    RegressorConfig,
    base_regress,
    build_cell_features,
    encode,
    forward,
    infer,
    init_params,
    position_embedding,
    round_locations,
    stack_regress,
    table_inputs,
)
from logigrid.regressor.network import attention_weights, param_shapes

from conftest import grid, synth_grid

CFG = RegressorConfig(d=32, heads=4, ffn=48, layers_base=2, layers_stack=2)


@pytest.fixture(scope="module")
def params():
    return init_params(CFG, np.random.default_rng(0))


def _h(params, seed=1, n_rows=(2, 4)):
    g = synth_grid(seed, rows=n_rows, cols=n_rows, jitter=0.05)
    return g, build_cell_features(g.cells, params, g.image_size)


# -- position embedding ---------------------------------------------------------


def test_pe_at_origin():
    pe = position_embedding(0.0, 0.0, 64)
    assert np.all(pe[0::2] == 0.0) and np.all(pe[1::2] == 1.0)


def test_pe_deterministic_and_split():
    a = position_embedding(0.3, 0.7, 64)
    assert np.array_equal(a, position_embedding(0.3, 0.7, 64))
    # x lives in the first half, y in the second
    assert np.array_equal(a[:32], position_embedding(0.3, 0.1, 64)[:32])
    assert np.array_equal(a[32:], position_embedding(0.9, 0.7, 64)[32:])


def test_pe_lowest_frequency_has_unit_period():
    pe = position_embedding(0.25, 0.0, 16)
    assert pe[0] == pytest.approx(1.0) and pe[1] == pytest.approx(0.0, abs=1e-15)


@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([4, 16, 64, 256]))
def test_pe_norm(x, y, d):
    pe = position_embedding(x, y, d)
    assert float(pe @ pe) == pytest.approx(d / 2, rel=1e-12)


@pytest.mark.parametrize("x,y", [(-0.01, 0.5), (0.5, 1.01), (float("nan"), 0.0)])
def test_pe_domain(x, y):
    with pytest.raises(DomainError):
        position_embedding(x, y, 16)


# -- cell features ---------------------------------------------------------------


def test_features_shape(params):
    g = synth_grid(4, rows=(7, 7), cols=(1, 1), span=0.0)
    cfg64 = RegressorConfig()
    h = build_cell_features(g.cells, init_params(cfg64), g.image_size)
    assert h.shape == (7, 64)


def test_zero_corner_weights_gives_center_feature(params):
    p = params.copy()
    p["corner_weights"][...] = 0.0
    g, h = _h(p)
    inp = table_inputs(g, CFG.d)
    np.testing.assert_array_equal(h, inp.desc @ p["stem.w"] + p["stem.b"])


def test_translation_changes_features(params):
    g, h = _h(params)
    moved = TableGrid(tuple(
        TableCell(c.id, c.logical, SpatialQuad(tuple((x + 5, y + 5) for x, y in c.quad.corners)))
        for c in g.cells), g.image_size)
    assert not np.allclose(h, build_cell_features(moved.cells, params, moved.image_size))


def test_features_need_quads(params):
    with pytest.raises(MissingQuad):
        build_cell_features(grid((0, 0, 0, 0)).cells, params, (100, 100))
    with pytest.raises(EmptyInput):
        build_cell_features((), params, (100, 100))


# -- encoder ---------------------------------------------------------------------


def test_single_cell_attention_is_one(params):
    g = grid((0, 0, 0, 0), quads=True)
    for stack in ("base", "stack"):
        for a in attention_weights(table_inputs(g, CFG.d), params, CFG, stack):
            assert a.shape == (CFG.heads, 1, 1) and np.all(a == 1.0)


def test_attention_rows_sum_to_one(params):
    g = synth_grid(3, jitter=0.05)
    for a in attention_weights(table_inputs(g, CFG.d), params, CFG):
        np.testing.assert_allclose(a.sum(axis=-1), 1.0, atol=1e-6)


@given(st.integers(0, 10**5))
def test_encode_permutation_equivariant(seed):
    p = init_params(CFG, np.random.default_rng(seed))
    _, h = _h(p, seed)
    perm = np.random.default_rng(seed).permutation(h.shape[0])
    out = encode(h, p, "base", CFG.heads)
    np.testing.assert_allclose(encode(h[perm], p, "base", CFG.heads), out[perm], atol=1e-10)


def test_infer_permutation_equivariant(params):
    g = synth_grid(8, jitter=0.05)
    perm = np.random.default_rng(8).permutation(len(g.cells))
    shuffled = TableGrid(tuple(g.cells[k] for k in perm), g.image_size)
    _, raw = infer(g, params, CFG)
    _, raw_p = infer(shuffled, params, CFG)
    np.testing.assert_allclose(raw_p, raw[perm], atol=1e-10)


# -- heads -----------------------------------------------------------------------


def test_base_regress_zero_weights(params):
    p = params.copy()
    p["base_head.w"][...] = 0.0
    p["base_head.b"][...] = [1.5, -2.0, 0.0, 3.0]
    out = base_regress(np.random.default_rng(0).normal(size=(5, CFG.d)), p)
    assert out.shape == (5, 4)
    assert np.all(out == [1.5, 0.0, 0.0, 3.0])


@given(st.integers(0, 10**5))
def test_outputs_nonnegative(seed):
    rng = np.random.default_rng(seed)
    p = init_params(CFG, rng)
    p["base_head.b"][...] = rng.normal(size=4)
    p["stack_head.b"][...] = rng.normal(size=4)
    h = rng.normal(size=(6, CFG.d))
    h_enc = encode(h, p, "base", CFG.heads)
    l_base = base_regress(h_enc, p)
    assert np.all(l_base >= 0)
    assert np.all(stack_regress(h_enc, l_base, p, CFG.heads) >= 0)


def test_stack_ignores_base_when_projection_zero(params):
    p = params.copy()
    p["stack_proj"][...] = 0.0
    rng = np.random.default_rng(2)
    h_enc = rng.normal(size=(5, CFG.d))
    a = stack_regress(h_enc, rng.normal(size=(5, 4)), p, CFG.heads)
    b = stack_regress(h_enc, rng.normal(size=(5, 4)), p, CFG.heads)
    np.testing.assert_array_equal(a, b)


def test_stack_mixes_cells(params):
    # finite-difference Jacobian probe: base estimate of cell 0 moves the output of other cells
    p = params.copy()
    p["stack_head.b"][...] = 2.0
    rng = np.random.default_rng(5)
    h_enc = rng.normal(size=(6, CFG.d))
    l_base = np.abs(rng.normal(size=(6, 4))) + 1
    eps = 1e-6
    bumped = l_base.copy()
    bumped[0, 0] += eps
    jac = (stack_regress(h_enc, bumped, p, CFG.heads) - stack_regress(h_enc, l_base, p, CFG.heads)) / eps
    assert np.abs(jac[1:]).max() > 1e-6


def test_public_ops_match_forward(params):
    g = synth_grid(6, jitter=0.05)
    fw = forward(table_inputs(g, CFG.d), params, CFG)
    h = build_cell_features(g.cells, params, g.image_size)
    h_enc = encode(h, params, "base", CFG.heads)
    l_base = base_regress(h_enc, params)
    np.testing.assert_allclose(l_base, fw.l_base, atol=1e-12)
    np.testing.assert_allclose(stack_regress(h_enc, l_base, params, CFG.heads), fw.l_stack, atol=1e-12)


# -- parameters and rounding -------------------------------------------------------


def test_param_shapes_follow_config():
    p = init_params(CFG)
    assert p["stack_proj"].shape == (4, CFG.d)
    assert p["corner_weights"].shape == (4,)
    assert "base.1.wq" in p and "base.2.wq" not in p
    single = init_params(RegressorConfig(d=32, heads=4, ffn=48, layers_base=4, cascade=False))
    assert "stack_proj" not in single and "stack.0.wq" not in single
    assert all(np.isfinite(a).all() for _, a in p.items())
    assert len(p) == sum(int(np.prod(s)) for s in param_shapes(CFG).values())


def test_params_share_flat_buffer():
    p = Params({"a": (2, 2), "b": (3,)})
    p["a"][...] = 1.0
    p["b"] = [1, 2, 3]
    assert p.flat.tolist() == [1, 1, 1, 1, 1, 2, 3]
    with pytest.raises(ValueError):
        Params({"a": (2,)}, np.zeros(3))


@pytest.mark.parametrize("raw,expect", [
    ((0.4, 1.6, 0.1, 0.9), (0, 2, 0, 1)),
    ((1.2, 0.8, 0.0, 0.0), (1, 1, 0, 0)),
    ((-0.4, 0.2, 0.0, 0.0), (0, 0, 0, 0)),
    ((2.5, 3.5, 0.5, -1.5), (3, 4, 1, 1)),
])
def test_rounding(raw, expect):
    assert round_locations(np.array([raw]))[0].as_tuple() == expect


def test_infer_keeps_quads(params):
    g = synth_grid(2, jitter=0.05)
    pred, raw = infer(g, params, CFG)
    assert raw.shape == (len(g.cells), 4)
    assert [c.quad for c in pred.cells] == [c.quad for c in g.cells]
    assert all(c.logical.well_formed for c in pred.cells)
    with pytest.raises(MissingQuad):
        infer(grid((0, 0, 0, 0)), params, CFG)
