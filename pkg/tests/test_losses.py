import numpy as np
import pytest
from hypothesis import given, strategies as st

from logigrid.core import LogicalLocation
from logigrid.regressor import LengthMismatch, loss_inter, loss_intra, loss_log, table_inputs, total_loss
from logigrid.regressor.losses import kink_signature, loss_pieces
from logigrid.transform import adjacency_pairs

from conftest import grid, synth_grid


def _truth(g):
    return np.array([c.logical.as_tuple() for c in g.cells], dtype=float)


def _pairs(g):
    inp = table_inputs(g, 16)
    return inp.pairs_r, inp.pairs_c


def test_pairs_are_cell_positions():
    g = grid((0, 1, 0, 0), (0, 0, 1, 1), (1, 1, 1, 1), quads=True)
    pr, pc = _pairs(g)
    a_r, a_c = adjacency_pairs(g)
    assert sorted(map(tuple, pr.tolist())) == sorted((p.i, p.j) for p in a_r)
    assert sorted(map(tuple, pc.tolist())) == sorted((p.i, p.j) for p in a_c)


@given(st.integers(0, 10**6), st.floats(0, 0.9))
def test_zero_at_truth(seed, span):
    g = synth_grid(seed, rows=(1, 10), cols=(1, 10), span=span, jitter=0.05)
    t = _truth(g)
    pr, pc = _pairs(g)
    assert loss_inter(t, pr, pc) == 0.0
    assert loss_intra(t, g.locations()) == 0.0
    assert total_loss(t, t, t, pr, pc).total == 0.0


def test_printed_row_pairing_is_positive_at_truth():
    # pairing horizontal neighbours by row indices penalises every same-row pair
    t = np.array([[0, 0, 0, 0], [0, 0, 1, 1]], dtype=float)
    j, i = 0, 1
    assert max(t[j, 1] - t[i, 0] + 1, 0) == 1.0
    assert loss_inter(t, [[i, j]], []) == 0.0


def test_inter_direct_formula():
    pred = np.zeros((2, 4))
    pred[1, 3] = 2.3  # c_e of the left cell j=1
    pred[0, 2] = 2.0  # c_s of the right cell i=0
    assert loss_inter(pred, [[0, 1]], []) == pytest.approx(1.3)
    pred[1, 3] = 1.0
    assert loss_inter(pred, [[0, 1]], []) == 0.0


def test_inter_vertical_uses_rows():
    pred = np.zeros((2, 4))
    pred[1, 1] = 1.5  # r_e of the upper cell
    pred[0, 0] = 1.0  # r_s of the lower cell
    assert loss_inter(pred, [], [[0, 1]]) == pytest.approx(1.5)


def test_inter_index_error():
    with pytest.raises(IndexError):
        loss_inter(np.zeros((2, 4)), [[0, 2]], [])


def test_intra_examples():
    gt = [LogicalLocation(0, 1, 0, 0)]
    # predicted row span 2.5: (r_s - r_e) = -1.5 against -1
    assert loss_intra(np.array([[0.0, 1.5, 0, 0]]), gt) == pytest.approx(0.5)
    g = grid((0, 0, 0, 0), (0, 0, 1, 1))
    assert loss_intra(np.random.default_rng(0).normal(size=(2, 4)), g.locations()) == 0.0
    with pytest.raises(LengthMismatch):
        loss_intra(np.zeros((3, 4)), gt)


def test_log_examples():
    gt = np.array([[1.0, 2.0, 3.0, 4.0]])
    assert loss_log(gt + 1, gt, gt) == 4.0
    assert loss_log(gt, gt, gt) == 0.0
    assert loss_log(None, gt + 1, gt) == 4.0
    with pytest.raises(LengthMismatch):
        loss_log(gt, gt, np.zeros((2, 4)))


@given(st.integers(0, 10**6))
def test_log_mean_invariant_under_duplication(seed):
    rng = np.random.default_rng(seed)
    gt = rng.integers(0, 5, size=(4, 4)).astype(float)
    b, s = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    twice = lambda a: np.concatenate([a, a])
    assert loss_log(twice(b), twice(s), twice(gt)) == pytest.approx(loss_log(b, s, gt), rel=1e-12)


@given(st.integers(0, 10**6), st.booleans(), st.booleans())
def test_total_is_sum_of_terms(seed, inter, intra):
    g = synth_grid(seed, span=0.4)
    rng = np.random.default_rng(seed)
    t = _truth(g)
    b, s = t + rng.normal(size=t.shape), t + rng.normal(size=t.shape)
    pr, pc = _pairs(g)
    terms = total_loss(b, s, t, pr, pc, inter, intra)
    expect = loss_log(b, s, t) + inter * loss_inter(s, pr, pc) + intra * loss_intra(s, t)
    assert terms.total == pytest.approx(expect, abs=1e-12)
    assert terms.log == loss_log(b, s, t)
    assert loss_pieces(b, s, t, pr, pc, inter, intra).sum() == pytest.approx(terms.total, abs=1e-12)
    # I2C terms never touch the base output
    assert total_loss(b + 3, s, t, pr, pc, inter, intra).inter == terms.inter


@given(st.integers(0, 10**6))
def test_all_nonnegative(seed):
    g = synth_grid(seed, span=0.4)
    rng = np.random.default_rng(seed)
    t = _truth(g)
    pr, pc = _pairs(g)
    s = rng.normal(scale=3, size=t.shape)
    assert loss_inter(s, pr, pc) >= 0 and loss_intra(s, t) >= 0 and loss_log(s, s, t) >= 0


@given(st.integers(0, 10**6))
def test_loss_gradients_match_finite_differences(seed):
    g = synth_grid(seed, span=0.4)
    rng = np.random.default_rng(seed)
    t = _truth(g)
    pr, pc = _pairs(g)
    b, s = t + rng.normal(size=t.shape), t + rng.normal(size=t.shape)
    _, gb, gs = total_loss(b, s, t, pr, pc, with_grad=True)
    eps = 1e-7
    sig = kink_signature(b, s, t, pr, pc)
    for arr, grad in ((b, gb), (s, gs)):
        for idx in np.ndindex(arr.shape):
            old = arr[idx]
            arr[idx] = old + eps
            up, sig_up = total_loss(b, s, t, pr, pc).total, kink_signature(b, s, t, pr, pc)
            arr[idx] = old - eps
            down, sig_down = total_loss(b, s, t, pr, pc).total, kink_signature(b, s, t, pr, pc)
            arr[idx] = old
            if any((x != y).any() or (x != z).any() for x, y, z in zip(sig, sig_up, sig_down)):
                continue
            assert (up - down) / (2 * eps) == pytest.approx(grad[idx], abs=1e-5)


def test_subgradient_zero_at_truth():
    g = synth_grid(3, span=0.6)
    t = _truth(g)
    _, g_intra = loss_intra(t, t, with_grad=True)
    assert np.all(g_intra == 0)
    _, gb, gs = loss_log(t, t, t, with_grad=True)
    assert np.all(gb == 0) and np.all(gs == 0)
