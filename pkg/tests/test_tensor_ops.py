"""Forward-value oracles for the autodiff substrate operations."""

import numpy as np
import pytest

from vecdrive.autodiff import (
    Tensor,
    l1_loss,
    layer_norm,
    linear,
    log_softmax,
    masked_softmax,
    matmul,
    softplus,
)
from vecdrive.errors import DegenerateMaskError, ShapeError
from vecdrive.model import build_intra_instance_mask


def test_matmul_identity():
    a = np.array([[3.0, -1.0], [2.0, 5.0]])
    out = matmul(Tensor(np.eye(2)), Tensor(a))
    assert np.array_equal(out.values, a)


def test_matmul_hand_case():
    out = matmul(Tensor([[1.0, 2.0], [3.0, 4.0]]), Tensor([[5.0], [6.0]]))
    assert np.array_equal(out.values, [[17.0], [39.0]])


def test_matmul_against_triple_loop(rng):
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(4, 2))
    expected = np.zeros((3, 2))
    for i in range(3):
        for j in range(2):
            for k in range(4):
                expected[i, j] += a[i, k] * b[k, j]
    out = matmul(Tensor(a), Tensor(b))
    assert np.abs(out.values - expected).max() < 1e-12


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((2, 3))))


def test_masked_softmax_uniform_rows():
    logits = Tensor(np.zeros((1, 4, 4)))
    probs = masked_softmax(logits, np.ones((4, 4), dtype=bool))
    assert np.allclose(probs.values, 0.25)


def test_masked_softmax_half_blocked():
    allowed = np.zeros((1, 4), dtype=bool)
    allowed[0, :2] = True
    probs = masked_softmax(Tensor(np.zeros((1, 4))), allowed)
    assert np.array_equal(probs.values[0, 2:], [0.0, 0.0])
    assert np.allclose(probs.values[0, :2], 0.5)


def test_masked_softmax_matches_restricted_oracle(rng):
    # Oracle: exp-normalize computed over the allowed subset only.
    for _ in range(50):
        n_inst = int(rng.integers(1, 5))
        block = int(rng.integers(1, 5))
        mask = build_intra_instance_mask(n_inst, block)
        q = mask.q
        logits = rng.normal(size=(q, q)) * 3.0
        probs = masked_softmax(Tensor(logits), mask.allowed).values
        for row in range(q):
            cols = np.flatnonzero(mask.allowed[row])
            e = np.exp(logits[row, cols] - logits[row, cols].max())
            expected = e / e.sum()
            assert np.abs(probs[row, cols] - expected).max() < 1e-12
            blocked = np.flatnonzero(~mask.allowed[row])
            assert (probs[row, blocked] == 0.0).all()
            assert abs(probs[row].sum() - 1.0) < 1e-12


def test_masked_softmax_rejects_fully_blocked_row():
    allowed = np.zeros((2, 2), dtype=bool)
    allowed[0, 0] = True
    with pytest.raises(DegenerateMaskError):
        masked_softmax(Tensor(np.zeros((2, 2))), allowed)


def test_layer_norm_constant_input_is_zero():
    x = Tensor(np.full((3, 8), 7.5))
    out = layer_norm(x, Tensor(np.ones(8)), Tensor(np.zeros(8)))
    assert np.abs(out.values).max() < 1e-2  # epsilon floor, not NaN


def test_layer_norm_preserves_unit_variance_pair():
    out = layer_norm(Tensor([[1.0, -1.0]]), Tensor(np.ones(2)), Tensor(np.zeros(2)))
    assert np.allclose(out.values, [[1.0, -1.0]], atol=1e-4)


def test_layer_norm_statistics(rng):
    x = rng.normal(size=(5,)) * 4.0 + 2.0
    out = layer_norm(Tensor(x.reshape(1, 5)), Tensor(np.ones(5)), Tensor(np.zeros(5)))
    v = out.values[0]
    assert abs(v.mean()) < 1e-10
    assert abs(v.var() - 1.0) < 1e-4


def test_linear_identity_and_zero(rng):
    x = rng.normal(size=(4, 3))
    out = linear(Tensor(x), Tensor(np.eye(3)), Tensor(np.zeros(3)))
    assert np.array_equal(out.values, x)
    b = rng.normal(size=5)
    out = linear(Tensor(np.zeros((2, 3))), Tensor(rng.normal(size=(3, 5))), Tensor(b))
    assert np.allclose(out.values, np.broadcast_to(b, (2, 5)))


def test_linear_matches_matmul_plus_broadcast(rng):
    x, w, b = rng.normal(size=(6, 4)), rng.normal(size=(4, 3)), rng.normal(size=3)
    out = linear(Tensor(x), Tensor(w), Tensor(b))
    assert np.abs(out.values - (x @ w + b)).max() < 1e-12


def test_l1_loss_values(rng):
    x = rng.normal(size=(3, 4))
    assert l1_loss(Tensor(x), Tensor(x.copy())).values == 0.0
    assert abs(l1_loss(Tensor(x + 0.5), Tensor(x)).values - 0.5) < 1e-12
    y = rng.normal(size=(3, 4))
    expected = sum(abs(x[i, j] - y[i, j]) for i in range(3) for j in range(4)) / 12
    assert abs(l1_loss(Tensor(x), Tensor(y)).values - expected) < 1e-12


def test_l1_loss_shape_mismatch():
    with pytest.raises(ShapeError):
        l1_loss(Tensor(np.zeros((2, 2))), Tensor(np.zeros((2, 3))))


def test_log_softmax_matches_manual(rng):
    x = rng.normal(size=(4, 6)) * 5.0
    out = log_softmax(Tensor(x)).values
    manual = x - np.log(np.exp(x - x.max(-1, keepdims=True)).sum(-1, keepdims=True)) \
        - x.max(-1, keepdims=True)
    assert np.abs(out - manual).max() < 1e-12


def test_softplus_stable_at_extremes():
    out = softplus(Tensor([-800.0, 0.0, 800.0])).values
    assert out[0] == 0.0
    assert abs(out[1] - np.log(2.0)) < 1e-12
    assert out[2] == 800.0
    assert np.isfinite(out).all()


def test_forward_values_finite_and_deterministic(rng):
    x = rng.normal(size=(7, 7))
    mask = build_intra_instance_mask(1, 7)
    a = masked_softmax(Tensor(x), mask.allowed).values
    b = masked_softmax(Tensor(x.copy()), mask.allowed).values
    assert np.isfinite(a).all()
    assert a.tobytes() == b.tobytes()
