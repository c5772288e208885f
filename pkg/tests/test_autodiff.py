"""Backward-pass semantics and the finite-difference harness."""

import numpy as np
import pytest

from vecdrive.autodiff import (
    Parameter,
    Tensor,
    backward,
    grad_check,
    grad_or_zeros,
    l1_loss,
    linear,
    masked_softmax,
    matmul,
    mul,
    relu,
    sum_,
    zero_grads,
)
from vecdrive.errors import DeterminismError, ShapeError
from vecdrive.model import build_intra_instance_mask


def test_backward_of_sum_is_ones():
    w = Parameter(np.arange(6.0).reshape(2, 3), "w")
    backward(sum_(w))
    assert np.array_equal(w.grad, np.ones((2, 3)))


def test_unreachable_parameter_gets_zero():
    w = Parameter(np.ones((2, 2)), "w")
    p = Parameter(np.ones(3), "unused")
    backward(sum_(mul(w, 2.0)))
    assert np.array_equal(grad_or_zeros(p), np.zeros(3))
    assert p.grad is None


def test_grad_accumulates_until_reset():
    w = Parameter(np.ones(4), "w")
    loss = sum_(mul(w, 3.0))
    backward(loss)
    backward(loss)
    assert np.allclose(w.grad, 6.0)
    zero_grads([w])
    assert w.grad is None


def test_backward_rejects_non_scalar():
    w = Parameter(np.ones(3), "w")
    with pytest.raises(ShapeError):
        backward(mul(w, 1.0))


def test_two_layer_network_matches_finite_differences(rng):
    w1 = Parameter(rng.normal(size=(4, 8)) * 0.5, "w1")
    b1 = Parameter(rng.normal(size=8) * 0.1, "b1")
    w2 = Parameter(rng.normal(size=(8, 2)) * 0.5, "w2")
    x = Tensor(rng.normal(size=(5, 4)))
    target = Tensor(rng.normal(size=(5, 2)))

    def fn():
        return l1_loss(matmul(relu(linear(x, w1, b1)), w2), target)

    report = grad_check(fn, [w1, b1, w2], step=1e-5, tolerance=1e-4)
    assert report.passed, report.format()


def test_masked_softmax_blocked_gradients_exactly_zero(rng):
    mask = build_intra_instance_mask(3, 4)
    logits = Parameter(rng.normal(size=(mask.q, mask.q)), "logits")
    probs = masked_softmax(logits, mask.allowed)
    backward(sum_(mul(probs, Tensor(rng.normal(size=probs.shape)))))
    assert (logits.grad[~mask.allowed] == 0.0).all()
    assert np.abs(logits.grad[mask.allowed]).max() > 0.0


def test_grad_check_over_many_seeds():
    # Gradient fidelity across >= 20 seeds for a mixed computation.
    for seed in range(22):
        r = np.random.default_rng(seed)
        w = Parameter(r.normal(size=(3, 5)), "w")
        mask = build_intra_instance_mask(1, 5)
        coeff = Tensor(r.normal(size=(3, 5)))

        def fn():
            return sum_(mul(masked_softmax(w, mask.allowed), coeff))

        report = grad_check(fn, [w], step=1e-5, tolerance=1e-4)
        assert report.passed, f"seed {seed}: {report.format()}"


def test_grad_check_detects_nondeterminism():
    w = Parameter(np.ones(2), "w")
    state = {"n": 0}

    def fn():
        state["n"] += 1
        return sum_(mul(w, float(state["n"])))

    with pytest.raises(DeterminismError):
        grad_check(fn, [w])


def test_grad_check_rejects_bad_step():
    w = Parameter(np.ones(2), "w")
    with pytest.raises(ShapeError):
        grad_check(lambda: sum_(w), [w], step=0.5)
