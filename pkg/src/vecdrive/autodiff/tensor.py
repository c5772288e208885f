"""Reverse-mode autodiff over dense float64 arrays.

A Tensor wraps a numpy array plus an optional record of how it was produced
(parent tensors and a vector-Jacobian closure). ``backward`` walks the tape
in reverse topological order and accumulates gradients into the ``grad``
buffer of every leaf that requires them. Gradients accumulate across
backward calls until the caller resets them.

Everything is float64: the gradient checks compare against central finite
differences at step 1e-5, which needs the headroom.
"""

from __future__ import annotations

import math

import numpy as np

from ..backend import masked_softmax_bwd, masked_softmax_fwd
from ..errors import DegenerateMaskError, ShapeError

LAYER_NORM_EPS = 1e-5


class Tensor:
    __slots__ = ("values", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, values, requires_grad=False):
        arr = np.asarray(values, dtype=np.float64)
        self.values = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._vjp = None

    @property
    def shape(self):
        return self.values.shape

    @property
    def ndim(self):
        return self.values.ndim

    def detach(self):
        return Tensor(self.values)

    def item(self):
        return float(self.values)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], (tuple, list)) else shape)

    def transpose(self, axes):
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def __add__(self, other):
        return add(self, _lift(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __mul__(self, other):
        return mul(self, _lift(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __rtruediv__(self, other):
        return div(_lift(other), self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return neg(self)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.values.shape}{flag})"


class Parameter(Tensor):
    """A leaf tensor with a dotted-path name, always differentiable."""

    __slots__ = ("name",)

    def __init__(self, values, name):
        super().__init__(values, requires_grad=True)
        self.name = name

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.values.shape})"


def _lift(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _from_op(values, parents, vjp):
    out = Tensor(values, requires_grad=any(p.requires_grad for p in parents))
    if out.requires_grad:
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _unbroadcast(g, shape):
    # Sum a gradient back down to the pre-broadcast shape.
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# arithmetic


def add(a, b):
    a, b = _lift(a), _lift(b)
    need_a, need_b = a.requires_grad, b.requires_grad

    def vjp(g):
        return (_unbroadcast(g, a.shape) if need_a else None,
                _unbroadcast(g, b.shape) if need_b else None)

    return _from_op(a.values + b.values, (a, b), vjp)


def neg(a):
    return _from_op(-a.values, (a,), lambda g: (-g,))


def mul(a, b):
    a, b = _lift(a), _lift(b)
    need_a, need_b = a.requires_grad, b.requires_grad

    def vjp(g):
        return (_unbroadcast(g * b.values, a.shape) if need_a else None,
                _unbroadcast(g * a.values, b.shape) if need_b else None)

    return _from_op(a.values * b.values, (a, b), vjp)


def div(a, b):
    a, b = _lift(a), _lift(b)

    def vjp(g):
        return (_unbroadcast(g / b.values, a.shape),
                _unbroadcast(-g * a.values / (b.values * b.values), b.shape))

    return _from_op(a.values / b.values, (a, b), vjp)


def matmul(a, b):
    """Batched matrix product with numpy broadcasting over batch dims."""
    a, b = _lift(a), _lift(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs rank >= 2 operands, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dims disagree: {a.shape} @ {b.shape}")
    need_a, need_b = a.requires_grad, b.requires_grad

    def vjp(g):
        ga = _unbroadcast(g @ np.swapaxes(b.values, -1, -2), a.shape) if need_a else None
        gb = _unbroadcast(np.swapaxes(a.values, -1, -2) @ g, b.shape) if need_b else None
        return ga, gb

    return _from_op(a.values @ b.values, (a, b), vjp)


def relu(a):
    def vjp(g):
        return (g * (a.values > 0.0),)

    return _from_op(np.maximum(a.values, 0.0), (a,), vjp)


def sqrt_(a):
    out_values = np.sqrt(a.values)

    def vjp(g):
        return (g * (0.5 / out_values),)

    return _from_op(out_values, (a,), vjp)


def softplus(a):
    """log(1 + e^x), computed without overflow."""

    def vjp(g):
        with np.errstate(over="ignore"):
            sig = 1.0 / (1.0 + np.exp(-a.values))
        return (g * sig,)

    return _from_op(np.logaddexp(0.0, a.values), (a,), vjp)


# ---------------------------------------------------------------------------
# structure


def reshape(a, shape):
    old = a.shape

    def vjp(g):
        return (g.reshape(old),)

    return _from_op(a.values.reshape(shape), (a,), vjp)


def transpose(a, axes):
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))

    def vjp(g):
        return (g.transpose(inverse),)

    return _from_op(a.values.transpose(axes), (a,), vjp)


def sum_(a, axis=None, keepdims=False):
    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).copy(),)
        g_exp = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g_exp, a.shape).copy(),)

    return _from_op(a.values.sum(axis=axis, keepdims=keepdims), (a,), vjp)


def mean(a, axis=None, keepdims=False):
    if axis is None:
        count = a.values.size
    elif isinstance(axis, tuple):
        count = math.prod(a.shape[i] for i in axis)
    else:
        count = a.shape[axis]
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / count)


def cumsum(a, axis):
    def vjp(g):
        return (np.flip(np.cumsum(np.flip(g, axis), axis=axis), axis),)

    return _from_op(np.cumsum(a.values, axis=axis), (a,), vjp)


def gather_rows(a, indices):
    """Select rows along axis 0; duplicates accumulate in the backward."""
    idx = np.asarray(indices, dtype=np.intp)

    def vjp(g):
        out = np.zeros(a.shape)
        np.add.at(out, idx, g)
        return (out,)

    return _from_op(a.values[idx], (a,), vjp)


# ---------------------------------------------------------------------------
# neural-net primitives


def linear(x, w, b=None):
    """x @ w + b over the last axis."""
    x, w = _lift(x), _lift(w)
    if x.ndim < 2:
        raise ShapeError("linear expects at least a 2-D input")
    if x.shape[-1] != w.shape[0]:
        raise ShapeError(f"linear: input width {x.shape} does not match weight {w.shape}")
    out = matmul(x, w)
    if b is not None:
        if b.shape != (w.shape[1],):
            raise ShapeError(f"linear: bias {b.shape} does not match weight {w.shape}")
        out = add(out, b)
    return out


def masked_softmax(logits, allowed=None):
    """Softmax over the last axis restricted to ``allowed`` positions.

    allowed: bool array of shape logits.shape[-2:], or None. Blocked
    positions get probability exactly 0.0 and gradient exactly 0.0; each
    row of allowed entries sums to 1. A fully blocked row raises
    DegenerateMaskError.
    """
    logits = _lift(logits)
    if logits.ndim < 2:
        raise ShapeError(f"masked_softmax needs rank >= 2 logits, got {logits.shape}")
    if allowed is not None:
        allowed = np.asarray(allowed, dtype=bool)
        if allowed.shape != logits.shape[-2:]:
            raise ShapeError(
                f"mask {allowed.shape} does not match logits {logits.shape}")
        if not allowed.any(axis=-1).all():
            raise DegenerateMaskError("mask blocks every key for at least one query row")

    q, k = logits.shape[-2:]
    flat = np.ascontiguousarray(logits.values.reshape(-1, q, k))
    probs = masked_softmax_fwd(flat, allowed).reshape(logits.shape)

    def vjp(g):
        g3 = np.ascontiguousarray(g.reshape(-1, q, k))
        p3 = np.ascontiguousarray(probs.reshape(-1, q, k))
        return (masked_softmax_bwd(p3, g3).reshape(logits.shape),)

    return _from_op(probs, (logits,), vjp)


def log_softmax(logits):
    logits = _lift(logits)
    shifted = logits.values - logits.values.max(axis=-1, keepdims=True)
    out_values = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))

    def vjp(g):
        return (g - np.exp(out_values) * g.sum(axis=-1, keepdims=True),)

    return _from_op(out_values, (logits,), vjp)


def layer_norm(x, gain, bias, eps=LAYER_NORM_EPS):
    """Normalize the last axis to zero mean / unit variance, then affine."""
    x, gain, bias = _lift(x), _lift(gain), _lift(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer_norm: gain/bias must be ({d},), got {gain.shape}/{bias.shape}")
    mu = x.values.mean(axis=-1, keepdims=True)
    centered = x.values - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv

    def vjp(g):
        lead = tuple(range(g.ndim - 1))
        d_gain = (g * xhat).sum(axis=lead)
        d_bias = g.sum(axis=lead)
        d_xhat = g * gain.values
        d_x = inv * (d_xhat
                     - d_xhat.mean(axis=-1, keepdims=True)
                     - xhat * (d_xhat * xhat).mean(axis=-1, keepdims=True))
        return d_x, d_gain, d_bias

    return _from_op(xhat * gain.values + bias.values, (x, gain, bias), vjp)


def l1_loss(pred, target):
    """Mean absolute difference; the subgradient at exact ties is 0."""
    pred, target = _lift(pred), _lift(target)
    if pred.shape != target.shape:
        raise ShapeError(f"l1_loss shapes differ: {pred.shape} vs {target.shape}")
    diff = pred.values - target.values
    n = diff.size

    def vjp(g):
        s = np.sign(diff) * (g / n)
        return s, -s

    return _from_op(np.abs(diff).mean(), (pred, target), vjp)


# ---------------------------------------------------------------------------
# backward pass


def backward(loss):
    """Accumulate d(loss)/d(leaf) into ``grad`` of every reachable leaf.

    ``loss`` must be a scalar (shape ()). Repeated calls without resetting
    grads accumulate, which is what gradient accumulation over a batch wants.
    """
    if loss.values.shape != ():
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.values.shape}")
    if not loss.requires_grad:
        return

    topo = []
    state = {}  # id -> 0 discovered, 1 finished
    stack = [loss]
    while stack:
        node = stack[-1]
        nid = id(node)
        if state.get(nid) == 0:
            state[nid] = 1
            topo.append(node)
            stack.pop()
            continue
        if nid in state:
            stack.pop()
            continue
        state[nid] = 0
        for p in node._parents:
            if p.requires_grad and id(p) not in state:
                stack.append(p)

    grads = {id(loss): np.ones(())}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._vjp is None:
            node.grad = g.copy() if node.grad is None else node.grad + g
            continue
        parent_grads = node._vjp(g)
        for parent, pg in zip(node._parents, parent_grads):
            if pg is None or not parent.requires_grad:
                continue
            pid = id(parent)
            if pid in grads:
                grads[pid] = grads[pid] + pg
            else:
                grads[pid] = pg


def grad_or_zeros(t):
    """The accumulated gradient of a leaf, or zeros when unreachable."""
    return t.grad if t.grad is not None else np.zeros(t.shape)


def zero_grads(tensors):
    for t in tensors:
        t.grad = None


def init_normal(rng, shape, std):
    return rng.normal(0.0, std, size=shape)


def he_scale(fan_in):
    return 1.0 / math.sqrt(fan_in)
