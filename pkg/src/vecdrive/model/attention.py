"""Multi-head attention blocks built on the autodiff substrate.

All blocks are pre-norm residual: x + sublayer(norm(x)). The masked
self-attention block is the intra-instance operator: with a block-diagonal
mask, output rows of one instance depend only on input rows of the same
instance, bit for bit.
"""

import math
from dataclasses import dataclass

from ..autodiff import (
    Parameter,
    layer_norm,
    linear,
    masked_softmax,
    matmul,
    mul,
    relu,
    reshape,
    transpose,
)
from ..errors import ShapeError


@dataclass
class AttnParams:
    w_q: Parameter
    b_q: Parameter
    w_k: Parameter
    b_k: Parameter
    w_v: Parameter
    b_v: Parameter
    w_o: Parameter
    b_o: Parameter


@dataclass
class NormParams:
    gain: Parameter
    bias: Parameter


@dataclass
class FFParams:
    w1: Parameter
    b1: Parameter
    w2: Parameter
    b2: Parameter


def norm(x, p: NormParams):
    return layer_norm(x, p.gain, p.bias)


def attention_core(x_q, x_kv, p: AttnParams, n_heads, mask=None, batch=1):
    """Scaled dot-product multi-head attention without residual/norm.

    Inputs are flattened over the batch: x_q is (batch * nq, d) and x_kv is
    (batch * nk, d); the scale 1/sqrt(d_head) is folded into the query
    projection. mask (an IntraInstanceMask) restricts attention to
    same-instance pairs; None means unrestricted.

    A block-diagonal mask is realized structurally: scores are computed per
    instance block only, which is exactly equivalent to a dense masked
    softmax (blocked pairs get probability 0 and exchange no gradient) and
    makes cross-instance independence hold bit for bit.
    """
    q = linear(x_q, p.w_q, p.b_q)
    k = linear(x_kv, p.w_k, p.b_k)
    v = linear(x_kv, p.w_v, p.b_v)
    d = q.shape[-1]
    nq = q.shape[0] // batch
    nk = k.shape[0] // batch
    dh = d // n_heads
    q = mul(q, 1.0 / math.sqrt(dh))
    if mask is None:
        qh = transpose(reshape(q, (batch, nq, n_heads, dh)), (0, 2, 1, 3))
        kh = transpose(reshape(k, (batch, nk, n_heads, dh)), (0, 2, 3, 1))
        vh = transpose(reshape(v, (batch, nk, n_heads, dh)), (0, 2, 1, 3))
        probs = masked_softmax(matmul(qh, kh))
        ctx = reshape(transpose(matmul(probs, vh), (0, 2, 1, 3)), (batch * nq, d))
    else:
        nb, bs = mask.n_instances, mask.block_size
        if nq != nk or nb * bs != nq:
            raise ShapeError(
                f"mask ({nb} x {bs}) does not tile {nq} self-attention queries")
        qh = transpose(reshape(q, (batch, nb, bs, n_heads, dh)), (0, 1, 3, 2, 4))
        kh = transpose(reshape(k, (batch, nb, bs, n_heads, dh)), (0, 1, 3, 4, 2))
        vh = transpose(reshape(v, (batch, nb, bs, n_heads, dh)), (0, 1, 3, 2, 4))
        probs = masked_softmax(matmul(qh, kh))
        ctx = reshape(transpose(matmul(probs, vh), (0, 1, 3, 2, 4)), (batch * nq, d))
    return linear(ctx, p.w_o, p.b_o)


def self_attention_block(x, p: AttnParams, norm_p: NormParams, n_heads,
                         mask=None, batch=1):
    """Intra-instance (or plain, when mask is None) self-attention sublayer."""
    h = norm(x, norm_p)
    return x + attention_core(h, h, p, n_heads, mask, batch)


def cross_attention_block(x, context, p: AttnParams, norm_p: NormParams,
                          n_heads, batch=1):
    return x + attention_core(norm(x, norm_p), context, p, n_heads, None, batch)


def feed_forward_block(x, p: FFParams, norm_p: NormParams):
    h = relu(linear(norm(x, norm_p), p.w1, p.b1))
    return x + linear(h, p.w2, p.b2)
