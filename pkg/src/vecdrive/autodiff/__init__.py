from .gradcheck import GradCheckReport, grad_check
from .tensor import (
    LAYER_NORM_EPS,
    Parameter,
    Tensor,
    add,
    backward,
    cumsum,
    div,
    gather_rows,
    grad_or_zeros,
    l1_loss,
    layer_norm,
    linear,
    log_softmax,
    masked_softmax,
    matmul,
    mean,
    mul,
    neg,
    relu,
    reshape,
    softplus,
    sqrt_,
    sum_,
    transpose,
    zero_grads,
)

__all__ = [
    "LAYER_NORM_EPS", "Parameter", "Tensor", "add", "backward", "cumsum",
    "div", "gather_rows", "grad_or_zeros", "l1_loss", "layer_norm", "linear",
    "log_softmax", "masked_softmax", "matmul", "mean", "mul", "neg", "relu",
    "reshape", "softplus", "sqrt_", "sum_", "transpose", "zero_grads",
    "GradCheckReport", "grad_check",
]
