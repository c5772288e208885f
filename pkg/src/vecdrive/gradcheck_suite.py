"""The gradient-check battery behind ``vecdrive gradcheck``.

Three tiers: every substrate operation in isolation, one full decoder layer,
and the total loss of a small end-to-end model on a generated scene. The
model tier runs at a looser tolerance because thousands of chained float64
operations accumulate roundoff against the finite-difference probe.
"""

import numpy as np

from .autodiff import (
    Parameter,
    Tensor,
    cumsum,
    div,
    gather_rows,
    grad_check,
    l1_loss,
    layer_norm,
    linear,
    log_softmax,
    masked_softmax,
    matmul,
    mean,
    mul,
    relu,
    reshape,
    softplus,
    sqrt_,
    sum_,
    transpose,
)
from .config import ModelConfig, SceneGenConfig, TrainConfig
from .model import DrivingModel, ParamRegistry, build_intra_instance_mask
from .model.attention import cross_attention_block, feed_forward_block, self_attention_block
from .scene import generate_scene, rasterize_bev
from .train.losses import total_loss

TOY_MODEL_CONFIG = ModelConfig(
    map_instances=3, map_points=4, agent_queries=2, agent_modes=2,
    traj_points=3, ego_modes=2, ego_points=3, d_model=16, n_heads=2, n_layers=1)

TOY_SCENE_CONFIG = SceneGenConfig(
    forward_range=24.0, backward_range=8.0, lateral_range=16.0, resolution=4.0,
    lane_count_min=2, lane_count_max=2, agent_count_min=1, agent_count_max=2)


def _param(rng, name, shape, scale=1.0, offset=0.0):
    return Parameter(rng.normal(0.0, scale, size=shape) + offset, name)


def substrate_op_checks(step=1e-5, tolerance=1e-4, seed=0):
    """One (name, GradCheckReport) pair per substrate operation."""
    rng = np.random.default_rng(seed)
    probe = {
        "matmul": lambda a=_param(rng, "a", (3, 4)), b=_param(rng, "b", (4, 2)):
            ((a, b), lambda: sum_(mul(matmul(a, b), Tensor(rng_const((3, 2)))))),
        "masked_softmax": lambda x=_param(rng, "logits", (2, 6, 6)):
            ((x,), lambda: sum_(mul(
                masked_softmax(x, build_intra_instance_mask(2, 3).allowed),
                Tensor(rng_const((2, 6, 6)))))),
        "layer_norm": lambda x=_param(rng, "x", (4, 5)), g=_param(rng, "gain", (5,), 0.3, 1.0),
                b=_param(rng, "bias", (5,), 0.3):
            ((x, g, b), lambda: sum_(mul(layer_norm(x, g, b), Tensor(rng_const((4, 5)))))),
        "linear": lambda x=_param(rng, "x", (3, 4)), w=_param(rng, "w", (4, 2)),
                b=_param(rng, "b", (2,)):
            ((x, w, b), lambda: sum_(mul(linear(x, w, b), Tensor(rng_const((3, 2)))))),
        "l1_loss": lambda x=_param(rng, "pred", (4, 3)):
            ((x,), lambda: l1_loss(x, Tensor(rng_const((4, 3))))),
        "add_mul_div": lambda a=_param(rng, "a", (3, 4), 1.0, 3.0), b=_param(rng, "b", (4,), 0.2, 2.0):
            ((a, b), lambda: sum_(mul(div(a, b), Tensor(rng_const((3, 4)))))),
        "relu": lambda x=Parameter(rng.choice([-1.0, 1.0], (4, 4)) * (0.5 + rng.random((4, 4))), "x"):
            ((x,), lambda: sum_(mul(relu(x), Tensor(rng_const((4, 4)))))),
        "sqrt": lambda x=_param(rng, "x", (5,), 0.5, 3.0):
            ((x,), lambda: sum_(mul(sqrt_(x), Tensor(rng_const((5,)))))),
        "softplus": lambda x=_param(rng, "x", (6,)):
            ((x,), lambda: sum_(mul(softplus(x), Tensor(rng_const((6,)))))),
        "log_softmax": lambda x=_param(rng, "x", (3, 5)):
            ((x,), lambda: sum_(mul(log_softmax(x), Tensor(rng_const((3, 5)))))),
        "cumsum": lambda x=_param(rng, "x", (3, 4)):
            ((x,), lambda: sum_(mul(cumsum(x, axis=1), Tensor(rng_const((3, 4)))))),
        "gather_rows": lambda x=_param(rng, "x", (5, 3)):
            ((x,), lambda: sum_(mul(gather_rows(x, [4, 0, 0, 2]), Tensor(rng_const((4, 3)))))),
        "reshape_transpose": lambda x=_param(rng, "x", (3, 4)):
            ((x,), lambda: sum_(mul(transpose(reshape(x, (2, 2, 3)), (2, 0, 1)),
                                    Tensor(rng_const((3, 2, 2)))))),
        "mean": lambda x=_param(rng, "x", (4, 5)):
            ((x,), lambda: sum_(mul(mean(x, axis=1), Tensor(rng_const((4,)))))),
    }
    results = []
    for name, build in probe.items():
        params, fn = build()
        results.append((name, grad_check(fn, params, step=step, tolerance=tolerance)))
    return results


def rng_const(shape, seed=1234):
    return np.random.default_rng(seed).normal(size=shape)


def decoder_layer_check(step=1e-5, tolerance=1e-4, seed=0):
    """cross-attention -> masked self-attention -> feed-forward, one layer."""
    d, heads = 16, 2
    reg = ParamRegistry(seed)
    layer = reg.decoder_layer("layer", d)
    rng = np.random.default_rng(seed + 1)
    x = Parameter(rng.normal(0.0, 1.0, (6, d)), "queries")
    context = Tensor(rng.normal(0.0, 1.0, (10, d)))
    mask = build_intra_instance_mask(2, 3)
    weights = Tensor(rng.normal(size=(6, d)))

    def fn():
        h = cross_attention_block(x, context, layer.cross, layer.norm_cross, heads)
        h = self_attention_block(h, layer.self_attn, layer.norm_self, heads, mask)
        h = feed_forward_block(h, layer.ff, layer.norm_ff)
        return sum_(mul(h, weights))

    params = [x] + list(reg.params.values())
    return grad_check(fn, params, step=step, tolerance=tolerance)


def toy_model_check(step=1e-5, tolerance=1e-3, seed=0, scene_seed=3):
    """Finite differences through the whole model + loss stack."""
    model = DrivingModel(TOY_MODEL_CONFIG, seed=seed)
    scene = generate_scene(scene_seed, TOY_SCENE_CONFIG)
    bev = rasterize_bev(scene, TOY_SCENE_CONFIG)
    weights = TrainConfig().loss_weights

    def fn():
        output = model.forward_scene(scene, TOY_SCENE_CONFIG, bev=bev)
        return total_loss(output, scene, weights).total

    return grad_check(fn, model.parameters(), step=step, tolerance=tolerance)


def run_suite(op_tolerance=1e-4, model_tolerance=1e-3, step=1e-5, log=print):
    """Full battery; returns True when every tier passes."""
    ok = True
    for name, report in substrate_op_checks(step=step, tolerance=op_tolerance):
        status = "ok" if report.passed else "FAIL"
        log(f"[{status}] op {name:24s} max_rel_err={report.max_rel_error:.3e}")
        ok = ok and report.passed
    layer_report = decoder_layer_check(step=step, tolerance=op_tolerance)
    status = "ok" if layer_report.passed else "FAIL"
    log(f"[{status}] decoder layer             max_rel_err={layer_report.max_rel_error:.3e}")
    ok = ok and layer_report.passed
    model_report = toy_model_check(step=step, tolerance=model_tolerance)
    status = "ok" if model_report.passed else "FAIL"
    log(f"[{status}] full toy model loss       max_rel_err={model_report.max_rel_error:.3e}")
    ok = ok and model_report.passed
    return ok
