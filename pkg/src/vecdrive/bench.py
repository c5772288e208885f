"""Micro-benchmark comparing the compiled kernels with the numpy fallback."""

import time

import numpy as np

from .backend import compiled, numpy_kernels
from .config import SceneGenConfig
from .model import build_intra_instance_mask
from .scene import generate_scene


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases():
    rng = np.random.default_rng(0)
    mask_self = build_intra_instance_mask(30, 6).allowed  # prediction-style
    logits_self = rng.normal(size=(4, 180, 180))
    logits_cross = rng.normal(size=(4, 100, 720))
    probs_self = numpy_kernels.masked_softmax_fwd(logits_self, mask_self)
    grad = rng.normal(size=probs_self.shape)

    cfg = SceneGenConfig().validate()
    scene = generate_scene(0, cfg)
    pts = np.ascontiguousarray(scene.map_elements[0].points)
    h, w = cfg.grid_shape

    def softmax_masked(k):
        return lambda: k.masked_softmax_fwd(logits_self, mask_self)

    def softmax_plain(k):
        return lambda: k.masked_softmax_fwd(logits_cross, None)

    def softmax_back(k):
        return lambda: k.masked_softmax_bwd(probs_self, grad)

    def stroke(k):
        def run():
            channel = np.zeros((h, w))
            k.paint_polyline(channel, pts, cfg.resolution, cfg.x_min, cfg.y_min)
        return run

    def rect(k):
        corners = np.ascontiguousarray(
            np.array([[2.0, 1.0], [-2.0, 1.0], [-2.0, -1.0], [2.0, -1.0]]) + 5.0)

        def run():
            occ = np.zeros((h, w))
            vx = np.zeros((h, w))
            vy = np.zeros((h, w))
            k.paint_rect(occ, vx, vy, corners, 3.0, 0.5, cfg.resolution,
                         cfg.x_min, cfg.y_min)
        return run

    return [
        ("masked softmax fwd (4,180,180)", softmax_masked),
        ("plain softmax fwd (4,100,720)", softmax_plain),
        ("masked softmax bwd (4,180,180)", softmax_back),
        (f"polyline stroke into {h}x{w}", stroke),
        (f"rect fill into {h}x{w}", rect),
    ]


def run_bench(repeats=20, log=print):
    log(f"{'kernel':34s} {'numpy':>12s} {'compiled':>12s} {'speedup':>9s}")
    for name, make in _cases():
        t_np = _time(make(numpy_kernels), repeats)
        if compiled is not None:
            t_c = _time(make(compiled), repeats)
            log(f"{name:34s} {t_np * 1e6:10.1f}us {t_c * 1e6:10.1f}us {t_np / t_c:8.2f}x")
        else:
            log(f"{name:34s} {t_np * 1e6:10.1f}us {'n/a':>12s} {'n/a':>9s}")
    if compiled is None:
        log("compiled extension not available; showing numpy fallback only")
