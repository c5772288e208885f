"""Adam with global gradient-norm clipping."""

import math

import numpy as np

from ..autodiff import grad_or_zeros, zero_grads
from ..errors import TrainingAbort


class Adam:
    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8, clip_norm=1.0):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.clip_norm = clip_norm
        self.t = 0
        self.m = {p.name: np.zeros(p.shape) for p in self.params}
        self.v = {p.name: np.zeros(p.shape) for p in self.params}

    def step(self):
        grads = []
        sq_sum = 0.0
        for p in self.params:
            g = grad_or_zeros(p)
            if not np.isfinite(g).all():
                raise TrainingAbort(f"non-finite gradient in parameter {p.name!r}")
            grads.append(g)
            sq_sum += float((g * g).sum())
        norm = math.sqrt(sq_sum)
        scale = self.clip_norm / norm if (self.clip_norm and norm > self.clip_norm) else 1.0

        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g in zip(self.params, grads):
            if scale != 1.0:
                g = g * scale
            m = self.m[p.name] = self.beta1 * self.m[p.name] + (1.0 - self.beta1) * g
            v = self.v[p.name] = self.beta2 * self.v[p.name] + (1.0 - self.beta2) * (g * g)
            p.values = p.values - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def zero_grad(self):
        zero_grads(self.params)

    def state_arrays(self):
        return {"t": self.t, "m": dict(self.m), "v": dict(self.v)}

    def load_state(self, t, m, v):
        if set(m) != set(self.m) or set(v) != set(self.v):
            raise TrainingAbort("optimizer state does not match the parameter set")
        self.t = int(t)
        for name in self.m:
            self.m[name] = np.asarray(m[name], dtype=np.float64).reshape(self.m[name].shape)
            self.v[name] = np.asarray(v[name], dtype=np.float64).reshape(self.v[name].shape)
