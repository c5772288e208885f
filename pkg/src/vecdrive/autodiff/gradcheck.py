"""Finite-difference validation of the analytic gradients."""

from dataclasses import dataclass

import numpy as np

from ..errors import DeterminismError, ShapeError
from .tensor import backward, grad_or_zeros, zero_grads


@dataclass
class GradCheckEntry:
    name: str
    max_rel_error: float

    def line(self, tolerance):
        status = "ok" if self.max_rel_error <= tolerance else "FAIL"
        return f"{status:4s} {self.name:56s} max_rel_err={self.max_rel_error:.3e}"


@dataclass
class GradCheckReport:
    entries: list
    step: float
    tolerance: float

    @property
    def max_rel_error(self):
        return max((e.max_rel_error for e in self.entries), default=0.0)

    @property
    def passed(self):
        return all(e.max_rel_error <= self.tolerance for e in self.entries)

    def format(self):
        lines = [e.line(self.tolerance) for e in self.entries]
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict}: {len(self.entries)} parameter(s), "
                     f"tolerance {self.tolerance:g}, step {self.step:g}")
        return "\n".join(lines)


def grad_check(model_fn, params, step=1e-5, tolerance=1e-4):
    """Compare analytic gradients of ``model_fn()`` to central differences.

    ``model_fn`` must be a deterministic closure over ``params`` returning a
    scalar Tensor; determinism is enforced by evaluating it twice. The
    relative error denominator is max(|analytic|, |numeric|, 1e-8) per
    element.
    """
    if not (0.0 < step <= 1e-2):
        raise ShapeError(f"step must lie in (0, 1e-2], got {step}")
    params = list(params)

    first = model_fn()
    if first.values.shape != ():
        raise ShapeError("grad_check expects a scalar-valued model_fn")
    second = model_fn()
    if first.values.tobytes() != second.values.tobytes():
        raise DeterminismError("model_fn returned different values on repeated evaluation")

    zero_grads(params)
    backward(second)
    analytic = [grad_or_zeros(p).copy() for p in params]
    zero_grads(params)

    entries = []
    for p, a in zip(params, analytic):
        numeric = np.zeros(p.shape)
        flat = p.values.reshape(-1)
        num_flat = numeric.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            hi = model_fn().item()
            flat[i] = orig - step
            lo = model_fn().item()
            flat[i] = orig
            num_flat[i] = (hi - lo) / (2.0 * step)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(numeric)), 1e-8)
        rel = np.abs(a - numeric) / denom
        entries.append(GradCheckEntry(getattr(p, "name", "tensor"), float(rel.max())))
    return GradCheckReport(entries, step, tolerance)
