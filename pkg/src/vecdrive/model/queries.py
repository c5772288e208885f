"""Hierarchical query composition and intra-instance attention masks.

Composed queries are the pairwise sum of an instance embedding and a shared
point embedding (plus a mode embedding for motion queries), laid out
instance-major. The matching attention mask is block-diagonal: two query
rows may attend to each other exactly when they describe the same instance.
"""

from dataclasses import dataclass

import numpy as np

from ..autodiff import Tensor, add, reshape
from ..errors import ShapeError


@dataclass(frozen=True)
class IntraInstanceMask:
    """Boolean (q, q) matrix; True means attention is permitted."""

    allowed: np.ndarray
    n_instances: int
    block_size: int

    @property
    def q(self):
        return self.allowed.shape[0]


def build_intra_instance_mask(n_instances, block_size) -> IntraInstanceMask:
    """Block-diagonal mask: rows i, j allowed iff i // block == j // block."""
    if n_instances < 1 or block_size < 1:
        raise ShapeError("mask needs n_instances >= 1 and block_size >= 1")
    block = np.arange(n_instances * block_size) // block_size
    return IntraInstanceMask(allowed=block[:, None] == block[None, :],
                             n_instances=n_instances, block_size=block_size)


def mask_for_prediction(cfg, n_agents) -> IntraInstanceMask:
    """One block per (agent, mode) trajectory: modes do not exchange."""
    return build_intra_instance_mask(n_agents * cfg.agent_modes, cfg.traj_points)


def mask_for_planning(cfg) -> IntraInstanceMask:
    return build_intra_instance_mask(cfg.ego_modes, cfg.ego_points)


def mask_for_perception(cfg) -> IntraInstanceMask:
    return build_intra_instance_mask(cfg.map_instances, cfg.map_points)


def all_allowed_mask(mask: IntraInstanceMask) -> IntraInstanceMask:
    """The plain-attention counterpart of a mask (ablation arm)."""
    return IntraInstanceMask(allowed=np.ones_like(mask.allowed),
                             n_instances=1, block_size=mask.q)


def compose_queries(instance_emb: Tensor, point_emb: Tensor) -> Tensor:
    """Row (i * p + j) = instance_emb[i] + point_emb[j]."""
    if instance_emb.shape[-1] != point_emb.shape[-1]:
        raise ShapeError(
            f"embedding widths differ: {instance_emb.shape} vs {point_emb.shape}")
    n, d = instance_emb.shape
    p = point_emb.shape[0]
    out = add(reshape(instance_emb, (n, 1, d)), reshape(point_emb, (1, p, d)))
    return reshape(out, (n * p, d))


def compose_motion_queries(agent_emb: Tensor, mode_emb: Tensor,
                           point_emb: Tensor) -> Tensor:
    """Row (o*M*P + m*P + t) = agent_emb[o] + mode_emb[m] + point_emb[t]."""
    if not (agent_emb.shape[-1] == mode_emb.shape[-1] == point_emb.shape[-1]):
        raise ShapeError("embedding widths differ across the three tables")
    n_o, d = agent_emb.shape
    n_m = mode_emb.shape[0]
    n_p = point_emb.shape[0]
    out = add(add(reshape(agent_emb, (n_o, 1, 1, d)),
                  reshape(mode_emb, (1, n_m, 1, d))),
              reshape(point_emb, (1, 1, n_p, d)))
    return reshape(out, (n_o * n_m * n_p, d))
