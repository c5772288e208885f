"""Bipartite assignment between predictions and ground truth."""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class MatchResult:
    assignment: list       # (prediction index, ground-truth index) pairs
    reversed_flags: list   # per pair: True when the GT point order was reversed
    total_cost: float


def hungarian(cost) -> MatchResult:
    """Minimum-total-cost injective assignment of min(n, m) pairs."""
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError(f"cost must be a matrix, got shape {cost.shape}")
    if np.isnan(cost).any():
        raise ValueError("cost matrix contains NaN")
    if cost.size == 0:
        return MatchResult([], [], 0.0)
    rows, cols = linear_sum_assignment(cost)
    pairs = list(zip(rows.tolist(), cols.tolist()))
    return MatchResult(pairs, [False] * len(pairs), float(cost[rows, cols].sum()))


def match_map(pred_points, class_probs, gt_points, gt_classes,
              class_cost_weight=1.0) -> MatchResult:
    """Assign predicted map elements to (resampled) GT polylines.

    Pairwise cost is the orientation-minimal mean point L1 distance plus
    class_cost_weight * (1 - predicted probability of the GT class). GT
    polylines must already be resampled to the prediction's point count.
    Predictions left unmatched are the no-object set.
    """
    pred_points = np.asarray(pred_points, dtype=np.float64)
    gt_points = np.asarray(gt_points, dtype=np.float64)
    n_pred = pred_points.shape[0]
    n_gt = gt_points.shape[0]
    if n_gt == 0:
        return MatchResult([], [], 0.0)
    fwd = np.abs(pred_points[:, None] - gt_points[None, :]).mean(axis=(2, 3))
    rev = np.abs(pred_points[:, None] - gt_points[None, :, ::-1]).mean(axis=(2, 3))
    geo = np.minimum(fwd, rev)
    use_rev = rev < fwd
    cls = 1.0 - np.asarray(class_probs)[:, np.asarray(gt_classes, dtype=int)]
    result = hungarian(geo + class_cost_weight * cls)
    result.reversed_flags = [bool(use_rev[i, j]) for i, j in result.assignment]
    return result


def match_agents(scene) -> MatchResult:
    """Assign GT agents to agent query slots by last-observed-position L1.

    Slot anchors equal the agents' last observed positions, so the optimal
    assignment is the identity in practice; the solver keeps the contract
    honest for hand-built scenes.
    """
    n = len(scene.agents)
    if n == 0:
        return MatchResult([], [], 0.0)
    positions = np.array([ag.position for ag in scene.agents])
    cost = np.abs(positions[None, :, :] - positions[:, None, :]).sum(axis=2)
    return hungarian(cost)
