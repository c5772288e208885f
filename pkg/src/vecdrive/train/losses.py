"""The loss stack: point L1 terms, classification terms, direction constraint.

Every public loss returns a LossResult carrying the weighted scalar Tensor
(graph-attached) plus a breakdown of raw, unweighted term values for
logging. Matching and winner-mode selection run on detached numpy values;
the losses themselves are piecewise smooth in the parameters.
"""

from dataclasses import dataclass, field

import numpy as np

from ..autodiff import (
    Tensor,
    gather_rows,
    l1_loss,
    log_softmax,
    mean,
    mul,
    reshape,
    softplus,
    sqrt_,
    sum_,
)
from ..config import MAP_CLASSES, LossWeights
from ..geometry import resample_polyline
from ..scene import command_index
from .matching import MatchResult, match_agents, match_map

TERM_KEYS = ("map_pts", "map_cls", "map_dir", "pred_pts", "pred_cls",
             "pred_exist", "plan_pts", "plan_dir", "plan_cls")


@dataclass
class LossResult:
    total: Tensor
    terms: dict = field(default_factory=dict)

    def value(self):
        return float(self.total.values)


def _zero():
    return Tensor(np.zeros(()))


def cross_entropy(logits, targets):
    """Mean cross-entropy of integer targets against row logits."""
    targets = np.asarray(targets, dtype=int)
    onehot = np.zeros(logits.shape)
    onehot[np.arange(len(targets)), targets] = 1.0
    return mul(sum_(mul(log_softmax(logits), Tensor(onehot))), -1.0 / len(targets))


def bce_with_logits(logits, targets):
    """Mean binary cross-entropy: softplus(x) - x * t, numerically stable."""
    t = Tensor(np.asarray(targets, dtype=np.float64))
    return mean(softplus(logits) - mul(logits, t))


def direction_loss(pred, gt):
    """Mean over consecutive edges of (1 - cos(pred edge, gt edge)).

    Zero-length edges (on either side) contribute exactly 0 instead of NaN;
    the guard also keeps the sqrt gradient finite at those edges.
    """
    gt = np.asarray(gt, dtype=np.float64)
    p = pred.shape[0]
    hi = np.arange(1, p)
    lo = np.arange(0, p - 1)
    pred_edges = gather_rows(pred, hi) - gather_rows(pred, lo)
    gt_edges = np.diff(gt, axis=0)
    gt_norm = np.linalg.norm(gt_edges, axis=1)
    pred_sq = sum_(mul(pred_edges, pred_edges), axis=1)
    live = (pred_sq.values > 0.0) & (gt_norm > 0.0)
    # Dead edges get a denominator of exactly 1 and a zero weight.
    pred_norm = sqrt_(pred_sq + Tensor(1.0 - live))
    dot = sum_(mul(pred_edges, Tensor(gt_edges)), axis=1)
    cosine = dot / (pred_norm * Tensor(np.where(live, gt_norm, 1.0)))
    per_edge = mul(1.0 - cosine, Tensor(live.astype(np.float64)))
    return mean(per_edge)


def resampled_gt_map(scene, n_points):
    """GT polylines resampled by arc length, plus integer class ids."""
    points = [resample_polyline(el.points, n_points) for el in scene.map_elements]
    classes = [MAP_CLASSES.index(el.class_id) for el in scene.map_elements]
    if not points:
        return np.zeros((0, n_points, 2)), np.zeros((0,), dtype=int)
    return np.stack(points), np.asarray(classes, dtype=int)


def map_loss(map_points, map_class_logits, gt_points, gt_classes,
             match: MatchResult, weights: LossWeights) -> LossResult:
    """Matched point L1 + instance cross-entropy (no-object for unmatched)
    + direction constraint over matched pairs."""
    n_inst, n_pts, _ = map_points.shape
    no_object = map_class_logits.shape[1] - 1

    cls_targets = np.full(n_inst, no_object, dtype=int)
    pts_term = _zero()
    dir_term = _zero()
    if match.assignment:
        pred_idx = np.array([i for i, _ in match.assignment])
        targets = np.stack([
            gt_points[j][::-1] if rev else gt_points[j]
            for (_, j), rev in zip(match.assignment, match.reversed_flags)])
        matched = reshape(gather_rows(reshape(map_points, (n_inst, n_pts * 2)), pred_idx),
                          (len(pred_idx), n_pts, 2))
        pts_term = l1_loss(matched, Tensor(targets))
        per_pair = [direction_loss(
            reshape(gather_rows(reshape(map_points, (n_inst, n_pts * 2)), [i]), (n_pts, 2)),
            targets[k]) for k, (i, _) in enumerate(match.assignment)]
        acc = per_pair[0]
        for term in per_pair[1:]:
            acc = acc + term
        dir_term = mul(acc, 1.0 / len(per_pair))
        for (i, j) in match.assignment:
            cls_targets[i] = gt_classes[j]
    cls_term = cross_entropy(map_class_logits, cls_targets)

    total = (mul(pts_term, weights.map_pts) + mul(cls_term, weights.map_cls)
             + mul(dir_term, weights.map_dir))
    return LossResult(total, {"map_pts": float(pts_term.values),
                              "map_cls": float(cls_term.values),
                              "map_dir": float(dir_term.values)})


def prediction_loss(agent_trajectories, agent_mode_logits, existence_logits,
                    scene, weights: LossWeights) -> LossResult:
    """Winner-take-all trajectory L1, mode cross-entropy on the winner, and
    existence BCE over every agent query slot."""
    n_slots = existence_logits.shape[0]
    exist_targets = np.zeros(n_slots)
    match = match_agents(scene)

    pts_term = _zero()
    cls_term = _zero()
    if match.assignment:
        n, n_modes, n_pts, _ = agent_trajectories.shape
        flat = reshape(agent_trajectories, (n * n_modes, n_pts * 2))
        winners = []
        slot_rows = []
        targets = []
        for slot, g in match.assignment:
            exist_targets[slot] = 1.0
            gt_future = scene.agents[g].future[:, :2]
            per_mode = np.abs(agent_trajectories.values[slot] - gt_future).mean(axis=(1, 2))
            k = int(per_mode.argmin())
            winners.append(k)
            slot_rows.append(slot * n_modes + k)
            targets.append(gt_future)
        sel = reshape(gather_rows(flat, np.array(slot_rows)),
                      (len(slot_rows), n_pts, 2))
        pts_term = l1_loss(sel, Tensor(np.stack(targets)))
        slot_idx = np.array([slot for slot, _ in match.assignment])
        cls_term = cross_entropy(gather_rows(agent_mode_logits, slot_idx),
                                 np.array(winners))
    exist_term = bce_with_logits(existence_logits, exist_targets)

    total = (mul(pts_term, weights.pred_pts) + mul(cls_term, weights.pred_cls)
             + mul(exist_term, weights.pred_cls))
    return LossResult(total, {"pred_pts": float(pts_term.values),
                              "pred_cls": float(cls_term.values),
                              "pred_exist": float(exist_term.values)})


def planning_loss(ego_trajectories, ego_mode_logits, scene,
                  weights: LossWeights) -> LossResult:
    """Point L1 and direction constraint on the commanded mode, plus mode
    cross-entropy targeting the command index."""
    n_modes, n_pts, _ = ego_trajectories.shape
    mode = command_index(scene.command) % n_modes
    sel = reshape(gather_rows(reshape(ego_trajectories, (n_modes, n_pts * 2)), [mode]),
                  (n_pts, 2))
    pts_term = l1_loss(sel, Tensor(scene.ego_future))
    dir_term = direction_loss(sel, scene.ego_future)
    cls_term = cross_entropy(reshape(ego_mode_logits, (1, n_modes)), [mode])

    total = (mul(pts_term, weights.plan_pts) + mul(dir_term, weights.plan_dir)
             + mul(cls_term, weights.plan_cls))
    return LossResult(total, {"plan_pts": float(pts_term.values),
                              "plan_dir": float(dir_term.values),
                              "plan_cls": float(cls_term.values)})


def total_loss(output, scene, weights: LossWeights, class_cost_weight=1.0) -> LossResult:
    """Weighted sum of the three module losses with a full term breakdown."""
    n_map_pts = output.map_points.shape[1]
    gt_points, gt_classes = resampled_gt_map(scene, n_map_pts)
    probs = softmax_np(output.map_class_logits.values)
    match = match_map(output.map_points.values, probs, gt_points, gt_classes,
                      class_cost_weight)
    m = map_loss(output.map_points, output.map_class_logits,
                 gt_points, gt_classes, match, weights)
    p = prediction_loss(output.agent_trajectories, output.agent_mode_logits,
                        output.agent_existence_logits, scene, weights)
    e = planning_loss(output.ego_trajectories, output.ego_mode_logits, scene, weights)
    terms = {**m.terms, **p.terms, **e.terms}
    return LossResult(m.total + p.total + e.total, terms)


def softmax_np(logits):
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)
