"""Planning and map metrics.

Displacement error reads the trajectory at the 1/2/3 s horizon indices.
Collision rate tests the planned ego footprint against ground-truth agent
footprints with a separating-axis check; a scene is collided at horizon h
when any step up to h intersects, so rates are monotone in the horizon.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError
from ..geometry import (
    chord_headings,
    rect_corners,
    rects_intersect,
    symmetric_polyline_distance,
)
from ..scene import EGO_LENGTH, EGO_WIDTH
from ..train.matching import hungarian

DE_INDICES = (1, 3, 5)          # 6-point trajectory at 0.5 s steps
AP_THRESHOLDS = (0.5, 1.0, 1.5)  # meters


def displacement_error(pred_ego, gt_ego):
    """(de_1s, de_2s, de_3s, de_avg) in meters."""
    pred = np.asarray(pred_ego, dtype=np.float64)
    gt = np.asarray(gt_ego, dtype=np.float64)
    if pred.shape != gt.shape or pred.shape[0] < DE_INDICES[-1] + 1:
        raise ShapeError(f"trajectory shapes {pred.shape} vs {gt.shape}")
    dist = np.linalg.norm(pred - gt, axis=1)
    de = tuple(float(dist[i]) for i in DE_INDICES)
    return de + (float(np.mean(de)),)


def scene_collision_flags(pred_ego, agents, ego_length=EGO_LENGTH, ego_width=EGO_WIDTH):
    """Collided-by-horizon flags for one scene, against GT agent futures."""
    traj = np.asarray(pred_ego, dtype=np.float64)
    headings = chord_headings(traj)
    hit = np.zeros(len(traj), dtype=bool)
    for t in range(len(traj)):
        ego_rect = rect_corners(traj[t], headings[t], ego_length, ego_width)
        for ag in agents:
            if t >= len(ag.future):
                continue
            agent_rect = rect_corners(ag.future[t, :2], ag.future[t, 2],
                                      ag.length, ag.width)
            if rects_intersect(ego_rect, agent_rect):
                hit[t] = True
                break
        if hit[t]:
            break
    collided = np.maximum.accumulate(hit)
    return tuple(bool(collided[i]) for i in DE_INDICES)


def collision_rate(flags_per_scene):
    """Fractions of scenes collided by 1/2/3 s, plus their mean."""
    arr = np.asarray(flags_per_scene, dtype=np.float64).reshape(-1, len(DE_INDICES))
    cr = tuple(float(v) for v in arr.mean(axis=0))
    return cr + (float(np.mean(cr)),)


@dataclass
class MapPrediction:
    scene: int
    class_id: int
    score: float
    points: np.ndarray


@dataclass
class MapGroundTruth:
    scene: int
    class_id: int
    points: np.ndarray


def chamfer_of_matches(preds, gts):
    """Mean symmetric distance over hungarian-matched (pred, GT) pairs.

    Matching is geometric and per scene; returns None with no pairs at all.
    """
    values = []
    scenes = sorted({g.scene for g in gts} | {p.scene for p in preds})
    for s in scenes:
        ps = [p for p in preds if p.scene == s]
        gs = [g for g in gts if g.scene == s]
        if not ps or not gs:
            continue
        cost = np.array([[symmetric_polyline_distance(p.points, g.points)
                          for g in gs] for p in ps])
        for i, j in hungarian(cost).assignment:
            values.append(cost[i, j])
    return float(np.mean(values)) if values else None


def average_precision(preds, gts, threshold, class_id):
    """Detection AP for one class at one chamfer-distance threshold."""
    gt_pool = [g for g in gts if g.class_id == class_id]
    n_gt = len(gt_pool)
    if n_gt == 0:
        return None
    candidates = sorted((p for p in preds if p.class_id == class_id),
                        key=lambda p: -p.score)
    matched = set()
    tp = np.zeros(len(candidates))
    for k, p in enumerate(candidates):
        best, best_d = None, threshold
        for gi, g in enumerate(gt_pool):
            if gi in matched or g.scene != p.scene:
                continue
            d = symmetric_polyline_distance(p.points, g.points)
            if d < best_d:
                best, best_d = gi, d
        if best is not None:
            matched.add(best)
            tp[k] = 1.0
    if len(candidates) == 0:
        return 0.0
    cum_tp = np.cumsum(tp)
    precision = cum_tp / np.arange(1, len(candidates) + 1)
    recall = cum_tp / n_gt
    # All-point interpolation: make precision monotone from the right.
    for k in range(len(precision) - 2, -1, -1):
        precision[k] = max(precision[k], precision[k + 1])
    ap = 0.0
    prev_r = 0.0
    for p, r in zip(precision, recall):
        ap += p * (r - prev_r)
        prev_r = r
    return float(ap)


def map_metrics(preds, gts, class_count):
    """(mean chamfer over matched pairs or None, AP averaged over classes
    present in GT and the three thresholds)."""
    chamfer = chamfer_of_matches(preds, gts)
    aps = []
    for class_id in range(class_count):
        for threshold in AP_THRESHOLDS:
            ap = average_precision(preds, gts, threshold, class_id)
            if ap is not None:
                aps.append(ap)
    return chamfer, (float(np.mean(aps)) if aps else None)


@dataclass
class MetricsReport:
    de: tuple                 # (1s, 2s, 3s, avg) meters
    cr: tuple                 # (1s, 2s, 3s, avg) fractions
    map_chamfer: float        # meters, or None without matches
    map_ap: float             # or None without GT
    scene_count: int
    detected_agents_mean: float
    fps: float                # scenes per second on this machine

    NOTES = ("CR uses ground-truth agent motion; a scene counts as collided "
             "at horizon h if any step at or before h intersects. FPS is "
             "local scenes/second, not comparable to GPU figures.")

    def to_dict(self):
        return {
            "de": {"1s": self.de[0], "2s": self.de[1], "3s": self.de[2],
                   "avg": self.de[3]},
            "cr": {"1s": self.cr[0], "2s": self.cr[1], "3s": self.cr[2],
                   "avg": self.cr[3]},
            "map_chamfer": self.map_chamfer,
            "map_ap": self.map_ap,
            "scene_count": self.scene_count,
            "detected_agents_mean": self.detected_agents_mean,
            "fps": self.fps,
            "notes": self.NOTES,
        }

    def format_text(self, label="model"):
        lines = [
            f"# {self.NOTES}",
            f"{'':16s}{'L2 (m)':>26s}    {'Collision (%)':>26s}",
            f"{'':16s}{'1s':>6s}{'2s':>6s}{'3s':>6s}{'Avg.':>8s}"
            f"    {'1s':>6s}{'2s':>6s}{'3s':>6s}{'Avg.':>8s}",
            f"{label:16s}"
            + "".join(f"{v:6.2f}" for v in self.de[:3]) + f"{self.de[3]:8.2f}    "
            + "".join(f"{100 * v:6.2f}" for v in self.cr[:3]) + f"{100 * self.cr[3]:8.2f}",
        ]
        chamfer = "n/a" if self.map_chamfer is None else f"{self.map_chamfer:.3f} m"
        ap = "n/a" if self.map_ap is None else f"{self.map_ap:.3f}"
        lines.append(f"map: chamfer {chamfer}   AP@{{0.5,1.0,1.5}} {ap}")
        lines.append(f"scenes: {self.scene_count}   "
                     f"detected agents/scene: {self.detected_agents_mean:.2f}   "
                     f"fps: {self.fps:.2f}")
        return "\n".join(lines)
