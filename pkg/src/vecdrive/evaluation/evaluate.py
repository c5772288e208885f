"""Dataset-level evaluation of a model (or the GT pass-through oracle)."""

import hashlib
import json
import time
from dataclasses import asdict, dataclass

import numpy as np

from .. import __version__
from ..autodiff import Tensor
from ..config import ModelConfig
from ..errors import ConfigError
from ..model import ModelOutput
from ..scene import Dataset, command_index, read_dataset
from ..train.checkpoint import load_checkpoint
from ..train.losses import resampled_gt_map, softmax_np
from .metrics import (
    MapGroundTruth,
    MapPrediction,
    MetricsReport,
    collision_rate,
    displacement_error,
    map_metrics,
    scene_collision_flags,
)

EXISTENCE_THRESHOLD = 0.5
CLASS_SCORE_THRESHOLD = 0.5


@dataclass
class RunManifest:
    model_config: dict
    dataset_path: str
    dataset_sha256: str
    checkpoint_path: str
    seed: int
    code_version: str
    wall_clock_s: float


class OracleModel:
    """Heads bypassed: emits the ground truth of every scene.

    Useful as the evaluation fixed point; displacement error must come out
    exactly 0 and collision rate equals the dataset's intrinsic GT rate.
    """

    def __init__(self, cfg: ModelConfig):
        self.cfg = cfg

    def forward_scene(self, scene, scene_cfg, bev=None) -> ModelOutput:
        cfg = self.cfg
        gt_points, gt_classes = resampled_gt_map(scene, cfg.map_points)
        n_map = min(len(gt_points), cfg.map_instances)
        map_pts = np.zeros((cfg.map_instances, cfg.map_points, 2))
        map_pts[:n_map] = gt_points[:n_map]
        map_cls = np.zeros((cfg.map_instances, cfg.map_classes + 1))
        map_cls[:, cfg.map_classes] = 10.0
        for i in range(n_map):
            map_cls[i] = 0.0
            map_cls[i, gt_classes[i]] = 10.0

        n = len(scene.agents)
        traj = np.zeros((n, cfg.agent_modes, cfg.traj_points, 2))
        for i, ag in enumerate(scene.agents):
            traj[i, :] = ag.future[:, :2]
        exist = np.full(cfg.agent_queries, -10.0)
        exist[:n] = 10.0

        ego = np.broadcast_to(scene.ego_future, (cfg.ego_modes,) + scene.ego_future.shape).copy()
        ego_logits = np.zeros(cfg.ego_modes)
        ego_logits[command_index(scene.command) % cfg.ego_modes] = 10.0
        return ModelOutput(
            map_points=Tensor(map_pts), map_class_logits=Tensor(map_cls),
            agent_trajectories=Tensor(traj),
            agent_mode_logits=Tensor(np.zeros((n, cfg.agent_modes))),
            agent_existence_logits=Tensor(exist),
            ego_trajectories=Tensor(ego), ego_mode_logits=Tensor(ego_logits))


def check_compatible(model_cfg: ModelConfig, dataset: Dataset):
    if model_cfg.traj_points != 6 or model_cfg.ego_points != 6:
        raise ConfigError("evaluation expects 6-point trajectories (0.5 s steps over 3 s)")
    if dataset.config.agent_count_max > model_cfg.agent_queries:
        raise ConfigError(
            f"dataset allows {dataset.config.agent_count_max} agents but the model "
            f"has only {model_cfg.agent_queries} agent query slots")
    if len(dataset.scenes) < 1:
        raise ConfigError("evaluation needs at least one scene")


def evaluate_model(model, dataset: Dataset) -> MetricsReport:
    """Pure function of (model parameters, dataset); scene order is fixed."""
    check_compatible(model.cfg, dataset)
    cfg = model.cfg
    de_rows = []
    collision_rows = []
    detected = []
    preds = []
    gts = []
    t0 = time.perf_counter()
    for si, scene in enumerate(dataset.scenes):
        out = model.forward_scene(scene, dataset.config)
        mode = command_index(scene.command) % cfg.ego_modes
        pred_ego = out.ego_trajectories.values[mode]
        de_rows.append(displacement_error(pred_ego, scene.ego_future))
        collision_rows.append(scene_collision_flags(pred_ego, scene.agents))
        exist_prob = 1.0 / (1.0 + np.exp(-out.agent_existence_logits.values))
        detected.append(float((exist_prob >= EXISTENCE_THRESHOLD).sum()))
        probs = softmax_np(out.map_class_logits.values)
        real = probs[:, :cfg.map_classes]
        for i in range(cfg.map_instances):
            score = float(real[i].max())
            if score >= CLASS_SCORE_THRESHOLD:
                preds.append(MapPrediction(scene=si, class_id=int(real[i].argmax()),
                                           score=score,
                                           points=out.map_points.values[i]))
        for el, cls in zip(*_gt_elements(scene, cfg.map_points)):
            gts.append(MapGroundTruth(scene=si, class_id=cls, points=el))
    wall = time.perf_counter() - t0

    de = np.asarray(de_rows).mean(axis=0)
    de = (float(de[0]), float(de[1]), float(de[2]), float(np.mean(de[:3])))
    cr = collision_rate(collision_rows)
    chamfer, ap = map_metrics(preds, gts, cfg.map_classes)
    return MetricsReport(
        de=de, cr=cr, map_chamfer=chamfer, map_ap=ap,
        scene_count=len(dataset.scenes),
        detected_agents_mean=float(np.mean(detected)),
        fps=len(dataset.scenes) / wall if wall > 0 else float("inf"))


def _gt_elements(scene, n_points):
    pts, classes = resampled_gt_map(scene, n_points)
    return list(pts), [int(c) for c in classes]


def sha256_of(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def evaluate_checkpoint(checkpoint_path, dataset_path, report_path=None):
    """CLI-level evaluation: returns (report, manifest), optionally writing
    a JSON report (with manifest) plus an aligned-text rendering."""
    ckpt = load_checkpoint(checkpoint_path)
    dataset = read_dataset(dataset_path)
    model = ckpt.build_model()
    t0 = time.perf_counter()
    report = evaluate_model(model, dataset)
    manifest = RunManifest(
        model_config=asdict(ckpt.model_config),
        dataset_path=str(dataset_path),
        dataset_sha256=sha256_of(dataset_path),
        checkpoint_path=str(checkpoint_path),
        seed=ckpt.train_config.seed,
        code_version=__version__,
        wall_clock_s=time.perf_counter() - t0)
    if report_path is not None:
        with open(report_path, "w") as fh:
            json.dump({"report": report.to_dict(), "manifest": asdict(manifest)},
                      fh, indent=2)
        with open(str(report_path) + ".txt", "w") as fh:
            fh.write(report.format_text() + "\n")
    return report, manifest
