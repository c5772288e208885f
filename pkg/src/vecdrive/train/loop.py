"""End-to-end training loop with deterministic shuffling and checkpointing.

Scene order within an epoch comes from a generator seeded by (seed, epoch),
so a resumed run replays exactly the order the uninterrupted run would have
used. Gradients accumulate over a batch (scaled by 1/batch) before a single
Adam step. Rasterized BEV grids are pure functions of the scene and get
cached across epochs.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ..autodiff import backward, mul
from ..config import ModelConfig, TrainConfig
from ..errors import TrainingAbort
from ..model import AblationToggles, DrivingModel
from ..scene import Dataset, rasterize_bev
from .checkpoint import load_checkpoint, save_checkpoint
from .losses import TERM_KEYS, total_loss
from .optim import Adam

HISTORY_COLUMNS = ("epoch", "total") + TERM_KEYS


@dataclass
class TrainResult:
    checkpoint_path: str
    history: list
    history_path: str
    model: DrivingModel


def history_path_for(checkpoint_path):
    return str(checkpoint_path) + ".history.csv"


def write_history(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(HISTORY_COLUMNS)
        for row in rows:
            writer.writerow([row[c] for c in HISTORY_COLUMNS])


def train(dataset: Dataset, train_cfg: TrainConfig, model_cfg: ModelConfig,
          out_path, toggles=None, resume_from=None, log=None) -> TrainResult:
    train_cfg.validate()
    model_cfg.validate()
    scenes = dataset.scenes
    if not scenes:
        raise TrainingAbort("dataset is empty")

    if resume_from is not None:
        ckpt = load_checkpoint(resume_from)
        model = ckpt.build_model()
        optimizer = ckpt.build_optimizer(model)
        start_epoch = ckpt.epoch
    else:
        model = DrivingModel(model_cfg, seed=train_cfg.seed,
                             toggles=toggles if toggles is not None else AblationToggles())
        optimizer = Adam(model.parameters(), lr=train_cfg.learning_rate,
                         clip_norm=train_cfg.grad_clip_norm)
        start_epoch = 0

    bev_cache = [None] * len(scenes)
    history = []
    for epoch in range(start_epoch, train_cfg.epochs):
        order = np.random.default_rng([train_cfg.seed, epoch]).permutation(len(scenes))
        sums = {key: 0.0 for key in HISTORY_COLUMNS if key != "epoch"}
        for lo in range(0, len(order), train_cfg.batch_size):
            chunk = [int(i) for i in order[lo:lo + train_cfg.batch_size]]
            for idx in chunk:
                if bev_cache[idx] is None:
                    bev_cache[idx] = rasterize_bev(scenes[idx], dataset.config)
            batch_out = model.forward_batch([scenes[i] for i in chunk], dataset.config,
                                            bevs=[bev_cache[i] for i in chunk])
            batch_total = None
            for k, idx in enumerate(chunk):
                loss = total_loss(batch_out.scene_output(k), scenes[idx],
                                  train_cfg.loss_weights)
                if not math.isfinite(loss.value()):
                    raise TrainingAbort(
                        f"non-finite loss at epoch {epoch}, scene seed {scenes[idx].seed}")
                batch_total = loss.total if batch_total is None else batch_total + loss.total
                sums["total"] += loss.value()
                for key in TERM_KEYS:
                    sums[key] += loss.terms[key]
            backward(mul(batch_total, 1.0 / len(chunk)))
            optimizer.step()
            optimizer.zero_grad()
        row = {"epoch": epoch + 1}
        row.update({key: sums[key] / len(order) for key in sums})
        history.append(row)
        if log is not None:
            log(f"epoch {row['epoch']:4d}  total {row['total']:.4f}")
        if ((epoch + 1) % train_cfg.checkpoint_every == 0
                or epoch + 1 == train_cfg.epochs):
            save_checkpoint(out_path, model, train_cfg, optimizer, epoch + 1)
            write_history(history_path_for(out_path), history)
    return TrainResult(checkpoint_path=str(out_path), history=history,
                       history_path=history_path_for(out_path), model=model)
