"""Checkpoint files: a single JSON container with exact float64 round trip.

Holds the schema version, model/train configuration, ablation toggles, step
and epoch counters, every named parameter as shape + row-major values, and
the optimizer moment buffers. Serialized floats use repr, so loading
reproduces training state bit for bit.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from ..config import (
    ModelConfig,
    TrainConfig,
    model_config_from_dict,
    train_config_from_dict,
)
from ..errors import ParseError, VersionError
from ..model import AblationToggles, DrivingModel
from .optim import Adam

SCHEMA_NAME = "vecdrive-checkpoint"
SCHEMA_VERSION = 1


@dataclass
class Checkpoint:
    model_config: ModelConfig
    train_config: TrainConfig
    toggles: AblationToggles
    epoch: int
    step: int
    params: dict
    adam_t: int
    adam_m: dict
    adam_v: dict

    def build_model(self) -> DrivingModel:
        model = DrivingModel(self.model_config, seed=self.train_config.seed,
                             toggles=self.toggles)
        model.load_state(self.params)
        return model

    def build_optimizer(self, model) -> Adam:
        opt = Adam(model.parameters(), lr=self.train_config.learning_rate,
                   clip_norm=self.train_config.grad_clip_norm)
        opt.load_state(self.adam_t, self.adam_m, self.adam_v)
        return opt


def _pack(arrays):
    return {name: {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}
            for name, arr in arrays.items()}


def _unpack(packed):
    out = {}
    for name, rec in packed.items():
        out[name] = np.asarray(rec["data"], dtype=np.float64).reshape(rec["shape"])
    return out


def save_checkpoint(path, model, train_cfg, optimizer, epoch):
    state = optimizer.state_arrays()
    payload = {
        "schema": SCHEMA_NAME,
        "version": SCHEMA_VERSION,
        "model_config": asdict(model.cfg),
        "train_config": asdict(train_cfg),
        "toggles": asdict(model.toggles),
        "epoch": epoch,
        "step": optimizer.t,
        "params": _pack(model.state_arrays()),
        "adam": {"t": state["t"], "m": _pack(state["m"]), "v": _pack(state["v"])},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_checkpoint(path) -> Checkpoint:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid checkpoint file ({exc.msg})") from exc
    if payload.get("schema") != SCHEMA_NAME:
        raise ParseError(f"not a {SCHEMA_NAME} file")
    if payload.get("version") != SCHEMA_VERSION:
        raise VersionError(f"unsupported checkpoint version {payload.get('version')!r}")
    return Checkpoint(
        model_config=model_config_from_dict(payload["model_config"]),
        train_config=train_config_from_dict(payload["train_config"]),
        toggles=AblationToggles(**payload["toggles"]),
        epoch=int(payload["epoch"]),
        step=int(payload["step"]),
        params=_unpack(payload["params"]),
        adam_t=int(payload["adam"]["t"]),
        adam_m=_unpack(payload["adam"]["m"]),
        adam_v=_unpack(payload["adam"]["v"]),
    )
