"""Ablation matrix runner: one train + evaluate per toggle row."""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..config import (
    ModelConfig,
    TrainConfig,
    model_config_from_dict,
    train_config_from_dict,
)
from ..errors import ConfigError, VecdriveError
from ..model import AblationToggles
from ..scene import Dataset
from ..train import train
from .evaluate import evaluate_model

TOGGLE_FIELDS = ("perception_intra", "prediction_intra", "planning_intra",
                 "masked_self_attention")


@dataclass
class AblationSpec:
    toggles: AblationToggles
    seed: int

    @property
    def name(self):
        bits = "".join("1" if getattr(self.toggles, f) else "0" for f in TOGGLE_FIELDS)
        return f"toggles{bits}_seed{self.seed}"


def load_matrix_file(path):
    """Matrix files: {"rows": [{toggle: bool, ...}], "seeds": [int, ...],
    optional "train": {...}, optional "model": {...}}."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    rows = raw.get("rows")
    if not isinstance(rows, list) or not rows:
        raise ConfigError(f"{path}: 'rows' must be a non-empty list")
    seeds = raw.get("seeds", [0])
    specs = []
    for row in rows:
        unknown = set(row) - set(TOGGLE_FIELDS)
        if unknown:
            raise ConfigError(f"{path}: unknown toggle(s) {sorted(unknown)}")
        for seed in seeds:
            specs.append(AblationSpec(AblationToggles(**row), int(seed)))
    train_cfg = train_config_from_dict(raw["train"]) if "train" in raw else TrainConfig()
    model_cfg = model_config_from_dict(raw["model"]) if "model" in raw else ModelConfig()
    return specs, train_cfg, model_cfg


def run_ablation(train_dataset: Dataset, eval_dataset: Dataset, specs,
                 train_cfg: TrainConfig, model_cfg: ModelConfig, out_dir,
                 log=None):
    """Train and evaluate every spec; a failed run marks only its own row."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for spec in specs:
        row = {f: getattr(spec.toggles, f) for f in TOGGLE_FIELDS}
        row["seed"] = spec.seed
        try:
            cfg = TrainConfig(**{**asdict(train_cfg), "seed": spec.seed,
                                 "loss_weights": train_cfg.loss_weights})
            result = train(train_dataset, cfg, model_cfg,
                           out_dir / f"{spec.name}.ckpt.json",
                           toggles=spec.toggles, log=log)
            report = evaluate_model(result.model, eval_dataset)
            row.update({"status": "ok", "report": report.to_dict()})
        except VecdriveError as exc:
            row.update({"status": "failed", "error": str(exc)})
        rows.append(row)
        if log is not None:
            label = row.get("report", {}).get("de", {}).get("avg", "failed")
            log(f"{spec.name}: avg DE = {label}")
    with open(out_dir / "ablation.json", "w") as fh:
        json.dump(rows, fh, indent=2)
    with open(out_dir / "ablation.txt", "w") as fh:
        fh.write(format_table(rows) + "\n")
    return rows


def format_table(rows):
    header = (f"{'perc':>5s}{'pred':>5s}{'plan':>5s}{'mask':>5s}{'seed':>5s}"
              f"  {'1s':>6s}{'2s':>6s}{'3s':>6s}{'Avg.':>6s}"
              f"  {'1s%':>6s}{'2s%':>6s}{'3s%':>6s}{'Avg%':>6s}")
    lines = [header]
    for row in rows:
        cells = "".join(f"{'x' if row[f] else '-':>5s}" for f in TOGGLE_FIELDS)
        cells += f"{row['seed']:5d}"
        if row["status"] != "ok":
            lines.append(cells + "  FAILED: " + row.get("error", "?"))
            continue
        de = row["report"]["de"]
        cr = row["report"]["cr"]
        cells += "  " + "".join(f"{de[k]:6.2f}" for k in ("1s", "2s", "3s", "avg"))
        cells += "  " + "".join(f"{100 * cr[k]:6.2f}" for k in ("1s", "2s", "3s", "avg"))
        lines.append(cells)
    return "\n".join(lines)
