from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .loop import HISTORY_COLUMNS, TrainResult, history_path_for, train
from .losses import (
    TERM_KEYS,
    LossResult,
    bce_with_logits,
    cross_entropy,
    direction_loss,
    map_loss,
    planning_loss,
    prediction_loss,
    resampled_gt_map,
    total_loss,
)
from .matching import MatchResult, hungarian, match_agents, match_map
from .optim import Adam

__all__ = [
    "Adam", "Checkpoint", "HISTORY_COLUMNS", "LossResult", "MatchResult",
    "TERM_KEYS", "TrainResult", "bce_with_logits", "cross_entropy",
    "direction_loss", "history_path_for", "hungarian", "load_checkpoint",
    "map_loss", "match_agents", "match_map", "planning_loss",
    "prediction_loss", "resampled_gt_map", "save_checkpoint", "total_loss",
    "train",
]
