"""Configuration dataclasses and their JSON round trip.

Config files are plain JSON whose keys mirror the dataclass field names
exactly, grouped under "model", "scene", and "train" sections (any subset).
"""

import json
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError

COMMANDS = ("left", "straight", "right")
MAP_CLASSES = ("boundary", "divider")


@dataclass(frozen=True)
class ModelConfig:
    """Query counts and transformer dimensions.

    Defaults follow the reference configuration: 100 map instances of 20
    points (2000 composed map queries), 5 trajectory modes of 6 points per
    agent, and 3 ego modes of 6 points.
    """

    map_instances: int = 100       # map instance queries
    map_points: int = 20           # point queries per map instance
    agent_queries: int = 10        # agent query slots (scene agents <= this)
    agent_modes: int = 5           # trajectory modes per agent
    traj_points: int = 6           # points per predicted trajectory
    ego_modes: int = 3             # ego trajectory modes
    ego_points: int = 6            # points per ego trajectory
    d_model: int = 64
    n_heads: int = 4
    n_layers: int = 2
    map_classes: int = 2

    def validate(self):
        for f in fields(self):
            if getattr(self, f.name) < 1:
                raise ConfigError(f"ModelConfig.{f.name} must be >= 1")
        if self.d_model % self.n_heads != 0:
            raise ConfigError(
                f"d_model ({self.d_model}) must be divisible by n_heads ({self.n_heads})")
        return self


@dataclass(frozen=True)
class SceneGenConfig:
    """Geometry and sampling ranges for the synthetic scene generator."""

    forward_range: float = 60.0    # meters ahead of the ego
    backward_range: float = 15.0   # meters behind
    lateral_range: float = 30.0    # meters to each side
    resolution: float = 0.5        # meters per grid cell
    lane_width: float = 3.5
    lane_count_min: int = 2
    lane_count_max: int = 4
    agent_count_min: int = 1
    agent_count_max: int = 6
    # Straight scenes use |curvature| <= straight_max; turning scenes sample
    # |curvature| from [turn_min, turn_max]. The gap keeps command labels
    # away from the 10-degree straight/turn boundary.
    curvature_straight_max: float = 0.004
    curvature_turn_min: float = 0.04
    curvature_turn_max: float = 0.05
    agent_speed_min: float = 4.0
    agent_speed_max: float = 12.0
    agent_lateral_noise: float = 0.3   # constant per-agent offset jitter (m)
    position_noise: float = 0.05       # per-point noise on agent tracks (m)
    history_points: int = 4            # observed samples incl. current pose
    train_scenes: int = 512
    eval_scenes: int = 128

    def validate(self):
        for name in ("forward_range", "backward_range", "lateral_range",
                     "resolution", "lane_width"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"SceneGenConfig.{name} must be positive")
        if not (1 <= self.lane_count_min <= self.lane_count_max):
            raise ConfigError("lane count range invalid")
        if not (0 <= self.agent_count_min <= self.agent_count_max):
            raise ConfigError("agent count range invalid")
        if not (0 <= self.curvature_straight_max < self.curvature_turn_min
                <= self.curvature_turn_max):
            raise ConfigError("curvature ranges must satisfy 0 <= straight < turn_min <= turn_max")
        # Offset curves self-intersect when an offset reaches the turn radius.
        half_width = (self.lane_count_max + 1) * self.lane_width
        if self.curvature_turn_max * half_width >= 1.0:
            raise ConfigError("curvature_turn_max too large: lane offsets would self-intersect")
        if self.history_points < 2:
            raise ConfigError("history_points must be >= 2")
        for name in ("forward_range", "backward_range", "lateral_range"):
            extent = getattr(self, name)
            cells = extent / self.resolution
            if abs(cells - round(cells)) > 1e-9:
                raise ConfigError(f"{name} must be a whole number of cells")
        return self

    @property
    def grid_shape(self):
        h = round((self.forward_range + self.backward_range) / self.resolution)
        w = round(2.0 * self.lateral_range / self.resolution)
        return h, w

    @property
    def x_min(self):
        return -self.backward_range

    @property
    def y_min(self):
        return -self.lateral_range


@dataclass(frozen=True)
class LossWeights:
    map_pts: float = 1.0
    map_cls: float = 0.5
    map_dir: float = 1.0
    pred_pts: float = 1.0
    pred_cls: float = 0.5
    plan_pts: float = 1.0
    plan_dir: float = 1.0
    plan_cls: float = 0.5

    def validate(self):
        vals = [getattr(self, f.name) for f in fields(self)]
        if any(v < 0 for v in vals):
            raise ConfigError("loss weights must be nonnegative")
        if not any(v > 0 for v in vals):
            raise ConfigError("at least one loss weight must be positive")
        return self


@dataclass(frozen=True)
class TrainConfig:
    # The reference learning rate is read as 2e-4; the literal power-of-two
    # reading (2**-4 = 0.0625) remains reachable through this field.
    learning_rate: float = 2e-4
    epochs: int = 10
    batch_size: int = 4
    seed: int = 0
    loss_weights: LossWeights = field(default_factory=LossWeights)
    grad_clip_norm: float = 1.0
    checkpoint_every: int = 10     # epochs between intermediate checkpoints

    def validate(self):
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.grad_clip_norm <= 0:
            raise ConfigError("grad_clip_norm must be > 0")
        if self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be >= 1")
        self.loss_weights.validate()
        return self


def _build(cls, data, name):
    if not isinstance(data, dict):
        raise ConfigError(f"{name} section must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown {name} field(s): {', '.join(sorted(unknown))}")
    if cls is TrainConfig and "loss_weights" in data:
        data = dict(data, loss_weights=_build(LossWeights, data["loss_weights"], "loss_weights"))
    return cls(**data).validate()


def model_config_from_dict(data):
    return _build(ModelConfig, data, "model")


def scene_config_from_dict(data):
    return _build(SceneGenConfig, data, "scene")


def train_config_from_dict(data):
    return _build(TrainConfig, data, "train")


def config_to_dict(cfg):
    return asdict(cfg)


def load_config_file(path):
    """Read a JSON config file with optional model/scene/train sections."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    out = {}
    for key, builder in (("model", model_config_from_dict),
                         ("scene", scene_config_from_dict),
                         ("train", train_config_from_dict)):
        if key in raw:
            out[key] = builder(raw[key])
    unknown = set(raw) - {"model", "scene", "train"}
    if unknown:
        raise ConfigError(f"{path}: unknown section(s): {', '.join(sorted(unknown))}")
    return out
