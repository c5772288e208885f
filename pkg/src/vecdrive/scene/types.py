"""Vectorized scene containers and their invariant checks."""

from dataclasses import dataclass, field

import numpy as np

from ..config import COMMANDS, MAP_CLASSES, SceneGenConfig
from ..geometry import net_heading_change

STRAIGHT_LIMIT_RAD = np.deg2rad(10.0)
MAX_AGENT_SPEED = 25.0  # m/s, plausibility bound enforced by the generator
TIMESTEP = 0.5          # s between trajectory points
EGO_LENGTH = 4.0
EGO_WIDTH = 1.8


@dataclass
class Polyline:
    points: np.ndarray          # (P, 2) meters, ego frame (x forward, y left)
    class_id: str               # one of MAP_CLASSES


@dataclass
class AgentTrack:
    length: float
    width: float
    history: np.ndarray         # (H, 3) of (x, y, heading), 0.5 s steps, last = now
    future: np.ndarray          # (F, 3), 0.5 s steps from t=0.5 s

    @property
    def position(self):
        return self.history[-1, :2]

    @property
    def velocity(self):
        return (self.history[-1, :2] - self.history[-2, :2]) / TIMESTEP


@dataclass
class VectorScene:
    map_elements: list
    agents: list
    ego_future: np.ndarray      # (6, 2), points at t = 0.5 .. 3.0 s
    command: str                # left | straight | right
    seed: int


@dataclass
class BevGrid:
    """Rasterized scene features: (H, W, C) with channels
    (boundary occupancy, divider occupancy, agent occupancy, vel_x, vel_y)."""

    data: np.ndarray
    resolution: float
    x_min: float
    y_min: float

    CHANNELS = tuple(MAP_CLASSES) + ("agent", "vel_x", "vel_y")

    @property
    def tokens(self):
        """Flattened (H*W, C) view for the attention context."""
        h, w, c = self.data.shape
        return self.data.reshape(h * w, c)


def command_index(command):
    return COMMANDS.index(command)


def in_range(xy, cfg: SceneGenConfig, margin=0.0):
    x, y = xy
    return (cfg.x_min + margin <= x <= cfg.forward_range - margin
            and abs(y) <= cfg.lateral_range - margin)


def validate_scene(scene: VectorScene, cfg: SceneGenConfig, traj_points=6):
    """All structural invariants of a scene; returns a list of violations."""
    problems = []
    for i, el in enumerate(scene.map_elements):
        pts = np.asarray(el.points)
        if el.class_id not in MAP_CLASSES:
            problems.append(f"map[{i}]: unknown class {el.class_id!r}")
        if len(pts) < 2:
            problems.append(f"map[{i}]: fewer than 2 points")
            continue
        steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if steps.min(initial=np.inf) <= 1e-6:
            problems.append(f"map[{i}]: repeated consecutive points")
        if not all(in_range(p, cfg) for p in pts):
            problems.append(f"map[{i}]: point outside perception range")
    if len(scene.agents) > cfg.agent_count_max:
        problems.append(f"too many agents: {len(scene.agents)}")
    for i, ag in enumerate(scene.agents):
        if ag.future.shape[0] != traj_points:
            problems.append(f"agent[{i}]: future has {ag.future.shape[0]} points")
        speeds = np.linalg.norm(np.diff(ag.future[:, :2], axis=0), axis=1) / TIMESTEP
        if speeds.max(initial=0.0) > MAX_AGENT_SPEED:
            problems.append(f"agent[{i}]: speed {speeds.max():.1f} m/s exceeds bound")
        if not in_range(ag.position, cfg):
            problems.append(f"agent[{i}]: current position outside range")
    if scene.ego_future.shape != (traj_points, 2):
        problems.append(f"ego_future shape {scene.ego_future.shape}")
    if np.linalg.norm(scene.ego_future[0]) > 0.5:
        problems.append("ego_future starts farther than 0.5 m from the origin")
    if scene.command not in COMMANDS:
        problems.append(f"unknown command {scene.command!r}")
    else:
        change = net_heading_change(scene.ego_future)
        if scene.command == "straight":
            if abs(change) >= STRAIGHT_LIMIT_RAD:
                problems.append(f"straight command with {np.rad2deg(change):.1f} deg change")
        elif scene.command == "left":
            if change <= 0:
                problems.append("left command with non-positive heading change")
        elif change >= 0:
            problems.append("right command with non-negative heading change")
    return problems
