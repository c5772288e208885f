"""Synthetic scene generator.

Each scene is a constant-curvature road corridor in the ego frame. Lane
edge lines become the map elements, agents follow lane centerlines at
constant speed, and the ego pulls away from near-standstill along its own
lane, which keeps the first plan point within half a meter of the origin
while still producing clearly commanded maneuvers.

Everything is a pure function of (seed, config): one Generator object,
draws in a fixed order.
"""

import math

import numpy as np

from ..config import SceneGenConfig
from ..geometry import net_heading_change
from .types import (
    STRAIGHT_LIMIT_RAD,
    TIMESTEP,
    AgentTrack,
    Polyline,
    VectorScene,
    in_range,
)

TRAJ_POINTS = 6
FUTURE_TIMES = TIMESTEP * np.arange(1, TRAJ_POINTS + 1)
SAME_LANE_GAP = 12.0      # m, min arc-length spacing of same-lane agents
EGO_LANE_CLEARANCE = 15.0  # m, agents in the ego lane spawn at least this far ahead


class _Road:
    """Constant-curvature corridor; arc length 0 is the ego position."""

    def __init__(self, curvature):
        self.curvature = curvature

    def heading(self, s):
        return self.curvature * np.asarray(s, dtype=np.float64)

    def point(self, s, offset=0.0):
        s = np.asarray(s, dtype=np.float64)
        k = self.curvature
        if abs(k) < 1e-12:
            x, y = s, np.zeros_like(s)
        else:
            x = np.sin(k * s) / k
            y = (1.0 - np.cos(k * s)) / k
        theta = self.heading(s)
        return np.stack([x - offset * np.sin(theta),
                         y + offset * np.cos(theta)], axis=-1)


def _clip_line(road, offset, cfg):
    """Sample a lane-edge line at 1 m arc steps, keep the in-range run around s=0."""
    s = np.arange(-(cfg.backward_range + 5.0), cfg.forward_range + 25.0, 1.0)
    pts = road.point(s, offset)
    ok = np.array([in_range(p, cfg) for p in pts])
    anchor = int(np.argmin(np.abs(s)))
    lo = anchor
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    hi = anchor
    while hi < len(s) - 1 and ok[hi + 1]:
        hi += 1
    return pts[lo:hi + 1]


def generate_scene(seed, cfg: SceneGenConfig) -> VectorScene:
    cfg.validate()
    rng = np.random.default_rng(seed)

    lane_count = int(rng.integers(cfg.lane_count_min, cfg.lane_count_max + 1))
    ego_lane = int(rng.integers(0, lane_count))
    maneuver = int(rng.integers(0, 3))  # 0 straight, 1 left, 2 right
    if maneuver == 0:
        curvature = rng.uniform(-cfg.curvature_straight_max, cfg.curvature_straight_max)
        v0 = rng.uniform(0.0, 0.4)
        accel = rng.uniform(0.5, 2.0)
    else:
        mag = rng.uniform(cfg.curvature_turn_min, cfg.curvature_turn_max)
        curvature = mag if maneuver == 1 else -mag
        v0 = rng.uniform(0.3, 0.4)
        accel = rng.uniform(1.6, 2.0)
    road = _Road(curvature)

    # Lane L center sits at offset (L - ego_lane) * lane_width; edges halfway.
    map_elements = []
    for j in range(lane_count + 1):
        offset = (j - ego_lane - 0.5) * cfg.lane_width
        cls = "boundary" if j in (0, lane_count) else "divider"
        map_elements.append(Polyline(_clip_line(road, offset, cfg), cls))

    agents = []
    lane_speeds = rng.uniform(cfg.agent_speed_min, cfg.agent_speed_max, size=lane_count)
    lane_positions = [[] for _ in range(lane_count)]
    n_agents = int(rng.integers(cfg.agent_count_min, cfg.agent_count_max + 1))
    hist_times = TIMESTEP * np.arange(-(cfg.history_points - 1), 1)
    for _ in range(n_agents):
        lane = int(rng.integers(0, lane_count))
        lateral = ((lane - ego_lane) * cfg.lane_width
                   + rng.uniform(-cfg.agent_lateral_noise, cfg.agent_lateral_noise))
        hi = max(cfg.forward_range - 10.0, 4.0)
        placed = None
        for _ in range(20):
            if lane == ego_lane:
                s0 = rng.uniform(min(EGO_LANE_CLEARANCE, hi - 1.0), hi)
            else:
                s0 = rng.uniform(-cfg.backward_range + 5.0, hi)
            if any(abs(s0 - prev) < SAME_LANE_GAP for prev in lane_positions[lane]):
                continue
            if in_range(road.point(s0, lateral), cfg, margin=2.0):
                placed = s0
                break
        if placed is None:
            continue
        lane_positions[lane].append(placed)
        speed = lane_speeds[lane]
        s_hist = placed + speed * hist_times
        s_fut = placed + speed * FUTURE_TIMES
        noise = rng.normal(0.0, cfg.position_noise,
                           size=(len(s_hist) + len(s_fut), 2))
        hist_xy = road.point(s_hist, lateral) + noise[:len(s_hist)]
        fut_xy = road.point(s_fut, lateral) + noise[len(s_hist):]
        history = np.column_stack([hist_xy, road.heading(s_hist)])
        future = np.column_stack([fut_xy, road.heading(s_fut)])
        agents.append(AgentTrack(
            length=float(rng.uniform(3.5, 5.0)),
            width=float(rng.uniform(1.6, 2.0)),
            history=history,
            future=future,
        ))

    s_ego = v0 * FUTURE_TIMES + 0.5 * accel * FUTURE_TIMES ** 2
    ego_future = road.point(s_ego, 0.0)

    change = net_heading_change(ego_future)
    if abs(change) < STRAIGHT_LIMIT_RAD:
        command = "straight"
    elif change > 0:
        command = "left"
    else:
        command = "right"

    return VectorScene(map_elements=map_elements, agents=agents,
                       ego_future=ego_future, command=command, seed=int(seed))


def generate_dataset(base_seed, count, cfg):
    """Scenes for seeds base_seed .. base_seed + count - 1."""
    return [generate_scene(base_seed + i, cfg) for i in range(count)]
