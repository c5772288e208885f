"""Rasterization of a vectorized scene into the BEV feature grid."""

import numpy as np

from .. import backend
from ..config import MAP_CLASSES, SceneGenConfig
from ..geometry import rect_corners
from .types import BevGrid, VectorScene


def rasterize_bev(scene: VectorScene, cfg: SceneGenConfig) -> BevGrid:
    """Paint map strokes, agent footprints and agent velocities.

    Map polylines go into their class occupancy channel as one-cell-wide
    anti-aliased strokes; agent footprints at the current pose are filled
    oriented rectangles carrying (vx, vy) in the velocity channels. Cells
    untouched by geometry stay zero.
    """
    h, w = cfg.grid_shape
    channels = [np.zeros((h, w)) for _ in BevGrid.CHANNELS]
    for el in scene.map_elements:
        idx = MAP_CLASSES.index(el.class_id)
        backend.paint_polyline(channels[idx], np.ascontiguousarray(el.points),
                               cfg.resolution, cfg.x_min, cfg.y_min)
    occ, vel_x, vel_y = channels[len(MAP_CLASSES):]
    for agent in scene.agents:
        corners = rect_corners(agent.position, agent.history[-1, 2],
                               agent.length, agent.width)
        vx, vy = agent.velocity
        backend.paint_rect(occ, vel_x, vel_y, np.ascontiguousarray(corners),
                           float(vx), float(vy), cfg.resolution, cfg.x_min, cfg.y_min)
    return BevGrid(data=np.stack(channels, axis=-1), resolution=cfg.resolution,
                   x_min=cfg.x_min, y_min=cfg.y_min)
