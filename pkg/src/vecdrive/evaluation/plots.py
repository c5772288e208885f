"""Scene rendering as standalone SVG files.

Viewport transform (driving frame is x forward, y left; SVG is u right,
v down):

    u = (lateral_range - y) * scale + margin
    v = (forward_range - x) * scale + margin

Coordinates are written at full float precision so the transform is exactly
invertible from the file.
"""

import numpy as np

from ..config import MAP_CLASSES
from ..scene import VectorScene
from ..train.losses import softmax_np

MAP_COLORS = {"boundary": "#8c5a2b", "divider": "#e08a00"}
AGENT_COLOR = "#2060c0"
EGO_COLOR = "#c02020"
GRID_COLOR = "#e0e0e0"


def world_to_view(xy, cfg, scale, margin):
    x, y = float(xy[0]), float(xy[1])
    u = (cfg.lateral_range - y) * scale + margin
    v = (cfg.forward_range - x) * scale + margin
    return u, v


def _polyline(points, cfg, scale, margin, color, dashed=False, width=1.5,
              elem_id=None, opacity=1.0):
    coords = " ".join(
        f"{u!r},{v!r}" for u, v in
        (world_to_view(p, cfg, scale, margin) for p in np.asarray(points)))
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    ident = f' id="{elem_id}"' if elem_id else ""
    return (f'<polyline{ident} points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}" stroke-opacity="{opacity}"{dash}/>')


def emit_scene_svg(scene: VectorScene, output, cfg, path, scale=8.0, margin=12.0):
    """GT solid, predictions dashed, 1 m grid, legend. One SVG per scene."""
    width = 2 * cfg.lateral_range * scale + 2 * margin
    height = (cfg.forward_range + cfg.backward_range) * scale + 2 * margin
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
             f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
             f'<rect width="100%" height="100%" fill="white"/>']

    for y in np.arange(-cfg.lateral_range, cfg.lateral_range + 1e-9, 1.0):
        u, _ = world_to_view((0.0, y), cfg, scale, margin)
        parts.append(f'<line x1="{u:.2f}" y1="{margin:.2f}" x2="{u:.2f}" '
                     f'y2="{height - margin:.2f}" stroke="{GRID_COLOR}" stroke-width="0.5"/>')
    for x in np.arange(-cfg.backward_range, cfg.forward_range + 1e-9, 1.0):
        _, v = world_to_view((x, 0.0), cfg, scale, margin)
        parts.append(f'<line x1="{margin:.2f}" y1="{v:.2f}" x2="{width - margin:.2f}" '
                     f'y2="{v:.2f}" stroke="{GRID_COLOR}" stroke-width="0.5"/>')

    for el in scene.map_elements:
        parts.append(_polyline(el.points, cfg, scale, margin,
                               MAP_COLORS[el.class_id], width=2.0))
    if output is not None:
        probs = softmax_np(output.map_class_logits.values)
        real = probs[:, :len(MAP_CLASSES)]
        for i in range(real.shape[0]):
            if real[i].max() >= 0.5:
                cls = MAP_CLASSES[int(real[i].argmax())]
                parts.append(_polyline(output.map_points.values[i], cfg, scale,
                                       margin, MAP_COLORS[cls], dashed=True,
                                       elem_id=f"pred-map-{i}"))

    for ai, ag in enumerate(scene.agents):
        parts.append(_polyline(ag.future[:, :2], cfg, scale, margin,
                               AGENT_COLOR, width=2.0, elem_id=f"gt-agent-{ai}"))
        if output is not None and ai < output.agent_trajectories.shape[0]:
            for k in range(output.agent_trajectories.shape[1]):
                parts.append(_polyline(output.agent_trajectories.values[ai, k],
                                       cfg, scale, margin, AGENT_COLOR,
                                       dashed=True, opacity=0.6,
                                       elem_id=f"pred-agent-{ai}-{k}"))

    parts.append(_polyline(scene.ego_future, cfg, scale, margin, EGO_COLOR,
                           width=2.5, elem_id="gt-ego"))
    if output is not None:
        for k in range(output.ego_trajectories.shape[0]):
            parts.append(_polyline(output.ego_trajectories.values[k], cfg, scale,
                                   margin, EGO_COLOR, dashed=True,
                                   elem_id=f"pred-ego-{k}"))

    legend = [("GT boundary", MAP_COLORS["boundary"]), ("GT divider", MAP_COLORS["divider"]),
              ("agents (dashed = predicted)", AGENT_COLOR),
              ("ego (dashed = predicted)", EGO_COLOR)]
    for li, (label, color) in enumerate(legend):
        y0 = margin + 14 * (li + 1)
        parts.append(f'<line x1="{margin:.0f}" y1="{y0}" x2="{margin + 24:.0f}" '
                     f'y2="{y0}" stroke="{color}" stroke-width="3"/>')
        parts.append(f'<text x="{margin + 30:.0f}" y="{y0 + 4}" '
                     f'font-size="11" font-family="sans-serif">{label}</text>')
    parts.append(f'<text x="{margin:.0f}" y="{height - 4:.0f}" font-size="10" '
                 f'font-family="sans-serif">command: {scene.command}, '
                 f'seed {scene.seed}, grid 1 m</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")
