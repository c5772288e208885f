"""Pure-numpy implementations of the hot kernels.

These are the reference implementations; the compiled extension in
``_kernels.pyx`` mirrors them loop-for-loop. Both backends expose the same
four functions and agree to floating-point roundoff (summation order may
differ, exact zeros and the max-blend semantics do not).
"""

import numpy as np

IS_COMPILED = False


def masked_softmax_fwd(logits, allowed):
    """Row softmax over the last axis, restricted to ``allowed`` entries.

    logits: (B, Q, K) float64, C-contiguous.
    allowed: (Q, K) bool, or None for an unrestricted softmax. Blocked
    entries come out exactly 0.0. Rows must have at least one allowed entry
    (callers validate).
    """
    if allowed is None:
        shifted = logits - logits.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
    else:
        neg = np.where(allowed, logits, -np.inf)
        m = neg.max(axis=-1, keepdims=True)
        e = np.exp(neg - m)
    return e / e.sum(axis=-1, keepdims=True)


def masked_softmax_bwd(probs, grad_out):
    """VJP of the masked softmax. Zero probability rows in, zero grads out."""
    inner = (grad_out * probs).sum(axis=-1, keepdims=True)
    return probs * (grad_out - inner)


def paint_polyline(channel, pts, resolution, x_min, y_min):
    """Max-blend an anti-aliased polyline stroke into a grid channel.

    Cell (i, j) has center (x_min + (i + 0.5) * res, y_min + (j + 0.5) * res).
    A cell receives max(existing, 1 - d / res) where d is the distance from
    its center to the nearest polyline segment; cells farther than one
    resolution stay untouched.
    """
    h, w = channel.shape
    inv = 1.0 / resolution
    for k in range(len(pts) - 1):
        ax, ay = pts[k]
        bx, by = pts[k + 1]
        i0 = max(0, int(np.floor((min(ax, bx) - resolution - x_min) * inv)))
        i1 = min(h, int(np.ceil((max(ax, bx) + resolution - x_min) * inv)))
        j0 = max(0, int(np.floor((min(ay, by) - resolution - y_min) * inv)))
        j1 = min(w, int(np.ceil((max(ay, by) + resolution - y_min) * inv)))
        if i0 >= i1 or j0 >= j1:
            continue
        cx = x_min + (np.arange(i0, i1) + 0.5) * resolution
        cy = y_min + (np.arange(j0, j1) + 0.5) * resolution
        px = cx[:, None] - ax
        py = cy[None, :] - ay
        ex = bx - ax
        ey = by - ay
        seg_sq = ex * ex + ey * ey
        if seg_sq == 0.0:
            dx, dy = px, py
        else:
            t = np.clip((px * ex + py * ey) / seg_sq, 0.0, 1.0)
            dx = px - t * ex
            dy = py - t * ey
        cov = 1.0 - np.sqrt(dx * dx + dy * dy) * inv
        np.maximum(channel[i0:i1, j0:j1], np.maximum(cov, 0.0),
                   out=channel[i0:i1, j0:j1])


def paint_rect(occ, vel_x, vel_y, corners, vx, vy, resolution, x_min, y_min):
    """Fill an oriented rectangle: occupancy 1 and velocity at covered cells.

    corners: (4, 2) in order, consecutive corners sharing an edge. A cell is
    covered when its center lies inside the rectangle (closed test).
    Occupancy is max-blended; velocity channels are overwritten at covered
    cells (last writer wins).
    """
    h, w = occ.shape
    inv = 1.0 / resolution
    i0 = max(0, int(np.floor((corners[:, 0].min() - x_min) * inv)))
    i1 = min(h, int(np.ceil((corners[:, 0].max() - x_min) * inv)))
    j0 = max(0, int(np.floor((corners[:, 1].min() - y_min) * inv)))
    j1 = min(w, int(np.ceil((corners[:, 1].max() - y_min) * inv)))
    if i0 >= i1 or j0 >= j1:
        return
    cx = x_min + (np.arange(i0, i1) + 0.5) * resolution
    cy = y_min + (np.arange(j0, j1) + 0.5) * resolution
    px = cx[:, None] - corners[0, 0]
    py = cy[None, :] - corners[0, 1]
    e1x = corners[1, 0] - corners[0, 0]
    e1y = corners[1, 1] - corners[0, 1]
    e2x = corners[3, 0] - corners[0, 0]
    e2y = corners[3, 1] - corners[0, 1]
    d1 = px * e1x + py * e1y
    d2 = px * e2x + py * e2y
    inside = ((d1 >= 0.0) & (d1 <= e1x * e1x + e1y * e1y)
              & (d2 >= 0.0) & (d2 <= e2x * e2x + e2y * e2y))
    occ_win = occ[i0:i1, j0:j1]
    np.maximum(occ_win, inside * 1.0, out=occ_win)
    vel_x[i0:i1, j0:j1][inside] = vx
    vel_y[i0:i1, j0:j1][inside] = vy
