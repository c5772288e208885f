"""Plain-numpy geometry helpers shared by scene generation, losses and eval."""

import math

import numpy as np


def resample_polyline(points, n):
    """Resample a polyline to ``n`` points uniformly spaced by arc length."""
    pts = np.asarray(points, dtype=np.float64)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n)
    out = np.empty((n, 2))
    out[:, 0] = np.interp(targets, cum, pts[:, 0])
    out[:, 1] = np.interp(targets, cum, pts[:, 1])
    return out


def point_segment_distance(p, a, b):
    p, a, b = (np.asarray(v, dtype=np.float64) for v in (p, a, b))
    e = b - a
    seg_sq = float(e @ e)
    if seg_sq == 0.0:
        return float(np.linalg.norm(p - a))
    t = min(1.0, max(0.0, float((p - a) @ e) / seg_sq))
    return float(np.linalg.norm(p - (a + t * e)))


def point_polyline_distance(p, polyline):
    pts = np.asarray(polyline, dtype=np.float64)
    return min(point_segment_distance(p, pts[i], pts[i + 1])
               for i in range(len(pts) - 1))


def mean_point_to_polyline(points, polyline):
    return float(np.mean([point_polyline_distance(p, polyline) for p in points]))


def symmetric_polyline_distance(a, b):
    """Symmetric mean point-to-polyline distance between two polylines."""
    return 0.5 * (mean_point_to_polyline(a, b) + mean_point_to_polyline(b, a))


def rect_corners(center, heading, length, width):
    """Corners of an oriented rectangle, counterclockwise from front-left."""
    cx, cy = center
    c, s = math.cos(heading), math.sin(heading)
    hl, hw = 0.5 * length, 0.5 * width
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    rot = np.array([[c, -s], [s, c]])
    return local @ rot.T + np.array([cx, cy])


def rects_intersect(corners_a, corners_b):
    """Separating-axis intersection test for two rectangles (closed sets)."""
    for corners in (corners_a, corners_b):
        for k in range(2):
            axis = corners[k + 1] - corners[k]
            pa = corners_a @ axis
            pb = corners_b @ axis
            if pa.max() < pb.min() or pb.max() < pa.min():
                return False
    return True


def segments_intersect(a0, a1, b0, b1):
    """Proper or touching intersection of two closed 2-D segments."""
    def orient(p, q, r):
        v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if v > 0:
            return 1
        if v < 0:
            return -1
        return 0

    def on_segment(p, q, r):
        return (min(p[0], q[0]) <= r[0] <= max(p[0], q[0])
                and min(p[1], q[1]) <= r[1] <= max(p[1], q[1]))

    o1, o2 = orient(a0, a1, b0), orient(a0, a1, b1)
    o3, o4 = orient(b0, b1, a0), orient(b0, b1, a1)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_segment(a0, a1, b0):
        return True
    if o2 == 0 and on_segment(a0, a1, b1):
        return True
    if o3 == 0 and on_segment(b0, b1, a0):
        return True
    if o4 == 0 and on_segment(b0, b1, a1):
        return True
    return False


def polylines_intersect(a, b):
    """Any touching or crossing segment pair between two polylines.

    Vectorized over all segment pairs (orientation predicates broadcast),
    so sweeping thousands of generated scenes stays cheap.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    p, r = a[:-1], np.diff(a, axis=0)          # (n, 2)
    q, s = b[:-1], np.diff(b, axis=0)          # (m, 2)

    def cross(u, v):
        return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]

    pq = q[None, :, :] - p[:, None, :]          # (n, m, 2)
    d1 = cross(r[:, None, :], pq)               # orient(p, p+r, q)
    d2 = cross(r[:, None, :], pq + s[None, :, :])
    d3 = cross(s[None, :, :], -pq)              # orient(q, q+s, p)
    d4 = cross(s[None, :, :], (p + r)[:, None, :] - q[None, :, :])
    proper = (np.sign(d1) != np.sign(d2)) & (np.sign(d3) != np.sign(d4)) \
        & (d1 != 0) & (d2 != 0) & (d3 != 0) & (d4 != 0)
    if proper.any():
        return True
    # Collinear / endpoint-touching cases: rare, recheck exactly.
    sus = np.argwhere((d1 == 0) | (d2 == 0) | (d3 == 0) | (d4 == 0))
    for i, j in sus:
        if segments_intersect(a[i], a[i + 1], b[j], b[j + 1]):
            return True
    return False


def wrap_angle(theta):
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def net_heading_change(traj):
    """Heading change from the first to the last chord of a point sequence."""
    traj = np.asarray(traj, dtype=np.float64)
    first = traj[1] - traj[0]
    last = traj[-1] - traj[-2]
    return wrap_angle(math.atan2(last[1], last[0]) - math.atan2(first[1], first[0]))


def chord_headings(traj):
    """Per-point headings: central chords inside, one-sided at the ends."""
    traj = np.asarray(traj, dtype=np.float64)
    n = len(traj)
    out = np.empty(n)
    for t in range(n):
        lo = max(0, t - 1)
        hi = min(n - 1, t + 1)
        d = traj[hi] - traj[lo]
        out[t] = math.atan2(d[1], d[0])
    return out
