# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same contracts as ``numpy_kernels``."""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, exp, floor, sqrt

cnp.import_array()

IS_COMPILED = True


def masked_softmax_fwd(logits, allowed):
    cdef cnp.ndarray[double, ndim=3, mode="c"] lg = np.ascontiguousarray(logits, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=3, mode="c"] out = np.empty_like(lg)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, mode="c"] mask
    cdef Py_ssize_t b, q, k, nb = lg.shape[0], nq = lg.shape[1], nk = lg.shape[2]
    cdef double m, s, v
    if allowed is None:
        for b in range(nb):
            for q in range(nq):
                m = lg[b, q, 0]
                for k in range(1, nk):
                    if lg[b, q, k] > m:
                        m = lg[b, q, k]
                s = 0.0
                for k in range(nk):
                    v = exp(lg[b, q, k] - m)
                    out[b, q, k] = v
                    s += v
                for k in range(nk):
                    out[b, q, k] /= s
    else:
        mask = np.ascontiguousarray(allowed, dtype=np.uint8)
        for b in range(nb):
            for q in range(nq):
                m = -np.inf
                for k in range(nk):
                    if mask[q, k] and lg[b, q, k] > m:
                        m = lg[b, q, k]
                s = 0.0
                for k in range(nk):
                    if mask[q, k]:
                        v = exp(lg[b, q, k] - m)
                        out[b, q, k] = v
                        s += v
                    else:
                        out[b, q, k] = 0.0
                for k in range(nk):
                    out[b, q, k] /= s
    return out


def masked_softmax_bwd(probs, grad_out):
    cdef cnp.ndarray[double, ndim=3, mode="c"] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=3, mode="c"] g = np.ascontiguousarray(grad_out, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=3, mode="c"] out = np.empty_like(p)
    cdef Py_ssize_t b, q, k, nb = p.shape[0], nq = p.shape[1], nk = p.shape[2]
    cdef double inner
    for b in range(nb):
        for q in range(nq):
            inner = 0.0
            for k in range(nk):
                inner += g[b, q, k] * p[b, q, k]
            for k in range(nk):
                out[b, q, k] = p[b, q, k] * (g[b, q, k] - inner)
    return out


def paint_polyline(channel, pts, double resolution, double x_min, double y_min):
    cdef cnp.ndarray[double, ndim=2, mode="c"] ch = channel
    cdef cnp.ndarray[double, ndim=2, mode="c"] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t h = ch.shape[0], w = ch.shape[1]
    cdef Py_ssize_t n = p.shape[0], k, i, j, i0, i1, j0, j1
    cdef double inv = 1.0 / resolution
    cdef double ax, ay, bx, by, ex, ey, seg_sq, cx, cy, px, py, t, dx, dy, cov
    cdef double lo_x, hi_x, lo_y, hi_y
    for k in range(n - 1):
        ax = p[k, 0]
        ay = p[k, 1]
        bx = p[k + 1, 0]
        by = p[k + 1, 1]
        lo_x = ax if ax < bx else bx
        hi_x = ax if ax > bx else bx
        lo_y = ay if ay < by else by
        hi_y = ay if ay > by else by
        i0 = <Py_ssize_t>floor((lo_x - resolution - x_min) * inv)
        i1 = <Py_ssize_t>ceil((hi_x + resolution - x_min) * inv)
        j0 = <Py_ssize_t>floor((lo_y - resolution - y_min) * inv)
        j1 = <Py_ssize_t>ceil((hi_y + resolution - y_min) * inv)
        if i0 < 0:
            i0 = 0
        if j0 < 0:
            j0 = 0
        if i1 > h:
            i1 = h
        if j1 > w:
            j1 = w
        ex = bx - ax
        ey = by - ay
        seg_sq = ex * ex + ey * ey
        for i in range(i0, i1):
            cx = x_min + (i + 0.5) * resolution
            for j in range(j0, j1):
                cy = y_min + (j + 0.5) * resolution
                px = cx - ax
                py = cy - ay
                if seg_sq == 0.0:
                    dx = px
                    dy = py
                else:
                    t = (px * ex + py * ey) / seg_sq
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    dx = px - t * ex
                    dy = py - t * ey
                cov = 1.0 - sqrt(dx * dx + dy * dy) * inv
                if cov > ch[i, j]:
                    ch[i, j] = cov


def paint_rect(occ, vel_x, vel_y, corners, double vx, double vy,
               double resolution, double x_min, double y_min):
    cdef cnp.ndarray[double, ndim=2, mode="c"] o = occ
    cdef cnp.ndarray[double, ndim=2, mode="c"] ux = vel_x
    cdef cnp.ndarray[double, ndim=2, mode="c"] uy = vel_y
    cdef cnp.ndarray[double, ndim=2, mode="c"] c = np.ascontiguousarray(corners, dtype=np.float64)
    cdef Py_ssize_t h = o.shape[0], w = o.shape[1], i, j, i0, i1, j0, j1
    cdef double inv = 1.0 / resolution
    cdef double lo_x = c[0, 0], hi_x = c[0, 0], lo_y = c[0, 1], hi_y = c[0, 1]
    cdef double e1x, e1y, e2x, e2y, n1, n2, px, py, d1, d2, cx, cy
    for i in range(1, 4):
        if c[i, 0] < lo_x:
            lo_x = c[i, 0]
        if c[i, 0] > hi_x:
            hi_x = c[i, 0]
        if c[i, 1] < lo_y:
            lo_y = c[i, 1]
        if c[i, 1] > hi_y:
            hi_y = c[i, 1]
    i0 = <Py_ssize_t>floor((lo_x - x_min) * inv)
    i1 = <Py_ssize_t>ceil((hi_x - x_min) * inv)
    j0 = <Py_ssize_t>floor((lo_y - y_min) * inv)
    j1 = <Py_ssize_t>ceil((hi_y - y_min) * inv)
    if i0 < 0:
        i0 = 0
    if j0 < 0:
        j0 = 0
    if i1 > h:
        i1 = h
    if j1 > w:
        j1 = w
    e1x = c[1, 0] - c[0, 0]
    e1y = c[1, 1] - c[0, 1]
    e2x = c[3, 0] - c[0, 0]
    e2y = c[3, 1] - c[0, 1]
    n1 = e1x * e1x + e1y * e1y
    n2 = e2x * e2x + e2y * e2y
    for i in range(i0, i1):
        cx = x_min + (i + 0.5) * resolution
        for j in range(j0, j1):
            cy = y_min + (j + 0.5) * resolution
            px = cx - c[0, 0]
            py = cy - c[0, 1]
            d1 = px * e1x + py * e1y
            d2 = px * e2x + py * e2y
            if 0.0 <= d1 <= n1 and 0.0 <= d2 <= n2:
                if o[i, j] < 1.0:
                    o[i, j] = 1.0
                ux[i, j] = vx
                uy[i, j] = vy
