# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics mirror ``msarkit._pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, floor, ceil, sqrt, NAN, INFINITY
from libc.stdint cimport uint64_t, uint8_t

cnp.import_array()


cdef inline uint64_t _mix(uint64_t z) nogil:
    z = z + <uint64_t>0x9E3779B97F4A7C15
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t target, uint64_t k) nogil:
    return <double>(_mix(_mix(key ^ _mix(target)) ^ k) >> 11) * (1.0 / 9007199254740992.0)


def detection_uniform(uint64_t key, uint64_t target, uint64_t k):
    return _uniform(key, target, k)


def scan_run(const double[::1] times, const double[::1] vx, const double[::1] vy, const double[::1] vpsi,
             const double[:, ::1] tx, const double[:, ::1] ty,
             double half_along, double half_cross, double pod, double interval,
             uint64_t key, double deadline, double rescue_delay, double tf):
    cdef Py_ssize_t n_steps = times.shape[0]
    cdef Py_ssize_t n_targets = tx.shape[1]
    cdef cnp.ndarray[double, ndim=1] det_np = np.full(n_targets, np.nan)
    cdef cnp.ndarray[double, ndim=1] save_np = np.full(n_targets, np.nan)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] looks_np = np.zeros(n_targets, dtype=np.int64)
    cdef double[::1] det = det_np
    cdef double[::1] save = save_np
    cdef cnp.int64_t[::1] looks = looks_np
    cdef double[::1] c = np.cos(np.asarray(vpsi))
    cdef double[::1] s = np.sin(np.asarray(vpsi))
    cdef Py_ssize_t i, j
    cdef double t, dx, dy, along, cross, last, u, st
    cdef double slack = 1e-9 * (interval if interval > 1.0 else 1.0)
    cdef double horizon = tf if tf < deadline else deadline
    cdef cnp.int64_t n
    with nogil:
        for i in range(n_targets):
            n = 0
            last = -INFINITY
            for j in range(n_steps):
                t = times[j]
                if t > deadline:
                    break
                dx = tx[j, i] - vx[j]
                dy = ty[j, i] - vy[j]
                along = dx * c[j] + dy * s[j]
                cross = -dx * s[j] + dy * c[j]
                if fabs(along) <= half_along and fabs(cross) <= half_cross:
                    if n == 0 or t - last >= interval - slack:
                        u = _uniform(key, <uint64_t>i, <uint64_t>n)
                        n += 1
                        last = t
                        if u < pod:
                            det[i] = t
                            st = t + rescue_delay
                            if st <= horizon:
                                save[i] = st
                            break
            looks[i] = n
    return det_np, save_np, looks_np


def raster_cover(const double[::1] xs, const double[::1] ys, const double[::1] psis,
                 double half_along, double half_cross,
                 double x0, double y0, double cell, Py_ssize_t nx, Py_ssize_t ny):
    cdef cnp.ndarray[uint8_t, ndim=2] grid_np = np.zeros((ny, nx), dtype=np.uint8)
    cdef uint8_t[:, ::1] grid = grid_np
    cdef Py_ssize_t k, i, j, i0, i1, j0, j1
    cdef double c, s, ex, ey, px, py, dx, dy
    with nogil:
        for k in range(xs.shape[0]):
            c = cos(psis[k])
            s = sin(psis[k])
            ex = fabs(half_along * c) + fabs(half_cross * s)
            ey = fabs(half_along * s) + fabs(half_cross * c)
            i0 = <Py_ssize_t>floor((xs[k] - ex - x0) / cell - 0.5)
            i1 = <Py_ssize_t>ceil((xs[k] + ex - x0) / cell - 0.5)
            j0 = <Py_ssize_t>floor((ys[k] - ey - y0) / cell - 0.5)
            j1 = <Py_ssize_t>ceil((ys[k] + ey - y0) / cell - 0.5)
            if i0 < 0:
                i0 = 0
            if j0 < 0:
                j0 = 0
            if i1 > nx - 1:
                i1 = nx - 1
            if j1 > ny - 1:
                j1 = ny - 1
            for j in range(j0, j1 + 1):
                py = y0 + (j + 0.5) * cell
                dy = py - ys[k]
                for i in range(i0, i1 + 1):
                    if grid[j, i]:
                        continue
                    px = x0 + (i + 0.5) * cell
                    dx = px - xs[k]
                    if fabs(dx * c + dy * s) <= half_along and fabs(-dx * s + dy * c) <= half_cross:
                        grid[j, i] = 1
    return grid_np
