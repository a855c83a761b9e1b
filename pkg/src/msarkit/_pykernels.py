"""NumPy implementations of the inner loops; used when the extension is not built."""

from __future__ import annotations

import math

import numpy as np

_M64 = 0xFFFFFFFFFFFFFFFF


def _mix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def detection_uniform(key: int, target: int, k: int) -> float:
    """Uniform in [0, 1) addressed by (run key, target index, look index)."""
    return (_mix(_mix(key ^ _mix(target)) ^ k) >> 11) * (1.0 / 9007199254740992.0)


def scan_run(times, vx, vy, vpsi, tx, ty, half_along, half_cross, pod, interval,
             key, deadline, rescue_delay, tf):
    """Walk each target through the step grid and record its first detection.

    A look happens at the first step the target is inside the footprint and
    again whenever it is still (or again) inside at least ``interval`` after
    the previous look. Look ``k`` of target ``i`` succeeds when
    ``detection_uniform(key, i, k) < pod``.
    """
    n_targets = tx.shape[1]
    det = np.full(n_targets, np.nan)
    save = np.full(n_targets, np.nan)
    looks = np.zeros(n_targets, dtype=np.int64)
    c, s = np.cos(vpsi), np.sin(vpsi)
    dx = tx - vx[:, None]
    dy = ty - vy[:, None]
    inside = ((np.abs(dx * c[:, None] + dy * s[:, None]) <= half_along)
              & (np.abs(-dx * s[:, None] + dy * c[:, None]) <= half_cross)
              & (times <= deadline)[:, None])
    slack = 1e-9 * max(interval, 1.0)
    horizon = min(tf, deadline)
    for i in np.nonzero(inside.any(axis=0))[0]:
        n = 0
        last = -math.inf
        for j in np.nonzero(inside[:, i])[0]:
            t = times[j]
            if n and t - last < interval - slack:
                continue
            u = detection_uniform(key, int(i), n)
            n += 1
            last = t
            if u < pod:
                det[i] = t
                if t + rescue_delay <= horizon:
                    save[i] = t + rescue_delay
                break
        looks[i] = n
    return det, save, looks


def raster_cover(xs, ys, psis, half_along, half_cross, x0, y0, cell, nx, ny):
    """Mark grid cells whose centres fall inside any oriented footprint."""
    grid = np.zeros((ny, nx), dtype=np.uint8)
    cx = x0 + (np.arange(nx) + 0.5) * cell
    cy = y0 + (np.arange(ny) + 0.5) * cell
    for x, y, p in zip(xs, ys, psis):
        c, s = math.cos(p), math.sin(p)
        ex = abs(half_along * c) + abs(half_cross * s)
        ey = abs(half_along * s) + abs(half_cross * c)
        i0 = max(math.floor((x - ex - x0) / cell - 0.5), 0)
        i1 = min(math.ceil((x + ex - x0) / cell - 0.5), nx - 1)
        j0 = max(math.floor((y - ey - y0) / cell - 0.5), 0)
        j1 = min(math.ceil((y + ey - y0) / cell - 0.5), ny - 1)
        if i1 < i0 or j1 < j0:
            continue
        dx = cx[i0:i1 + 1][None, :] - x
        dy = cy[j0:j1 + 1][:, None] - y
        hit = (np.abs(dx * c + dy * s) <= half_along) & (np.abs(-dx * s + dy * c) <= half_cross)
        grid[j0:j1 + 1, i0:i1 + 1] |= hit.astype(np.uint8)
    return grid
