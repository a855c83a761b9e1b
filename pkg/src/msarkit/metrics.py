"""Single-frame search metrics (POC, POD, POS) and the POS-maximizing altitude."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .drift import SearchArea
from .sensor import CameraSpec, TargetModel, ViewGeometry, footprint, pod_at_altitude

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def poc(fp: tuple[float, float], area: SearchArea) -> float:
    """Instantaneous containment probability under a uniform target prior."""
    fs_h, fs_v = fp
    if fs_h < 0 or fs_v < 0:
        raise ValueError("footprint extents must be non-negative")
    if not (area.width > 0 and area.height > 0):
        raise ValueError("search area must have positive extent")
    return min(1.0, (fs_h * fs_v) / (area.width * area.height))


def pos(poc_value: float, pod_value: float) -> float:
    for name, v in (("poc", poc_value), ("pod", pod_value)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    return poc_value * pod_value


def pos_at(camera, target, area, h, task="detection", gsd_axis="horizontal") -> tuple[float, float, float]:
    view = ViewGeometry(h)
    c = poc(footprint(camera, view), area)
    d = pod_at_altitude(camera, target, view, task, gsd_axis)
    return c, d, c * d


@dataclass(frozen=True)
class PosCurve:
    altitude: np.ndarray
    poc: np.ndarray
    pod: np.ndarray
    pos: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.altitude) <= 0):
            raise ValueError("altitudes must be strictly increasing")

    def argmax(self) -> int:
        # np.argmax returns the first maximum, i.e. the lowest altitude
        return int(np.argmax(self.pos))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["altitude_m", "poc", "pod", "pos"])
            for row in zip(self.altitude, self.poc, self.pod, self.pos):
                w.writerow([repr(float(v)) for v in row])


def pos_curve(camera: CameraSpec, target: TargetModel, area: SearchArea,
              h_min: float, h_max: float, n_samples: int,
              task: str = "detection", gsd_axis: str = "horizontal") -> PosCurve:
    if not 0 < h_min < h_max:
        raise ValueError("need 0 < h_min < h_max")
    if n_samples < 3:
        raise ValueError("n_samples must be >= 3")
    hs = np.linspace(h_min, h_max, n_samples)
    vals = np.array([pos_at(camera, target, area, h, task, gsd_axis) for h in hs])
    return PosCurve(hs, vals[:, 0], vals[:, 1], vals[:, 0] * vals[:, 1])


@dataclass(frozen=True)
class AltitudeOptimum:
    h_star: float
    pos_star: float
    tie: bool = False

    def __iter__(self):
        return iter((self.h_star, self.pos_star))


def golden_section_max(f, a: float, b: float, tol: float):
    """Maximize ``f`` on [a, b]; returns (x, f(x)) with the bracket shrunk below ``tol``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:  # ties keep the lower sub-bracket
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimal_altitude(camera: CameraSpec, target: TargetModel, area: SearchArea,
                     h_min: float, h_max: float, tolerance: float = 0.1,
                     n_grid: int = 1024, task: str = "detection",
                     gsd_axis: str = "horizontal") -> AltitudeOptimum:
    """Global POS maximizer on [h_min, h_max].

    A coarse grid locates the best sample without assuming unimodality; golden
    section then refines inside the two neighbouring grid cells. Among equal
    maxima the lowest altitude is returned and ``tie`` is set.
    """
    if not 0 < h_min < h_max:
        raise ValueError("need 0 < h_min < h_max")
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    n_grid = max(int(n_grid), 256)
    f = lambda h: pos_at(camera, target, area, h, task, gsd_axis)[2]  # noqa: E731

    hs = np.linspace(h_min, h_max, n_grid)
    vals = np.array([f(h) for h in hs])
    k = int(np.argmax(vals))
    best_h, best = float(hs[k]), float(vals[k])

    # flat maximum (e.g. POC clamped with POD saturated): report the lowest altitude
    tie = bool(np.sum(vals == best) > 1)
    if tie:
        return AltitudeOptimum(best_h, best, True)

    lo = float(hs[max(k - 1, 0)])
    hi = float(hs[min(k + 1, n_grid - 1)])
    if hi - lo > tolerance:
        h, v = golden_section_max(f, lo, hi, tolerance / 4)
        if v > best:
            best_h, best = h, v
    return AltitudeOptimum(best_h, best, False)
