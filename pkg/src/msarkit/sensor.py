"""Thermal camera geometry and Johnson-criteria detection probability.

All angles are radians. Altitude doubles as the slant range R because the
camera is assumed to look straight down; a non-zero tilt is accepted by
:func:`gsd` for the vertical axis only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TASKS = ("detection", "recognition", "identification")


@dataclass(frozen=True)
class CameraSpec:
    fov_h: float
    fov_v: float
    px_h: int
    px_v: int
    framerate: float
    emissivity_setting: float = 0.98  # stored for the operator, never used

    def __post_init__(self):
        for name in ("fov_h", "fov_v"):
            v = getattr(self, name)
            if not 0.0 < v < math.pi:
                raise ValueError(f"{name} must lie in (0, pi) radians, got {v!r}")
        if self.px_h < 1 or self.px_v < 1:
            raise ValueError("pixel counts must be >= 1")
        if not self.framerate > 0:
            raise ValueError("framerate must be positive")
        if not 0.0 < self.emissivity_setting <= 1.0:
            raise ValueError("emissivity_setting must lie in (0, 1]")

    @classmethod
    def from_degrees(cls, fov_h_deg, fov_v_deg, px_h, px_v, framerate, emissivity_setting=0.98):
        return cls(math.radians(fov_h_deg), math.radians(fov_v_deg), int(px_h), int(px_v),
                   float(framerate), float(emissivity_setting))


@dataclass(frozen=True)
class TargetModel:
    width: float = 0.5
    height: float = 0.5
    d_c: float = 0.5
    n50_detection: float = 0.75
    n50_recognition: float = 3.0
    n50_identification: float = 6.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0 and self.d_c > 0):
            raise ValueError("target width, height and d_c must be positive")
        if not 0 < self.n50_detection < self.n50_recognition < self.n50_identification:
            raise ValueError("n50 thresholds must satisfy 0 < detection < recognition < identification")

    def n50(self, task: str) -> float:
        try:
            return {"detection": self.n50_detection,
                    "recognition": self.n50_recognition,
                    "identification": self.n50_identification}[task]
        except KeyError:
            raise ValueError(f"unknown task {task!r}; expected one of {TASKS}") from None


@dataclass(frozen=True)
class ViewGeometry:
    altitude: float
    tilt: float = 0.0

    def __post_init__(self):
        if not self.altitude > 0:
            raise ValueError(f"altitude must be positive, got {self.altitude!r}")
        if not 0.0 <= self.tilt < math.pi / 2:
            raise ValueError(f"tilt must lie in [0, pi/2), got {self.tilt!r}")


def gsd(camera: CameraSpec, view: ViewGeometry, axis: str = "horizontal") -> float:
    """Ground sample distance in meters per pixel along one image axis."""
    r = view.altitude
    if axis == "horizontal":
        return 2.0 * r * math.tan(camera.fov_h / (2.0 * camera.px_h))
    if axis == "vertical":
        return 2.0 * r / math.cos(view.tilt) * math.tan(camera.fov_v / (2.0 * camera.px_v))
    raise ValueError(f"axis must be 'horizontal' or 'vertical', got {axis!r}")


def cycles_on_target(d_c: float, gsd_m: float) -> float:
    if not (d_c > 0 and gsd_m > 0):
        raise ValueError("d_c and gsd must be positive")
    return d_c / (2.0 * gsd_m)


def johnson_probability(n: float, n50: float) -> float:
    """Target transfer probability function P = x^E / (1 + x^E).

    ``x = n / n50`` and ``E = 2.7 + 0.7 x``. The same exponent is used in
    numerator and denominator so that P(n50) = 1/2 and P -> 1.
    """
    if n < 0:
        raise ValueError(f"cycle count must be non-negative, got {n!r}")
    if not n50 > 0:
        raise ValueError(f"n50 must be positive, got {n50!r}")
    if n == 0:
        return 0.0
    x = n / n50
    # logistic form avoids overflow of x**E for large x
    log_xe = (2.7 + 0.7 * x) * math.log(x)
    if log_xe >= 0:
        return 1.0 / (1.0 + math.exp(-log_xe))
    e = math.exp(log_xe)
    return e / (1.0 + e)


def johnson_miss_probability(n: float, n50: float) -> float:
    """``1 - P(n)`` evaluated without cancellation.

    Near certain detection P rounds to 1.0 in double precision while the
    miss probability stays resolvable (about 1e-62 at ten metres for a
    typical uncooled camera).
    """
    if n < 0:
        raise ValueError(f"cycle count must be non-negative, got {n!r}")
    if not n50 > 0:
        raise ValueError(f"n50 must be positive, got {n50!r}")
    if n == 0:
        return 1.0
    x = n / n50
    log_xe = (2.7 + 0.7 * x) * math.log(x)
    if log_xe >= 0:
        e = math.exp(-log_xe)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(log_xe))


def task_gsd(camera: CameraSpec, view: ViewGeometry, gsd_axis: str = "horizontal") -> float:
    """GSD fed into the cycle count: the horizontal axis, or the geometric mean of both."""
    if gsd_axis == "geometric_mean":
        return math.sqrt(gsd(camera, view, "horizontal") * gsd(camera, view, "vertical"))
    return gsd(camera, view, gsd_axis)


def pod_at_altitude(camera: CameraSpec, target: TargetModel, view: ViewGeometry,
                    task: str = "detection", gsd_axis: str = "horizontal") -> float:
    g = task_gsd(camera, view, gsd_axis)
    return johnson_probability(cycles_on_target(target.d_c, g), target.n50(task))


def miss_at_altitude(camera: CameraSpec, target: TargetModel, view: ViewGeometry,
                     task: str = "detection", gsd_axis: str = "horizontal") -> float:
    g = task_gsd(camera, view, gsd_axis)
    return johnson_miss_probability(cycles_on_target(target.d_c, g), target.n50(task))


def altitude_for_pod(camera: CameraSpec, target: TargetModel, p: float,
                     task: str = "detection", gsd_axis: str = "horizontal") -> float:
    """Altitude at which the task probability equals ``p`` (0 < p < 1).

    POD is strictly decreasing in altitude, so a bracketing root search is
    enough.
    """
    from scipy.optimize import brentq

    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly between 0 and 1")
    f = lambda h: pod_at_altitude(camera, target, ViewGeometry(h), task, gsd_axis) - p  # noqa: E731
    lo, hi = 1e-3, 1.0
    while f(hi) > 0:
        hi *= 2.0
    return brentq(f, lo, hi, xtol=1e-12, rtol=1e-15)


def pixels_on_target(target: TargetModel, gsd_m: float) -> float:
    """Linear pixel extent of the target; compare against the 5-pixel rule of thumb."""
    if not gsd_m > 0:
        raise ValueError("gsd must be positive")
    return target.width / gsd_m


def footprint(camera: CameraSpec, view: ViewGeometry) -> tuple[float, float]:
    """Ground field size (fs_h, fs_v) in meters."""
    return (gsd(camera, view, "horizontal") * camera.px_h,
            gsd(camera, view, "vertical") * camera.px_v)


def max_coverage_speed(camera: CameraSpec, view: ViewGeometry) -> float:
    """Speed at which consecutive frames just abut along track.

    Along-track is the vertical image axis. This is a loose bound; airframe
    limits cap real search speed far below it.
    """
    return footprint(camera, view)[1] * camera.framerate
