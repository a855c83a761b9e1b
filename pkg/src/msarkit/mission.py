"""Vehicle kinematics, search patterns, workspace checks and the energy budget.

Configurations are planar ``(x, y, psi)``; altitude is constant per
trajectory. Patterns are expressed as waypoint polylines and flown with
constant-rate turning arcs that cut each corner (fly-by turns), then
integrated with explicit Euler.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .drift import SearchArea

TWO_PI = 2.0 * math.pi
DEFAULT_DT = 0.05


def wrap_angle(a):
    """Wrap to (-pi, pi]. Works on scalars and arrays."""
    w = np.pi - np.mod(np.pi - np.asarray(a, float), TWO_PI)
    return float(w) if np.ndim(w) == 0 else w


@dataclass(frozen=True)
class Configuration:
    x: float
    y: float
    psi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi", wrap_angle(self.psi))


@dataclass(frozen=True)
class ControlInput:
    u: float
    omega: float = 0.0


@dataclass(frozen=True)
class ControlSegment:
    t_start: float
    t_end: float
    u: float
    omega: float = 0.0


@dataclass(frozen=True)
class VehicleLimits:
    u_max: float = 30.0
    omega_max: float = 0.5

    def check(self, ctrl: ControlInput) -> None:
        if not 0.0 <= ctrl.u <= self.u_max + 1e-12:
            raise ValueError(f"forward speed {ctrl.u} outside [0, {self.u_max}]")
        if abs(ctrl.omega) > self.omega_max + 1e-12:
            raise ValueError(f"yaw rate {ctrl.omega} exceeds {self.omega_max}")


@dataclass(frozen=True)
class Trajectory:
    """Timed configurations plus the controls applied from each sample to the next.

    ``u`` and ``omega`` may be ``None`` for trajectories loaded from disk.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    altitude: float
    speed: float
    u: np.ndarray | None = None
    omega: np.ndarray | None = None

    def __post_init__(self):
        if len(self.t) < 2:
            raise ValueError("a trajectory needs at least two samples")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for name in ("t", "x", "y", "psi", "u", "omega"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, float)
                v.setflags(write=False)
                object.__setattr__(self, name, v)

    @property
    def t0(self) -> float:
        return float(self.t[0])

    @property
    def tf(self) -> float:
        return float(self.t[-1])

    def __len__(self):
        return len(self.t)

    def positions(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def path_length(self) -> float:
        return float(np.sum(np.hypot(np.diff(self.x), np.diff(self.y))))

    def resample(self, times: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Linear interpolation of position and (unwrapped) heading."""
        times = np.asarray(times, float)
        if times[0] < self.t0 - 1e-9 or times[-1] > self.tf + 1e-9:
            raise ValueError(f"trajectory covers [{self.t0}, {self.tf}], requested "
                             f"[{times[0]}, {times[-1]}]")
        psi = np.interp(times, self.t, np.unwrap(self.psi))
        return np.interp(times, self.t, self.x), np.interp(times, self.t, self.y), wrap_angle(psi)

    def write_csv(self, path) -> None:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time_s", "x_m", "y_m", "psi_rad"])
            for row in zip(self.t, self.x, self.y, self.psi):
                w.writerow([repr(float(v)) for v in row])
        meta = {"altitude_m": self.altitude, "speed_mps": self.speed}
        path.with_name(path.name + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n")

    @classmethod
    def read_csv(cls, path) -> "Trajectory":
        path = Path(path)
        cols = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(path.with_name(path.name + ".meta.json").read_text())
        return cls(cols[:, 0], cols[:, 1], cols[:, 2], cols[:, 3],
                   float(meta["altitude_m"]), float(meta["speed_mps"]))


# ---------------------------------------------------------------------------
# dynamics

def unicycle_step(q: Configuration, ctrl: ControlInput, dt: float) -> Configuration:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    return Configuration(q.x + ctrl.u * math.cos(q.psi) * dt,
                         q.y + ctrl.u * math.sin(q.psi) * dt,
                         q.psi + ctrl.omega * dt)


def integrate_trajectory(q0: Configuration, controls: Sequence[ControlSegment],
                         dt: float = DEFAULT_DT, altitude: float = 100.0,
                         speed: float | None = None, limits: VehicleLimits | None = None) -> Trajectory:
    """Explicit Euler integration of piecewise-constant controls.

    Each segment is split into equal sub-steps no longer than ``dt`` so segment
    boundaries fall on samples. Segments must be contiguous.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not controls:
        raise ValueError("empty control sequence")
    ts, xs, ys, ps, us, ws = [np.array([controls[0].t_start])], [np.array([q0.x])], \
        [np.array([q0.y])], [np.array([q0.psi])], [], []
    x, y, psi = q0.x, q0.y, q0.psi
    t_prev = controls[0].t_start
    for seg in controls:
        if abs(seg.t_start - t_prev) > 1e-9:
            raise ValueError(f"control gap/overlap at t={t_prev} (next segment starts {seg.t_start})")
        if not seg.t_end > seg.t_start:
            raise ValueError("control segment with non-positive duration")
        if limits is not None:
            limits.check(ControlInput(seg.u, seg.omega))
        n = max(1, math.ceil((seg.t_end - seg.t_start) / dt - 1e-9))
        h = (seg.t_end - seg.t_start) / n
        k = np.arange(n)
        head = psi + seg.omega * h * k  # heading at the start of each sub-step
        x_new = x + np.cumsum(seg.u * h * np.cos(head))
        y_new = y + np.cumsum(seg.u * h * np.sin(head))
        psi_new = psi + seg.omega * h * (k + 1)
        ts.append(seg.t_start + h * (k + 1))
        ts[-1][-1] = seg.t_end
        xs.append(x_new)
        ys.append(y_new)
        ps.append(psi_new)
        us.append(np.full(n, seg.u))
        ws.append(np.full(n, seg.omega))
        x, y, psi = float(x_new[-1]), float(y_new[-1]), float(wrap_angle(psi_new[-1]))
        t_prev = seg.t_end
    u = np.concatenate(us + [us[-1][-1:]])
    w = np.concatenate(ws + [ws[-1][-1:]])
    if speed is None:
        speed = float(max(s.u for s in controls))
    return Trajectory(np.concatenate(ts), np.concatenate(xs), np.concatenate(ys),
                      wrap_angle(np.concatenate(ps)), altitude, speed, u, w)


def dynamics_residual(traj: Trajectory) -> np.ndarray:
    """Per-step norm of (q[k+1]-q[k])/dt - f(q[k], u[k], omega[k]).

    Without stored controls, speed and yaw rate are inferred from the samples,
    which leaves the heading/velocity mismatch as the residual.
    """
    h = np.diff(traj.t)
    dx, dy = np.diff(traj.x), np.diff(traj.y)
    dpsi = wrap_angle(np.diff(traj.psi))
    if traj.u is None:
        u = np.hypot(dx, dy) / h
        w = dpsi / h
    else:
        u, w = traj.u[:-1], traj.omega[:-1]
    rx = dx / h - u * np.cos(traj.psi[:-1])
    ry = dy / h - u * np.sin(traj.psi[:-1])
    rw = dpsi / h - w
    return np.sqrt(rx * rx + ry * ry + rw * rw)


@dataclass(frozen=True)
class DynamicsVerdict:
    ok: bool
    max_residual: float
    max_speed: float
    max_yaw_rate: float


def check_dynamics(traj: Trajectory, limits: VehicleLimits, residual_coeff: float = 1.0) -> DynamicsVerdict:
    """Residual bounded by ``residual_coeff * dt`` and speed/yaw-rate within limits."""
    h = np.diff(traj.t)
    res = dynamics_residual(traj)
    speed = np.hypot(np.diff(traj.x), np.diff(traj.y)) / h
    yaw = np.abs(wrap_angle(np.diff(traj.psi))) / h
    ok = (bool(np.all(res <= residual_coeff * h + 1e-9))
          and bool(np.all(speed <= limits.u_max + 1e-9))
          and bool(np.all(yaw <= limits.omega_max + 1e-9)))
    return DynamicsVerdict(ok, float(res.max()), float(speed.max()), float(yaw.max()))


# ---------------------------------------------------------------------------
# patterns

def waypoint_controls(waypoints: np.ndarray, speed: float, omega_max: float,
                      t0: float = 0.0) -> tuple[Configuration, list[ControlSegment]]:
    """Straight legs joined by fly-by arcs of radius ``speed / omega_max``.

    Raises ``ValueError`` when a leg is too short to hold the tangent lengths
    of the arcs at its two ends, or a waypoint asks for a full reversal.
    """
    wp = np.asarray(waypoints, float)
    if len(wp) < 2:
        raise ValueError("need at least two waypoints")
    if not speed > 0:
        raise ValueError("speed must be positive")
    if not omega_max > 0:
        raise ValueError("omega_max must be positive")
    legs = np.diff(wp, axis=0)
    lengths = np.hypot(legs[:, 0], legs[:, 1])
    if np.any(lengths <= 0):
        raise ValueError("repeated waypoint")
    heads = np.arctan2(legs[:, 1], legs[:, 0])
    turns = wrap_angle(np.diff(heads))
    r = speed / omega_max
    if np.any(np.abs(turns) >= math.pi - 1e-9):
        raise ValueError("waypoint sequence reverses direction; no fly-by arc exists")
    tangent = r * np.tan(np.abs(turns) / 2.0)
    cut = np.zeros((len(legs), 2))
    cut[1:, 0] = tangent
    cut[:-1, 1] = tangent
    straight = lengths - cut.sum(axis=1)
    if np.any(straight < -1e-9):
        i = int(np.argmin(straight))
        raise ValueError(f"leg {i} of length {lengths[i]:.3f} m cannot fit turns of radius "
                         f"{r:.3f} m at speed {speed} m/s, omega_max {omega_max} rad/s")
    segs: list[ControlSegment] = []
    t = t0
    for i in range(len(legs)):
        if straight[i] > 1e-9:
            segs.append(ControlSegment(t, t + straight[i] / speed, speed, 0.0))
            t = segs[-1].t_end
        if i < len(turns) and abs(turns[i]) > 1e-12:
            segs.append(ControlSegment(t, t + abs(turns[i]) / omega_max, speed,
                                       math.copysign(omega_max, turns[i])))
            t = segs[-1].t_end
    return Configuration(wp[0, 0], wp[0, 1], heads[0]), segs


def follow_waypoints(waypoints, speed: float, altitude: float, limits: VehicleLimits,
                     dt: float = DEFAULT_DT, t0: float = 0.0) -> Trajectory:
    if speed > limits.u_max:
        raise ValueError(f"speed {speed} exceeds u_max {limits.u_max}")
    q0, segs = waypoint_controls(waypoints, speed, limits.omega_max, t0)
    return integrate_trajectory(q0, segs, dt, altitude, speed, limits)


def lawnmower_waypoints(area: SearchArea, track_spacing: float, turn_radius: float) -> np.ndarray:
    """Tracks parallel to x, evenly spread over the height with spacing <= ``track_spacing``.

    Track ``i`` sits at ``y_min + (i + 1/2) * height / n``; a single centred
    track is used when the height does not exceed the spacing. Turn corners sit
    one turn radius outside the area so arcs start exactly at its edge.
    """
    if not 0 < track_spacing:
        raise ValueError("track_spacing must be positive")
    n = max(1, math.ceil(area.height / track_spacing - 1e-9))
    d = area.height / n
    ys = area.y_min + (np.arange(n) + 0.5) * d
    xl, xr = area.x_min - turn_radius, area.x_max + turn_radius
    pts = [(area.x_min, ys[0])]
    for i, y in enumerate(ys):
        going_right = i % 2 == 0
        if i == n - 1:
            pts.append((area.x_max if going_right else area.x_min, y))
        else:
            x_turn = xr if going_right else xl
            pts.append((x_turn, y))
            pts.append((x_turn, ys[i + 1]))
    return np.array(pts)


def generate_lawnmower(area: SearchArea, track_spacing: float, speed: float, altitude: float,
                       limits: VehicleLimits = VehicleLimits(), dt: float = DEFAULT_DT,
                       t0: float = 0.0) -> Trajectory:
    if speed > limits.u_max:
        raise ValueError(f"speed {speed} exceeds u_max {limits.u_max}")
    r = speed / limits.omega_max
    n = max(1, math.ceil(area.height / track_spacing - 1e-9))
    if n > 1 and area.height / n < 2 * r - 1e-9:
        raise ValueError(f"track spacing {area.height / n:.3f} m is below the turn diameter "
                         f"{2 * r:.3f} m at speed {speed} m/s")
    return follow_waypoints(lawnmower_waypoints(area, track_spacing, r), speed, altitude, limits, dt, t0)


def expanding_square_waypoints(center, leg_increment: float, n_legs: int,
                               heading: float = 0.0) -> np.ndarray:
    """Square spiral corners; leg ``k`` has length ``(k // 2 + 1) * leg_increment``."""
    if not leg_increment > 0:
        raise ValueError("leg_increment must be positive")
    if n_legs < 1:
        raise ValueError("n_legs must be >= 1")
    pts = [np.asarray(center, float)]
    for k in range(n_legs):
        a = heading + k * math.pi / 2
        length = (k // 2 + 1) * leg_increment
        pts.append(pts[-1] + length * np.array([math.cos(a), math.sin(a)]))
    return np.array(pts)


def generate_expanding_square(center, leg_increment: float, speed: float, altitude: float,
                              n_legs: int = 16, limits: VehicleLimits = VehicleLimits(),
                              dt: float = DEFAULT_DT, t0: float = 0.0, heading: float = 0.0) -> Trajectory:
    wp = expanding_square_waypoints(center, leg_increment, n_legs, heading)
    return follow_waypoints(wp, speed, altitude, limits, dt, t0)


def sector_search_waypoints(center, radius: float, n_cycles: int = 2, heading: float = 0.0) -> np.ndarray:
    """Three chords of length ``2 * radius`` through the datum at 120 degree spacing per cycle.

    Each following cycle is rotated by 30 degrees.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if n_cycles < 1:
        raise ValueError("n_cycles must be >= 1")
    c = np.asarray(center, float)
    pts = []
    for cyc in range(n_cycles):
        for j in range(3):
            a = heading + math.radians(30.0 * cyc + 120.0 * j)
            e = np.array([math.cos(a), math.sin(a)])
            pts.extend([c - radius * e, c + radius * e])
    return np.array(pts)


def generate_sector_search(center, radius: float, speed: float, altitude: float,
                           n_cycles: int = 2, limits: VehicleLimits = VehicleLimits(),
                           dt: float = DEFAULT_DT, t0: float = 0.0, heading: float = 0.0) -> Trajectory:
    wp = sector_search_waypoints(center, radius, n_cycles, heading)
    return follow_waypoints(wp, speed, altitude, limits, dt, t0)


def hover(position, duration: float, altitude: float, psi: float = 0.0,
          dt: float = 1.0, t0: float = 0.0) -> Trajectory:
    """Stationary trajectory (zero speed); useful for station-keeping rotorcraft."""
    q0 = Configuration(float(position[0]), float(position[1]), psi)
    return integrate_trajectory(q0, [ControlSegment(t0, t0 + duration, 0.0, 0.0)], dt, altitude, 0.0)


def coverage_fraction(traj: Trajectory, area: SearchArea, fp: tuple[float, float],
                      cell: float = 1.0, max_gap: float | None = None) -> float:
    """Fraction of ``area`` cells (centres) swept by the oriented footprint.

    ``fp`` is ``(fs_h, fs_v)``: cross-track and along-track extents. Samples
    are densified so consecutive footprints are at most ``max_gap`` apart
    (default: one cell).
    """
    from .kernels import raster_cover

    gap = cell if max_gap is None else max_gap
    seg = np.hypot(np.diff(traj.x), np.diff(traj.y))
    n_sub = np.maximum(1, np.ceil(seg / gap)).astype(int)
    s = np.concatenate([np.arange(n) / n + k for k, n in enumerate(n_sub)] + [[len(seg)]])
    idx = np.arange(len(traj.t))
    xs = np.interp(s, idx, traj.x)
    ys = np.interp(s, idx, traj.y)
    psis = wrap_angle(np.interp(s, idx, np.unwrap(traj.psi)))
    nx = max(1, int(round(area.width / cell)))
    ny = max(1, int(round(area.height / cell)))
    grid = raster_cover(np.ascontiguousarray(xs), np.ascontiguousarray(ys), np.ascontiguousarray(psis),
                        fp[1] / 2.0, fp[0] / 2.0, area.x_min, area.y_min, cell, nx, ny)
    return float(grid.mean())


# ---------------------------------------------------------------------------
# obstacles

@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float
    active: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    def entry(self, p0: np.ndarray, p1: np.ndarray):
        """Entry parameter s in [0, 1] per segment p0 + s (p1 - p0), and exit; NaN if disjoint."""
        d = p1 - p0
        f = p0 - np.asarray(self.center, float)
        a = np.einsum("ij,ij->i", d, d)
        b = np.einsum("ij,ij->i", d, f)
        c = np.einsum("ij,ij->i", f, f) - self.radius ** 2
        disc = b * b - a * c
        with np.errstate(divide="ignore", invalid="ignore"):
            root = np.sqrt(np.maximum(disc, 0.0))
            s_in = np.where(a > 0, (-b - root) / a, np.where(c <= 0, 0.0, np.inf))
            s_out = np.where(a > 0, (-b + root) / a, np.where(c <= 0, 1.0, -np.inf))
        s_in = np.where(disc < 0, np.inf, s_in)
        s_out = np.where(disc < 0, -np.inf, s_out)
        return np.maximum(s_in, 0.0), np.minimum(s_out, 1.0)


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple[tuple[float, float], ...]
    active: tuple[float, float] | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, float)
        if v.ndim != 2 or len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.all(np.abs(cross) < 1e-12):
            raise ValueError("polygon vertices are collinear")
        if not (np.all(cross >= -1e-12) or np.all(cross <= 1e-12)):
            raise ValueError("polygon is not convex")
        object.__setattr__(self, "vertices", tuple(map(tuple, v)))

    def entry(self, p0: np.ndarray, p1: np.ndarray):
        """Cyrus-Beck clip of each segment against the closed polygon."""
        v = np.asarray(self.vertices, float)
        e = np.roll(v, -1, axis=0) - v
        area2 = np.sum(v[:, 0] * np.roll(v, -1, axis=0)[:, 1] - np.roll(v, -1, axis=0)[:, 0] * v[:, 1])
        normals = np.column_stack([e[:, 1], -e[:, 0]]) * (1.0 if area2 > 0 else -1.0)  # outward
        d = p1 - p0
        s_lo = np.zeros(len(p0))
        s_hi = np.ones(len(p0))
        for nrm, vert in zip(normals, v):
            num = (p0 - vert) @ nrm  # <= 0 means inside this half-plane
            den = d @ nrm
            with np.errstate(divide="ignore", invalid="ignore"):
                s = -num / den
            entering = den < 0
            leaving = den > 0
            parallel_out = (den == 0) & (num > 0)
            s_lo = np.where(entering, np.maximum(s_lo, s), s_lo)
            s_hi = np.where(leaving, np.minimum(s_hi, s), s_hi)
            s_hi = np.where(parallel_out, -np.inf, s_hi)
        return s_lo, s_hi


@dataclass(frozen=True)
class ObstacleRegion:
    shapes: tuple = ()


@dataclass(frozen=True)
class FreeSpaceVerdict:
    ok: bool
    time: float | None = None
    position: tuple[float, float] | None = None
    shape_index: int | None = None


def check_free_space(traj: Trajectory, obstacles: ObstacleRegion) -> FreeSpaceVerdict:
    """Exact test of every trajectory segment against each closed obstacle.

    Touching a boundary counts as a collision. Returns the earliest violation.
    """
    p = traj.positions()
    p0, p1 = p[:-1], p[1:]
    t0, t1 = traj.t[:-1], traj.t[1:]
    best = None
    for idx, shape in enumerate(obstacles.shapes):
        s_lo, s_hi = shape.entry(p0, p1)
        if shape.active is not None:
            a, b = shape.active
            span = t1 - t0
            s_lo = np.maximum(s_lo, (a - t0) / span)
            s_hi = np.minimum(s_hi, (b - t0) / span)
        hit = np.nonzero(s_lo <= s_hi)[0]
        if len(hit) == 0:
            continue
        k = int(hit[0])
        s = float(np.clip(s_lo[k], 0.0, 1.0))
        t = float(t0[k] + s * (t1[k] - t0[k]))
        if best is None or t < best.time:
            pos = p0[k] + s * (p1[k] - p0[k])
            best = FreeSpaceVerdict(False, t, (float(pos[0]), float(pos[1])), idx)
    return best or FreeSpaceVerdict(True)


# ---------------------------------------------------------------------------
# energy

@dataclass(frozen=True)
class EnergyModel:
    """Constant power (W) or a piecewise-constant profile of ``(t_start, t_end, watts)``."""

    power: float | tuple[tuple[float, float, float], ...]
    e_total: float

    def __post_init__(self):
        if not self.e_total > 0:
            raise ValueError("e_total must be positive")
        if isinstance(self.power, (int, float)):
            if self.power < 0:
                raise ValueError("power must be non-negative")
        else:
            prof = tuple((float(a), float(b), float(p)) for a, b, p in self.power)
            if any(p < 0 for _, _, p in prof):
                raise ValueError("power must be non-negative")
            if any(b <= a for a, b, _ in prof):
                raise ValueError("profile segments need positive duration")
            object.__setattr__(self, "power", tuple(sorted(prof)))

    @property
    def is_constant(self) -> bool:
        return isinstance(self.power, (int, float))


def energy_used(energy: EnergyModel, t0: float, tf: float) -> float:
    if not tf > t0:
        raise ValueError("need tf > t0")
    if energy.is_constant:
        return float(energy.power) * (tf - t0)
    total, covered = 0.0, t0
    for a, b, p in energy.power:
        if b <= covered:
            continue
        if a > covered + 1e-9:
            raise ValueError(f"power profile gap between {covered} and {a}")
        hi = min(b, tf)
        total += p * (hi - max(a, covered))
        covered = hi
        if covered >= tf:
            return total
    raise ValueError(f"power profile ends at {covered}, before tf={tf}")


@dataclass(frozen=True)
class EnergyVerdict:
    ok: bool
    used: float
    e_total: float


def check_energy(energy: EnergyModel, t0: float, tf: float) -> EnergyVerdict:
    used = energy_used(energy, t0, tf)
    return EnergyVerdict(used <= energy.e_total, used, energy.e_total)


def depletion_time(energy: EnergyModel, t0: float) -> float:
    """Time at which cumulative consumption from ``t0`` reaches ``e_total`` (inf if never)."""
    if energy.is_constant:
        return t0 + energy.e_total / energy.power if energy.power > 0 else math.inf
    left, covered = energy.e_total, t0
    for a, b, p in energy.power:
        if b <= covered:
            continue
        if a > covered + 1e-9:
            raise ValueError(f"power profile gap between {covered} and {a}")
        span = b - max(a, covered)
        if p * span >= left:
            return max(a, covered) + (left / p if p > 0 else math.inf)
        left -= p * span
        covered = b
    return math.inf
