"""Particle leeway drift: Euler-Maruyama advection plus horizontal diffusion.

Positions are in a local flat tangent plane (meters). Each integration step
draws its Gaussian increments from a substream keyed by (seed, step index),
and particle ``i`` always consumes row ``i`` of that draw, so the noise seen
by any particle depends only on (seed, particle index, step index).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_INIT_KEY = 0
_STEP_KEY = 1


@dataclass(frozen=True)
class EnvironmentConditions:
    current: tuple[float, float] = (0.0, 0.0)
    wind: tuple[float, float] = (0.0, 0.0)
    leeway_fraction: float = 0.0
    diffusion: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.leeway_fraction <= 0.1:
            raise ValueError(f"leeway_fraction must lie in [0, 0.1], got {self.leeway_fraction!r}")
        if self.diffusion < 0:
            raise ValueError(f"diffusion must be non-negative, got {self.diffusion!r}")

    @property
    def drift_velocity(self) -> np.ndarray:
        return np.asarray(self.current, float) + self.leeway_fraction * np.asarray(self.wind, float)


@dataclass(frozen=True)
class InitialUncertainty:
    center: tuple[float, float] = (0.0, 0.0)
    shape: str = "square"
    size: float = 800.0  # side for a square, radius for a disk

    def __post_init__(self):
        if self.shape not in ("square", "disk"):
            raise ValueError(f"shape must be 'square' or 'disk', got {self.shape!r}")
        if not self.size > 0:
            raise ValueError("uncertainty size must be positive")

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        c = np.asarray(self.center, float)
        if self.shape == "square":
            return c + rng.uniform(-self.size / 2, self.size / 2, size=(count, 2))
        r = self.size * np.sqrt(rng.uniform(0.0, 1.0, size=count))
        th = rng.uniform(0.0, 2 * math.pi, size=count)
        return c + np.column_stack([r * np.cos(th), r * np.sin(th)])


@dataclass(frozen=True)
class ParticleEnsemble:
    positions: np.ndarray = field(repr=False)
    time: float
    seed: int
    step_index: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, float)
        if pos.ndim != 2 or pos.shape[1] != 2 or len(pos) < 1:
            raise ValueError("positions must be a non-empty (count, 2) array")
        if self.time < 0:
            raise ValueError("time must be non-negative")
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def count(self) -> int:
        return len(self.positions)

    def centroid(self) -> np.ndarray:
        return self.positions.mean(axis=0)


@dataclass(frozen=True)
class SearchArea:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError(
                f"degenerate search area: width={self.x_max - self.x_min}, height={self.y_max - self.y_min}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    @classmethod
    def centered(cls, center, width, height):
        cx, cy = center
        return cls(cx - width / 2, cy - height / 2, cx + width / 2, cy + height / 2)


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def init_ensemble(uncertainty: InitialUncertainty, count: int, seed: int) -> ParticleEnsemble:
    if count < 1:
        raise ValueError("particle count must be >= 1")
    pos = uncertainty.sample(count, _rng(seed, _INIT_KEY))
    return ParticleEnsemble(pos, 0.0, seed, 0)


def step(ensemble: ParticleEnsemble, env: EnvironmentConditions, dt: float) -> ParticleEnsemble:
    """Advance every particle by ``dt`` seconds."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    pos = ensemble.positions + env.drift_velocity * dt
    if env.diffusion > 0:
        eta = _rng(ensemble.seed, _STEP_KEY, ensemble.step_index).standard_normal((ensemble.count, 2))
        pos = pos + math.sqrt(2.0 * env.diffusion * dt) * eta
    return ParticleEnsemble(pos, ensemble.time + dt, ensemble.seed, ensemble.step_index + 1)


def simulate(ensemble: ParticleEnsemble, env: EnvironmentConditions, duration: float,
             dt: float = 10.0, snapshots: bool = False):
    """Run ``ceil(duration / dt)`` steps; the last one is shortened to land on ``duration``.

    Returns the final ensemble, or ``(final, [ensemble at each step incl. start])``
    when ``snapshots`` is set.
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if duration < dt:
        raise ValueError("duration must be at least one step")
    n = math.ceil(duration / dt - 1e-9)
    t_end = ensemble.time + duration
    series = [ensemble]
    for _ in range(n):
        h = min(dt, t_end - ensemble.time)
        ensemble = step(ensemble, env, h)
        if snapshots:
            series.append(ensemble)
    return (ensemble, series) if snapshots else ensemble


def bounding_area(ensemble: ParticleEnsemble, quantile: float = 1.0) -> SearchArea:
    """Axis-aligned box holding the central ``quantile`` fraction per axis."""
    if not 0.0 < quantile <= 1.0:
        raise ValueError(f"quantile must lie in (0, 1], got {quantile!r}")
    pos = ensemble.positions
    if quantile == 1.0:
        lo, hi = pos.min(axis=0), pos.max(axis=0)
    else:
        tail = 0.5 * (1.0 - quantile)
        lo, hi = np.quantile(pos, [tail, 1.0 - tail], axis=0)
    return SearchArea(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def drift_paths(start: np.ndarray, env: EnvironmentConditions, times: np.ndarray,
                rng: np.random.Generator) -> np.ndarray:
    """Positions of independent drifting objects sampled on ``times``.

    Returns shape ``(len(times), count, 2)``; row 0 equals ``start``. Noise is
    drawn step-major, so two calls sharing a generator state and a time grid
    prefix produce identical paths over that prefix.
    """
    start = np.asarray(start, float)
    dts = np.diff(np.asarray(times, float))
    inc = np.empty((len(dts), len(start), 2))
    inc[:] = (env.drift_velocity[None, :] * dts[:, None])[:, None, :]
    if env.diffusion > 0 and len(dts):
        eta = rng.standard_normal((len(dts), len(start), 2))
        inc += np.sqrt(2.0 * env.diffusion * dts)[:, None, None] * eta
    out = np.empty((len(dts) + 1, len(start), 2))
    out[0] = start
    np.cumsum(inc, axis=0, out=out[1:])
    out[1:] += start
    return out


def write_snapshots_csv(path, series) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "particle_id", "x_m", "y_m"])
        for ens in series:
            t = repr(float(ens.time))
            for i, (x, y) in enumerate(ens.positions):
                w.writerow([t, i, repr(float(x)), repr(float(y))])


def write_area_csv(path, series, quantile: float = 1.0) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "width_m", "height_m"])
        for ens in series:
            a = bounding_area(ens, quantile)
            w.writerow([repr(float(ens.time)), repr(a.width), repr(a.height)])


def read_area_csv(path) -> list[tuple[float, float, float]]:
    rows = []
    with open(Path(path), newline="") as fh:
        for r in csv.DictReader(fh):
            rows.append((float(r["time_s"]), float(r["width_m"]), float(r["height_m"])))
    return rows
