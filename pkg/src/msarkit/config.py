"""YAML tool configuration with field-path validation.

Angles are given in degrees and converted on load; everything else is SI.
Every model invariant is checked here, before any computation runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .drift import EnvironmentConditions, InitialUncertainty, SearchArea
from .mission import ConvexPolygon, Disc, EnergyModel, ObstacleRegion, VehicleLimits
from .sensor import CameraSpec, TargetModel

PATTERNS = ("lawnmower", "expanding_square", "sector", "hover", "file")
_MISSING = object()


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def reference_config_path() -> Path:
    return Path(str(resources.files("msarkit") / "configs" / "reference.yaml"))


def _get(block: dict, path: str, key: str, default: Any = _MISSING):
    if not isinstance(block, dict):
        raise ConfigError(path, "expected a mapping")
    if key not in block or block[key] is None:
        if default is _MISSING:
            raise ConfigError(f"{path}.{key}", "required field is missing")
        return default
    return block[key]


def _num(block, path, key, default=_MISSING, positive=False, nonneg=False) -> float:
    v = _get(block, path, key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", "must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{path}.{key}", f"must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(f"{path}.{key}", f"must be non-negative, got {v}")
    return v


def _int(block, path, key, default=_MISSING, minimum=None) -> int:
    v = _get(block, path, key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}.{key}", f"must be >= {minimum}, got {v}")
    return v


def _vec2(block, path, key, default=_MISSING) -> tuple[float, float]:
    v = _get(block, path, key, default)
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v)):
        raise ConfigError(f"{path}.{key}", f"expected a pair of numbers, got {v!r}")
    return (float(v[0]), float(v[1]))


def _build(path, ctor, *args, **kwargs):
    try:
        return ctor(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass(frozen=True)
class MissionConfig:
    pattern: str
    speed: float
    altitude: float | str  # metres or "auto"
    n_targets: int
    t0: float
    tf: float | None
    energy: EnergyModel | None
    limits: VehicleLimits
    detection_interval: float | None
    survival_time: float | None
    rescue_model: str
    rescue_delay: float
    altitude_range: tuple[float, float]
    area: SearchArea | None  # None: derive from the drift simulation
    obstacles: ObstacleRegion
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    particles: int = 10_000
    m_runs: int = 200
    drift_dt: float = 10.0
    traj_dt: float = 0.05
    sim_dt: float = 1.0
    area_quantile: float = 1.0
    workers: int = 1


@dataclass(frozen=True)
class ToolConfig:
    camera: CameraSpec
    target: TargetModel
    environment: EnvironmentConditions
    uncertainty: InitialUncertainty
    lead_time: float
    mission: MissionConfig
    run: RunConfig
    source: str = ""


def _camera(raw) -> CameraSpec:
    p = "camera"
    b = _get(raw, "", "camera")
    return _build(p, CameraSpec.from_degrees,
                  _num(b, p, "fov_h_deg", positive=True), _num(b, p, "fov_v_deg", positive=True),
                  _int(b, p, "px_h", minimum=1), _int(b, p, "px_v", minimum=1),
                  _num(b, p, "framerate_hz", positive=True), _num(b, p, "emissivity", 0.98))


def _target(raw) -> TargetModel:
    p = "target"
    b = _get(raw, "", "target", {})
    n50 = _get(b, p, "n50", [0.75, 3.0, 6.0])
    if not isinstance(n50, (list, tuple)) or len(n50) != 3:
        raise ConfigError(f"{p}.n50", "expected [detection, recognition, identification]")
    return _build(p, TargetModel, _num(b, p, "width_m", 0.5), _num(b, p, "height_m", 0.5),
                  _num(b, p, "d_c_m", 0.5), *map(float, n50))


def _environment(raw) -> EnvironmentConditions:
    p = "environment"
    b = _get(raw, "", "environment", {})
    return _build(p, EnvironmentConditions, _vec2(b, p, "current_mps", (0.0, 0.0)),
                  _vec2(b, p, "wind_mps", (0.0, 0.0)), _num(b, p, "leeway_fraction", 0.0),
                  _num(b, p, "diffusion_m2ps", 0.0))


def _uncertainty(raw) -> tuple[InitialUncertainty, float]:
    p = "uncertainty"
    b = _get(raw, "", "uncertainty")
    shape = _get(b, p, "shape", "square")
    if shape not in ("square", "disk"):
        raise ConfigError(f"{p}.shape", f"must be 'square' or 'disk', got {shape!r}")
    u = _build(p, InitialUncertainty, _vec2(b, p, "center_m", (0.0, 0.0)), shape,
               _num(b, p, "size_m", positive=True))
    return u, _num(b, p, "lead_time_s", 0.0, nonneg=True)


def _energy(b, p) -> EnergyModel | None:
    power = _get(b, p, "power_w", None)
    if power is None:
        return None
    e_total = _num(b, p, "e_total_j", positive=True)
    if isinstance(power, list):
        prof = []
        for i, seg in enumerate(power):
            if not isinstance(seg, (list, tuple)) or len(seg) != 3:
                raise ConfigError(f"{p}.power_w[{i}]", "expected [t_start, t_end, watts]")
            prof.append(tuple(float(v) for v in seg))
        return _build(f"{p}.power_w", EnergyModel, tuple(prof), e_total)
    return _build(f"{p}.power_w", EnergyModel, _num(b, p, "power_w", nonneg=True), e_total)


def _obstacles(b, p) -> ObstacleRegion:
    items = _get(b, p, "obstacles", [])
    shapes = []
    for i, item in enumerate(items):
        q = f"{p}.obstacles[{i}]"
        if not isinstance(item, dict) or len(item) != 1:
            raise ConfigError(q, "expected {disc: ...} or {polygon: ...}")
        kind, body = next(iter(item.items()))
        active = _get(body, f"{q}.{kind}", "active_s", None)
        if active is not None:
            active = _vec2(body, f"{q}.{kind}", "active_s")
        if kind == "disc":
            shapes.append(_build(q, Disc, _vec2(body, f"{q}.disc", "center_m"),
                                 _num(body, f"{q}.disc", "radius_m", positive=True), active))
        elif kind == "polygon":
            verts = _get(body, f"{q}.polygon", "vertices_m")
            shapes.append(_build(q, ConvexPolygon, tuple(tuple(map(float, v)) for v in verts), active))
        else:
            raise ConfigError(q, f"unknown obstacle kind {kind!r}")
    return ObstacleRegion(tuple(shapes))


def _mission(raw) -> MissionConfig:
    p = "mission"
    b = _get(raw, "", "mission")
    pattern = _get(b, p, "pattern")
    if pattern not in PATTERNS:
        raise ConfigError(f"{p}.pattern", f"must be one of {PATTERNS}, got {pattern!r}")
    altitude = _get(b, p, "altitude_m", "auto")
    if altitude != "auto":
        altitude = _num(b, p, "altitude_m", positive=True)
    speed = _num(b, p, "speed_mps", 0.0 if pattern in ("hover", "file") else _MISSING, nonneg=True)
    if pattern not in ("hover", "file") and not speed > 0:
        raise ConfigError(f"{p}.speed_mps", "must be positive for a moving pattern")
    limits = _build(p, VehicleLimits, _num(b, p, "u_max_mps", 30.0, positive=True),
                    _num(b, p, "omega_max_radps", 0.5, positive=True))
    if speed > limits.u_max:
        raise ConfigError(f"{p}.speed_mps", f"exceeds u_max_mps ({limits.u_max})")
    rescue = _get(b, p, "rescue", {"model": "instant"})
    model = _get(rescue, f"{p}.rescue", "model", "instant")
    if model not in ("instant", "delay"):
        raise ConfigError(f"{p}.rescue.model", f"must be 'instant' or 'delay', got {model!r}")
    delay = _num(rescue, f"{p}.rescue", "delay_s", 0.0, nonneg=True)
    h_rng = _vec2(b, p, "altitude_range_m", (10.0, 1000.0))
    if not 0 < h_rng[0] < h_rng[1]:
        raise ConfigError(f"{p}.altitude_range_m", "need 0 < min < max")
    area_raw = _get(b, p, "area", "drift")
    area = None
    if area_raw != "drift":
        q = f"{p}.area"
        area = _build(q, SearchArea, _num(area_raw, q, "x_min"), _num(area_raw, q, "y_min"),
                      _num(area_raw, q, "x_max"), _num(area_raw, q, "y_max"))
    t0 = _num(b, p, "t0_s", 0.0)
    tf = _num(b, p, "tf_s", None)
    if tf is not None and not tf > t0:
        raise ConfigError(f"{p}.tf_s", "must exceed t0_s")

    params: dict = {"heading_deg": _num(b, p, "heading_deg", 0.0)}
    if pattern == "lawnmower":
        ts = _get(b, p, "track_spacing_m", "auto")
        params["track_spacing"] = ts if ts == "auto" else _num(b, p, "track_spacing_m", positive=True)
    elif pattern == "expanding_square":
        li = _get(b, p, "leg_increment_m", "auto")
        params["leg_increment"] = li if li == "auto" else _num(b, p, "leg_increment_m", positive=True)
        params["n_legs"] = _int(b, p, "n_legs", 16, minimum=1)
    elif pattern == "sector":
        params["radius"] = _num(b, p, "radius_m", positive=True)
        params["n_cycles"] = _int(b, p, "n_cycles", 2, minimum=1)
    elif pattern == "hover":
        params["duration"] = _num(b, p, "duration_s", positive=True)
        params["position"] = _get(b, p, "position_m", None)
        if params["position"] is not None:
            params["position"] = _vec2(b, p, "position_m")
    elif pattern == "file":
        params["trajectory_csv"] = str(_get(b, p, "trajectory_csv"))

    return MissionConfig(
        pattern=pattern, speed=speed, altitude=altitude,
        n_targets=_int(b, p, "n_targets", 1, minimum=1), t0=t0, tf=tf,
        energy=_energy(b, p), limits=limits,
        detection_interval=_num(b, p, "detection_interval_s", None, positive=True),
        survival_time=_num(b, p, "survival_time_s", None, positive=True),
        rescue_model=model, rescue_delay=delay, altitude_range=h_rng, area=area,
        obstacles=_obstacles(b, p), params=params)


def _run(raw) -> RunConfig:
    p = "run"
    b = _get(raw, "", "run", {})
    q = _num(b, p, "area_quantile", 1.0)
    if not 0 < q <= 1:
        raise ConfigError(f"{p}.area_quantile", "must lie in (0, 1]")
    return RunConfig(seed=_int(b, p, "seed", 0, minimum=0),
                     particles=_int(b, p, "particles", 10_000, minimum=1),
                     m_runs=_int(b, p, "m_runs", 200, minimum=2),
                     drift_dt=_num(b, p, "drift_dt_s", 10.0, positive=True),
                     traj_dt=_num(b, p, "traj_dt_s", 0.05, positive=True),
                     sim_dt=_num(b, p, "sim_dt_s", 1.0, positive=True),
                     area_quantile=q,
                     workers=_int(b, p, "workers", 1, minimum=1))


def parse_config(raw: dict, source: str = "") -> ToolConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a mapping")
    uncertainty, lead = _uncertainty(raw)
    return ToolConfig(camera=_camera(raw), target=_target(raw), environment=_environment(raw),
                      uncertainty=uncertainty, lead_time=lead, mission=_mission(raw), run=_run(raw),
                      source=source)


def load_config(path) -> ToolConfig:
    path = Path(path)
    text = path.read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<root>", f"invalid YAML: {exc}") from None
    return parse_config(raw, str(path))
