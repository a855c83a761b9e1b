"""Monte Carlo estimate of E[N_saved(t)] and the time-integrated rescue objective.

One run samples target start positions, drifts them, flies the vehicle
footprint over them and draws a Bernoulli(POD) per detection opportunity.
Randomness is hierarchical: ``master_seed -> run -> target -> look``. Target
placement and drift come from a generator keyed by (master_seed, run); look
``k`` of target ``i`` compares a counter-addressed uniform against POD, so
scenarios sharing a master seed are coupled draw for draw.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .drift import EnvironmentConditions, InitialUncertainty, drift_paths
from .mission import (DynamicsVerdict, EnergyModel, EnergyVerdict, FreeSpaceVerdict, ObstacleRegion,
                      Trajectory, VehicleLimits, check_dynamics, check_energy, check_free_space)
from .sensor import CameraSpec, TargetModel, ViewGeometry, footprint, pod_at_altitude

MAX_SERIES_POINTS = 10_000
_PLACEMENT_KEY = 0
_LOOK_KEY = 1


@dataclass(frozen=True)
class MissionScenario:
    n_targets: int
    uncertainty: InitialUncertainty
    env: EnvironmentConditions
    camera: CameraSpec
    target: TargetModel
    trajectory: Trajectory
    t0: float
    tf: float
    master_seed: int = 0
    detection_interval: float | None = None  # None: footprint transit time fs_v / speed
    survival_time: float | None = None  # measured from the accident, i.e. t0 - lead_time
    rescue_model: str = "instant"
    rescue_delay: float = 0.0
    lead_time: float = 0.0  # drift before the search starts at t0
    sim_dt: float = 1.0
    gsd_axis: str = "horizontal"
    obstacles: ObstacleRegion = field(default_factory=ObstacleRegion)
    energy: EnergyModel | None = None
    limits: VehicleLimits = field(default_factory=VehicleLimits)
    residual_coeff: float = 1.0

    def __post_init__(self):
        if self.n_targets < 1:
            raise ValueError("n_targets must be >= 1")
        if not self.tf > self.t0:
            raise ValueError("need tf > t0")
        if self.detection_interval is not None and not self.detection_interval > 0:
            raise ValueError("detection_interval must be positive")
        if self.survival_time is not None and not self.survival_time > 0:
            raise ValueError("survival_time must be positive")
        if self.rescue_model not in ("instant", "delay"):
            raise ValueError("rescue_model must be 'instant' or 'delay'")
        if self.rescue_delay < 0:
            raise ValueError("rescue_delay must be non-negative")
        if self.lead_time < 0:
            raise ValueError("lead_time must be non-negative")
        if not self.sim_dt > 0:
            raise ValueError("sim_dt must be positive")
        if self.trajectory.t0 > self.t0 + 1e-9 or self.trajectory.tf < self.tf - 1e-9:
            raise ValueError(f"trajectory covers [{self.trajectory.t0}, {self.trajectory.tf}] "
                             f"but the mission needs [{self.t0}, {self.tf}]")

    @property
    def view(self) -> ViewGeometry:
        return ViewGeometry(self.trajectory.altitude)

    @property
    def pod(self) -> float:
        return pod_at_altitude(self.camera, self.target, self.view, "detection", self.gsd_axis)

    @property
    def footprint(self) -> tuple[float, float]:
        return footprint(self.camera, self.view)

    @property
    def interval(self) -> float:
        if self.detection_interval is not None:
            return self.detection_interval
        if self.trajectory.speed <= 0:
            raise ValueError("detection_interval is required for a stationary vehicle")
        return self.footprint[1] / self.trajectory.speed

    @property
    def delay(self) -> float:
        return self.rescue_delay if self.rescue_model == "delay" else 0.0

    @property
    def deadline(self) -> float:
        if self.survival_time is None:
            return math.inf
        return self.t0 - self.lead_time + self.survival_time

    def time_grid(self) -> np.ndarray:
        span = self.tf - self.t0
        n = math.ceil(span / self.sim_dt - 1e-9) + 1
        n = min(max(n, 2), MAX_SERIES_POINTS)
        return np.linspace(self.t0, self.tf, n)

    def echo(self) -> dict:
        """Plain-data summary for result files."""
        return {
            "n_targets": self.n_targets,
            "t0": self.t0,
            "tf": self.tf,
            "master_seed": self.master_seed,
            "altitude_m": self.trajectory.altitude,
            "speed_mps": self.trajectory.speed,
            "pod": self.pod,
            "footprint_m": list(self.footprint),
            "detection_interval_s": self.interval,
            "survival_time_s": self.survival_time,
            "rescue_model": self.rescue_model,
            "rescue_delay_s": self.delay,
            "lead_time_s": self.lead_time,
            "sim_dt_s": self.sim_dt,
            "uncertainty": asdict(self.uncertainty),
            "environment": {k: (list(v) if isinstance(v, tuple) else v)
                            for k, v in asdict(self.env).items()},
        }


@dataclass(frozen=True)
class RunResult:
    run_index: int
    detect_time: np.ndarray  # NaN where never detected
    save_time: np.ndarray  # NaN where not saved within the horizon
    looks: np.ndarray

    @property
    def saved(self) -> np.ndarray:
        return ~np.isnan(self.save_time)


def _run_rng(scenario: MissionScenario, run_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(scenario.master_seed,
                                                        spawn_key=(run_index, _PLACEMENT_KEY)))


def _look_key(scenario: MissionScenario, run_index: int) -> int:
    ss = np.random.SeedSequence(scenario.master_seed, spawn_key=(run_index, _LOOK_KEY))
    return int(ss.generate_state(1, np.uint64)[0])


class _Prepared:
    """Per-scenario quantities shared by every run."""

    def __init__(self, scenario: MissionScenario):
        self.scenario = scenario
        self.times = scenario.time_grid()
        self.vx, self.vy, self.vpsi = (np.ascontiguousarray(a) for a in scenario.trajectory.resample(self.times))
        fs_h, fs_v = scenario.footprint
        self.half_cross, self.half_along = fs_h / 2.0, fs_v / 2.0
        self.pod = scenario.pod
        self.interval = scenario.interval

    def run(self, run_index: int) -> RunResult:
        sc = self.scenario
        rng = _run_rng(sc, run_index)
        start = sc.uncertainty.sample(sc.n_targets, rng)
        if sc.lead_time > 0:
            start = drift_paths(start, sc.env, np.array([0.0, sc.lead_time]), rng)[-1]
        paths = drift_paths(start, sc.env, self.times, rng)
        tx = np.ascontiguousarray(paths[:, :, 0])
        ty = np.ascontiguousarray(paths[:, :, 1])
        det, save, looks = kernels.scan_run(self.times, self.vx, self.vy, self.vpsi, tx, ty,
                                            self.half_along, self.half_cross, self.pod, self.interval,
                                            _look_key(sc, run_index), sc.deadline, sc.delay, sc.tf)
        return RunResult(run_index, det, save, looks)


def simulate_run(scenario: MissionScenario, run_index: int) -> RunResult:
    return _Prepared(scenario).run(run_index)


def _save_matrix(scenario: MissionScenario, start: int, stop: int) -> np.ndarray:
    prep = _Prepared(scenario)
    return np.stack([prep.run(r).save_time for r in range(start, stop)])


def _all_save_times(scenario: MissionScenario, m_runs: int, workers: int) -> np.ndarray:
    if workers <= 1 or m_runs < 2 * workers:
        return _save_matrix(scenario, 0, m_runs)
    bounds = np.linspace(0, m_runs, workers + 1).astype(int)
    with ProcessPoolExecutor(workers) as pool:
        parts = pool.map(_save_matrix, [scenario] * workers, bounds[:-1], bounds[1:])
        # map preserves submission order, so the reduction is schedule independent
        return np.concatenate(list(parts))


@dataclass(frozen=True)
class SavedSeries:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    m_runs: int

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time_s", "expected_saved", "stderr"])
            for row in zip(self.times, self.mean, self.stderr):
                w.writerow([repr(float(v)) for v in row])


def _series_from_saves(times: np.ndarray, saves: np.ndarray) -> SavedSeries:
    m = len(saves)
    counts = np.zeros((m, len(times)))
    for r in range(m):
        s = saves[r][~np.isnan(saves[r])]
        idx = np.searchsorted(times, s, side="left")
        np.add.at(counts[r], idx[idx < len(times)], 1.0)
    counts = np.cumsum(counts, axis=1)
    mean = counts.mean(axis=0)
    stderr = counts.std(axis=0, ddof=1) / math.sqrt(m) if m > 1 else np.zeros_like(mean)
    return SavedSeries(times, mean, stderr, m)


def expected_saved_series(scenario: MissionScenario, m_runs: int, workers: int = 1) -> SavedSeries:
    """Pointwise mean and standard error of N_saved(t) over ``m_runs`` runs."""
    if m_runs < 2:
        raise ValueError("m_runs must be >= 2")
    saves = _all_save_times(scenario, m_runs, workers)
    return _series_from_saves(scenario.time_grid(), saves)


def objective_j(times, expected, n_targets: int, t0: float, tf: float, method: str = "trapezoid") -> float:
    """(1/N) * integral over [t0, tf] of (N - E[N_saved](t)) dt.

    ``trapezoid`` applies the trapezoidal rule on the series grid; repeat a
    jump time in the grid to represent a step exactly. ``step`` treats the
    series as right-continuous and piecewise constant between grid points.
    """
    t = np.asarray(times, float)
    e = np.asarray(expected, float)
    if len(t) == 0:
        raise ValueError("empty series")
    if len(t) != len(e):
        raise ValueError("times and expected differ in length")
    if abs(t[0] - t0) > 1e-9 or abs(t[-1] - tf) > 1e-9:
        raise ValueError(f"series spans [{t[0]}, {t[-1]}], expected [{t0}, {tf}]")
    if len(t) == 1:
        return 0.0
    gap = n_targets - e
    h = np.diff(t)
    if method == "step":
        total = float(np.sum(gap[:-1] * h))
    elif method == "trapezoid":
        total = float(np.sum(0.5 * (gap[:-1] + gap[1:]) * h))
    else:
        raise ValueError(f"unknown integration method {method!r}")
    return total / n_targets


def per_run_objective(saves: np.ndarray, t0: float, tf: float) -> np.ndarray:
    """Exact per-run objective from save times (NaN counts as never saved)."""
    s = np.where(np.isnan(saves), tf, np.minimum(saves, tf))
    return np.mean(s - t0, axis=1)


@dataclass(frozen=True)
class EvalResult:
    series: SavedSeries
    j: float
    j_stderr: float
    m_runs: int
    free_space: FreeSpaceVerdict
    dynamics: DynamicsVerdict
    energy: EnergyVerdict | None
    scenario: dict

    @property
    def feasible(self) -> bool:
        return self.free_space.ok and self.dynamics.ok and (self.energy is None or self.energy.ok)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "J": self.j,
            "J_stderr": self.j_stderr,
            "m_runs": self.m_runs,
            "expected_saved_tf": float(self.series.mean[-1]),
            "expected_saved_tf_stderr": float(self.series.stderr[-1]),
            "feasible": self.feasible,
            "constraints": {
                "free_space": asdict(self.free_space),
                "dynamics": asdict(self.dynamics),
                "energy": None if self.energy is None else asdict(self.energy),
            },
        }

    def write_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def evaluate_mission(scenario: MissionScenario, m_runs: int, workers: int = 1) -> EvalResult:
    """Objective estimate plus every constraint verdict; infeasibility never hides J."""
    if m_runs < 2:
        raise ValueError("m_runs must be >= 2")
    saves = _all_save_times(scenario, m_runs, workers)
    series = _series_from_saves(scenario.time_grid(), saves)
    js = per_run_objective(saves, scenario.t0, scenario.tf)
    traj = scenario.trajectory
    energy = None
    if scenario.energy is not None:
        energy = check_energy(scenario.energy, scenario.t0, scenario.tf)
    return EvalResult(
        series=series,
        j=float(js.mean()),
        j_stderr=float(js.std(ddof=1) / math.sqrt(m_runs)),
        m_runs=m_runs,
        free_space=check_free_space(traj, scenario.obstacles),
        dynamics=check_dynamics(traj, scenario.limits, scenario.residual_coeff),
        energy=energy,
        scenario=scenario.echo(),
    )
