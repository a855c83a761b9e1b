"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 mission evaluated but
infeasible, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import drift, metrics, mission
from .config import ConfigError, ToolConfig, load_config
from .montecarlo import EvalResult, MissionScenario, evaluate_mission
from .sensor import TASKS, ViewGeometry, footprint, pod_at_altitude

log = logging.getLogger("msarkit")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 1, 2, 3


class InfeasibleMission(Exception):
    def __init__(self, result: EvalResult):
        super().__init__("mission violates at least one constraint")
        self.result = result


def _with_seed(cfg: ToolConfig, seed: int | None, runs: int | None = None) -> ToolConfig:
    run = cfg.run
    if seed is not None:
        run = replace(run, seed=seed)
    if runs is not None:
        if runs < 2:
            raise ConfigError("run.m_runs", "must be >= 2")
        run = replace(run, m_runs=runs)
    return replace(cfg, run=run)


def drift_series(cfg: ToolConfig, duration: float):
    ens = drift.init_ensemble(cfg.uncertainty, cfg.run.particles, cfg.run.seed)
    return drift.simulate(ens, cfg.environment, duration, min(cfg.run.drift_dt, duration), snapshots=True)


def search_area(cfg: ToolConfig) -> drift.SearchArea:
    """Explicit area from the config, else the drifted particle box at the search start."""
    if cfg.mission.area is not None:
        return cfg.mission.area
    ens = drift.init_ensemble(cfg.uncertainty, cfg.run.particles, cfg.run.seed)
    if cfg.lead_time > 0:
        ens = drift.simulate(ens, cfg.environment, cfg.lead_time, min(cfg.run.drift_dt, cfg.lead_time))
    return drift.bounding_area(ens, cfg.run.area_quantile)


def resolve_altitude(cfg: ToolConfig, area: drift.SearchArea) -> float:
    if cfg.mission.altitude != "auto":
        return float(cfg.mission.altitude)
    lo, hi = cfg.mission.altitude_range
    return metrics.optimal_altitude(cfg.camera, cfg.target, area, lo, hi).h_star


def build_trajectory(cfg: ToolConfig, area: drift.SearchArea, altitude: float) -> mission.Trajectory:
    m = cfg.mission
    dt, t0 = cfg.run.traj_dt, m.t0
    fs_h, _ = footprint(cfg.camera, ViewGeometry(altitude))
    heading = math.radians(m.params["heading_deg"])
    try:
        if m.pattern == "lawnmower":
            spacing = fs_h if m.params["track_spacing"] == "auto" else m.params["track_spacing"]
            return mission.generate_lawnmower(area, spacing, m.speed, altitude, m.limits, dt, t0)
        if m.pattern == "expanding_square":
            inc = fs_h if m.params["leg_increment"] == "auto" else m.params["leg_increment"]
            return mission.generate_expanding_square(area.center, inc, m.speed, altitude, m.params["n_legs"],
                                                     m.limits, dt, t0, heading)
        if m.pattern == "sector":
            return mission.generate_sector_search(area.center, m.params["radius"], m.speed, altitude,
                                                  m.params["n_cycles"], m.limits, dt, t0, heading)
        if m.pattern == "hover":
            pos = m.params["position"] or area.center
            return mission.hover(pos, m.params["duration"], altitude, heading, max(dt, 0.5), t0)
    except ValueError as exc:
        raise ConfigError(f"mission ({m.pattern})", str(exc)) from None
    traj = mission.Trajectory.read_csv(m.params["trajectory_csv"])
    return replace(traj, altitude=altitude) if m.altitude != "auto" else traj


def build_scenario(cfg: ToolConfig) -> MissionScenario:
    m = cfg.mission
    area = search_area(cfg)
    altitude = resolve_altitude(cfg, area)
    traj = build_trajectory(cfg, area, altitude)
    tf = traj.tf if m.tf is None else m.tf
    if tf > traj.tf + 1e-9:
        raise ConfigError("mission.tf_s", f"{tf} exceeds the trajectory end {traj.tf:.3f}")
    if m.energy is not None:
        tf = min(tf, mission.depletion_time(m.energy, m.t0))
    if m.pattern == "hover" and m.detection_interval is None:
        raise ConfigError("mission.detection_interval_s", "required for a hovering vehicle")
    try:
        return MissionScenario(
            n_targets=m.n_targets, uncertainty=cfg.uncertainty, env=cfg.environment,
            camera=cfg.camera, target=cfg.target, trajectory=traj, t0=m.t0, tf=tf,
            master_seed=cfg.run.seed, detection_interval=m.detection_interval,
            survival_time=m.survival_time, rescue_model=m.rescue_model, rescue_delay=m.rescue_delay,
            lead_time=cfg.lead_time, sim_dt=cfg.run.sim_dt, obstacles=m.obstacles, energy=m.energy,
            limits=m.limits)
    except ValueError as exc:
        raise ConfigError("mission", str(exc)) from None


def _fmt(v) -> str:
    return repr(float(v))


def _prefix(out: str | Path) -> Path:
    p = Path(out)
    if p.suffix in (".json", ".csv"):
        p = p.with_suffix("")
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


# ---------------------------------------------------------------------------
# commands

def cmd_pod_curve(cfg: ToolConfig, h_min: float, h_max: float, samples: int, out_path) -> np.ndarray:
    if samples < 2:
        raise ConfigError("--samples", "need at least 2 samples")
    if not 0 < h_min < h_max:
        raise ConfigError("--h-min/--h-max", "need 0 < h_min < h_max")
    hs = np.linspace(h_min, h_max, samples)
    rows = np.array([[h] + [pod_at_altitude(cfg.camera, cfg.target, ViewGeometry(h), t) for t in TASKS]
                     for h in hs])
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["altitude_m", "p_detection", "p_recognition", "p_identification"])
        for r in rows:
            w.writerow([_fmt(v) for v in r])
    return rows


def cmd_drift(cfg: ToolConfig, duration: float, out_prefix, snapshot_every: int = 1):
    if not duration > 0:
        raise ConfigError("--duration", "must be positive")
    if snapshot_every < 1:
        raise ConfigError("--snapshot-every", "must be >= 1")
    final, series = drift_series(cfg, duration)
    p = _prefix(out_prefix)
    snaps = series[::snapshot_every]
    if snaps[-1] is not series[-1]:
        snaps = snaps + [series[-1]]
    drift.write_snapshots_csv(f"{p}_snapshots.csv", snaps)
    drift.write_area_csv(f"{p}_area.csv", series, cfg.run.area_quantile)
    return final, series


def cmd_optimal_altitude(cfg: ToolConfig, h_min: float, h_max: float, out_prefix, samples: int = 1000):
    if not 0 < h_min < h_max:
        raise ConfigError("--h-min/--h-max", "need 0 < h_min < h_max")
    area = search_area(cfg)
    opt = metrics.optimal_altitude(cfg.camera, cfg.target, area, h_min, h_max)
    curve = metrics.pos_curve(cfg.camera, cfg.target, area, h_min, h_max, max(samples, 3))
    p = _prefix(out_prefix)
    fs = footprint(cfg.camera, ViewGeometry(opt.h_star))
    doc = {"h_star": opt.h_star, "pos_star": opt.pos_star, "tie": opt.tie,
           "footprint_m": list(fs),
           "search_area_m": {"x_min": area.x_min, "y_min": area.y_min,
                             "x_max": area.x_max, "y_max": area.y_max}}
    Path(f"{p}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    curve.write_csv(f"{p}_curve.csv")
    return opt, curve


def cmd_evaluate(cfg: ToolConfig, out_prefix) -> EvalResult:
    scenario = build_scenario(cfg)
    result = evaluate_mission(scenario, cfg.run.m_runs, cfg.run.workers)
    p = _prefix(out_prefix)
    result.write_json(f"{p}.json")
    result.series.write_csv(f"{p}_series.csv")
    scenario.trajectory.write_csv(f"{p}_trajectory.csv")
    return result


def cmd_compare(cfgs: list[ToolConfig], out_path) -> list[dict]:
    rows = []
    for cfg in cfgs:
        scenario = build_scenario(cfg)
        res = evaluate_mission(scenario, cfg.run.m_runs, cfg.run.workers)
        rows.append({"config": cfg.source, "pattern": cfg.mission.pattern,
                     "altitude_m": scenario.trajectory.altitude, "J": res.j, "J_stderr": res.j_stderr,
                     "expected_saved_tf": float(res.series.mean[-1]), "feasible": res.feasible})
    rows.sort(key=lambda r: r["J"])
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "config", "pattern", "altitude_m", "J", "J_stderr", "expected_saved_tf", "feasible"])
        for i, r in enumerate(rows, 1):
            w.writerow([i, r["config"], r["pattern"], _fmt(r["altitude_m"]), _fmt(r["J"]),
                        _fmt(r["J_stderr"]), _fmt(r["expected_saved_tf"]), str(r["feasible"]).lower()])
    return rows


# ---------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msarkit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, seed=True, runs=False):
        p.add_argument("--config", required=True, help="YAML configuration file")
        p.add_argument("--out", required=True, help="output path or prefix")
        if seed:
            p.add_argument("--seed", type=int, default=None, help="override run.seed")
        if runs:
            p.add_argument("--runs", type=int, default=None, help="override run.m_runs")

    p = sub.add_parser("pod-curve", help="detection/recognition/identification probability vs altitude")
    common(p, seed=False)
    p.add_argument("--h-min", type=float, default=10.0)
    p.add_argument("--h-max", type=float, default=1000.0)
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("drift", help="particle drift snapshots and search-area growth")
    common(p)
    p.add_argument("--duration", type=float, default=None, help="seconds (default: uncertainty.lead_time_s or 1200)")
    p.add_argument("--snapshot-every", type=int, default=1, help="write particles every N drift steps")

    p = sub.add_parser("optimal-altitude", help="POS-maximizing altitude and the POS curve")
    common(p)
    p.add_argument("--h-min", type=float, default=None)
    p.add_argument("--h-max", type=float, default=None)
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("evaluate", help="Monte Carlo objective and constraint verdicts for one mission")
    common(p, runs=True)

    p = sub.add_parser("compare", help="rank several missions by objective")
    p.add_argument("--config", required=True, nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "compare":
            cfgs = [_with_seed(load_config(c), args.seed, args.runs) for c in args.config]
            rows = cmd_compare(cfgs, args.out)
            for i, r in enumerate(rows, 1):
                print(f"{i}. {r['config']}  J={r['J']:.3f} s  feasible={r['feasible']}")
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "pod-curve":
            cmd_pod_curve(cfg, args.h_min, args.h_max, args.samples, args.out)
        elif args.command == "drift":
            cfg = _with_seed(cfg, args.seed)
            duration = args.duration if args.duration is not None else (cfg.lead_time or 1200.0)
            final, _ = cmd_drift(cfg, duration, args.out, args.snapshot_every)
            a = drift.bounding_area(final, cfg.run.area_quantile)
            print(f"search area after {duration:g} s: {a.width:.1f} m x {a.height:.1f} m")
        elif args.command == "optimal-altitude":
            cfg = _with_seed(cfg, args.seed)
            lo, hi = cfg.mission.altitude_range
            h_min = lo if args.h_min is None else args.h_min
            h_max = hi if args.h_max is None else args.h_max
            opt, _ = cmd_optimal_altitude(cfg, h_min, h_max, args.out, args.samples)
            print(f"h* = {opt.h_star:.2f} m, POS* = {opt.pos_star:.6f}")
        elif args.command == "evaluate":
            cfg = _with_seed(cfg, args.seed, args.runs)
            res = cmd_evaluate(cfg, args.out)
            print(f"J = {res.j:.3f} +/- {res.j_stderr:.3f} s, E[N_saved(tf)] = {res.series.mean[-1]:.3f}, "
                  f"feasible = {res.feasible}")
            if not res.feasible:
                return EXIT_INFEASIBLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
