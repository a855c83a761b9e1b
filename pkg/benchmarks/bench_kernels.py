"""Time the compiled and pure-Python kernels on the reference mission.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are timed on identical inputs and their outputs are checked for
equality before any timing is reported.
"""

import argparse
import math
import time

import numpy as np

from msarkit.cli import build_scenario, search_area
from msarkit.config import load_config, reference_config_path
from msarkit.kernels import backends
from msarkit.mission import VehicleLimits, generate_lawnmower
from msarkit.montecarlo import _Prepared, _look_key, _run_rng
from msarkit.drift import drift_paths
from msarkit.sensor import ViewGeometry, footprint


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def scan_inputs(n_runs):
    sc = build_scenario(load_config(reference_config_path()))
    prep = _Prepared(sc)
    batches = []
    for r in range(n_runs):
        rng = _run_rng(sc, r)
        start = sc.uncertainty.sample(sc.n_targets, rng)
        start = drift_paths(start, sc.env, np.array([0.0, sc.lead_time]), rng)[-1]
        p = drift_paths(start, sc.env, prep.times, rng)
        batches.append((prep.times, prep.vx, prep.vy, prep.vpsi, np.ascontiguousarray(p[:, :, 0]),
                        np.ascontiguousarray(p[:, :, 1]), prep.half_along, prep.half_cross, prep.pod,
                        prep.interval, _look_key(sc, r), sc.deadline, sc.delay, sc.tf))
    return sc, batches


def raster_inputs():
    cfg = load_config(reference_config_path())
    area = search_area(cfg)
    h = 400.0
    fs_h, fs_v = footprint(cfg.camera, ViewGeometry(h))
    tr = generate_lawnmower(area, fs_h, 20.0, h, VehicleLimits(), 0.05)
    nx, ny = int(round(area.width)), int(round(area.height))
    return (np.ascontiguousarray(tr.x), np.ascontiguousarray(tr.y), np.ascontiguousarray(tr.psi),
            fs_v / 2, fs_h / 2, area.x_min, area.y_min, 1.0, nx, ny)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--runs", type=int, default=200, help="Monte Carlo runs fed to scan_run")
    args = ap.parse_args()

    impls = backends()
    sc, batches = scan_inputs(args.runs)
    raster = raster_inputs()
    print(f"backends: {', '.join(impls)}")
    print(f"scan_run: {args.runs} runs x {len(batches[0][0])} steps x {sc.n_targets} targets")
    print(f"raster_cover: {len(raster[0])} footprints on a {raster[8]} x {raster[9]} grid")

    results = {}
    for name, mod in impls.items():
        t_scan, scan_out = _best(lambda: [mod.scan_run(*b) for b in batches], args.repeat)
        t_rast, rast_out = _best(lambda: mod.raster_cover(*raster), args.repeat)
        results[name] = (t_scan, t_rast, scan_out, np.asarray(rast_out))

    if len(results) > 1:
        ref = results["python"]
        for name, (_, _, scan_out, rast_out) in results.items():
            same = all(np.array_equal(np.asarray(a), np.asarray(b), equal_nan=True)
                       for ra, rb in zip(ref[2], scan_out) for a, b in zip(ra, rb))
            assert same and np.array_equal(ref[3], rast_out), f"{name} disagrees with python"
        print("outputs identical across backends")

    print(f"\n{'backend':<10}{'scan_run [s]':>14}{'raster_cover [s]':>18}")
    for name, (t_scan, t_rast, *_) in results.items():
        print(f"{name:<10}{t_scan:>14.4f}{t_rast:>18.4f}")
    if "cython" in results:
        py, cy = results["python"], results["cython"]
        print(f"\nspeed-up: scan_run x{py[0] / cy[0]:.1f}, raster_cover x{py[1] / cy[1]:.1f}")
    else:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
