"""Small scenario builders shared by the evaluation tests."""

import math

import numpy as np

from msarkit.drift import EnvironmentConditions, InitialUncertainty, SearchArea
from msarkit.mission import Trajectory, VehicleLimits, generate_lawnmower, hover
from msarkit.montecarlo import MissionScenario
from msarkit.sensor import CameraSpec, TargetModel, ViewGeometry, altitude_for_pod, footprint

CAMERA = CameraSpec(math.radians(25.0), math.radians(20.0), 640, 512, 50.0)
TARGET = TargetModel()
STILL = EnvironmentConditions()
POINT = InitialUncertainty((0.0, 0.0), "square", 1e-6)


def hover_scenario(pod, tf, interval, *, n_targets=1, seed=0, **kw):
    h = altitude_for_pod(CAMERA, TARGET, pod)
    traj = hover((0.0, 0.0), tf, h)
    return MissionScenario(n_targets=n_targets, uncertainty=POINT, env=STILL, camera=CAMERA, target=TARGET,
                           trajectory=traj, t0=0.0, tf=tf, master_seed=seed, detection_interval=interval, **kw)


def two_cell_scenario(pod, dwell, cycles, *, seed=0):
    """Vehicle alternates between the target's cell and a far cell every ``dwell`` seconds."""
    h = altitude_for_pod(CAMERA, TARGET, pod)
    t = np.arange(0.0, 2 * dwell * cycles + 1.0)
    x = np.where((t // dwell) % 2 == 0, 0.0, 5000.0)
    traj = Trajectory(t, x, np.zeros_like(t), np.zeros_like(t), h, 0.0)
    return MissionScenario(n_targets=1, uncertainty=POINT, env=STILL, camera=CAMERA, target=TARGET,
                           trajectory=traj, t0=0.0, tf=float(t[-1]), master_seed=seed, detection_interval=dwell)


def lawnmower_scenario(spacing_factor, *, altitude=400.0, seed=7, n_targets=20, tf=None, **kw):
    fs_h, _ = footprint(CAMERA, ViewGeometry(altitude))
    area = SearchArea.centered((0.0, 0.0), 800.0, 800.0)
    traj = generate_lawnmower(area, spacing_factor * fs_h, 20.0, altitude, VehicleLimits())
    return MissionScenario(n_targets=n_targets, uncertainty=InitialUncertainty((0.0, 0.0), "square", 800.0),
                           env=STILL, camera=CAMERA, target=TARGET, trajectory=traj, t0=0.0,
                           tf=traj.tf if tf is None else tf, master_seed=seed, **kw)
