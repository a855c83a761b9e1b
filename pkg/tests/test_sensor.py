import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msarkit.sensor import (CameraSpec, TargetModel, ViewGeometry, altitude_for_pod, cycles_on_target, footprint,
                            gsd, johnson_probability, max_coverage_speed, pixels_on_target, pod_at_altitude)


def _gsd_oracle(fov_deg, px, r, tilt=0.0):
    # independent route: pixel angular size from degrees, evaluated with numpy
    return float(np.float64(2.0) * r / np.cos(tilt) * np.tan(np.deg2rad(fov_deg) / (2 * px)))


def _ttpf_oracle(n, n50):
    x = n / n50
    e = 2.7 + 0.7 * x
    return x ** e / (1 + x ** e)


class TestGsd:
    def test_horizontal_100m(self, camera):
        g = gsd(camera, ViewGeometry(100.0), "horizontal")
        assert g == pytest.approx(_gsd_oracle(25.0, 640, 100.0), rel=1e-14)
        assert g == pytest.approx(0.06818, abs=5e-6)

    def test_vertical_400m(self, camera):
        g = gsd(camera, ViewGeometry(400.0), "vertical")
        assert g == pytest.approx(_gsd_oracle(20.0, 512, 400.0), rel=1e-14)
        assert g == pytest.approx(0.27271, abs=5e-6)

    def test_doubling_altitude_doubles_gsd(self, camera):
        for axis in ("horizontal", "vertical"):
            assert gsd(camera, ViewGeometry(240.0), axis) == 2 * gsd(camera, ViewGeometry(120.0), axis)

    def test_tilt_only_affects_vertical(self, camera):
        v0 = ViewGeometry(300.0)
        v1 = ViewGeometry(300.0, math.radians(30))
        assert gsd(camera, v1, "horizontal") == gsd(camera, v0, "horizontal")
        assert gsd(camera, v1, "vertical") == pytest.approx(_gsd_oracle(20.0, 512, 300.0, math.radians(30)))

    def test_rejects_grazing_tilt(self):
        with pytest.raises(ValueError):
            ViewGeometry(100.0, math.pi / 2)

    def test_rejects_bad_axis(self, camera):
        with pytest.raises(ValueError):
            gsd(camera, ViewGeometry(100.0), "diagonal")

    @settings(max_examples=100, deadline=None)
    @given(fov_h=st.floats(0.01, 3.1), fov_v=st.floats(0.01, 3.1), px_h=st.integers(1, 8000),
           px_v=st.integers(1, 8000), h=st.floats(0.1, 1e4))
    def test_linearity_property(self, fov_h, fov_v, px_h, px_v, h):
        cam = CameraSpec(fov_h, fov_v, px_h, px_v, 30.0)
        for axis in ("horizontal", "vertical"):
            ratio = gsd(cam, ViewGeometry(2 * h), axis) / gsd(cam, ViewGeometry(h), axis)
            assert ratio == pytest.approx(2.0, rel=1e-12)


class TestCycles:
    def test_one_cycle(self):
        assert cycles_on_target(0.5, 0.25) == 1.0

    @pytest.mark.parametrize("g, expected", [(0.068177, 3.667), (0.27271, 0.9167)])
    def test_examples(self, g, expected):
        assert cycles_on_target(0.5, g) == pytest.approx(0.5 / (2 * g), rel=1e-15)
        assert cycles_on_target(0.5, g) == pytest.approx(expected, abs=5e-4)

    def test_halving_gsd_doubles_cycles(self):
        assert cycles_on_target(0.5, 0.05) == 2 * cycles_on_target(0.5, 0.1)

    @pytest.mark.parametrize("d, g", [(0, 0.1), (0.5, 0), (-1, 0.1), (0.5, -0.1)])
    def test_rejects_non_positive(self, d, g):
        with pytest.raises(ValueError):
            cycles_on_target(d, g)


class TestJohnson:
    def test_zero_cycles(self):
        assert johnson_probability(0.0, 0.75) == 0.0

    def test_midpoint(self):
        assert johnson_probability(0.75, 0.75) == 0.5

    def test_two_n50(self):
        p = johnson_probability(1.5, 0.75)
        assert p == pytest.approx(2 ** 4.1 / (1 + 2 ** 4.1), rel=1e-14)
        assert p == pytest.approx(0.9449, abs=5e-5)

    @pytest.mark.parametrize("n50", [0.1, 0.75, 3.0, 6.0, 10.0])
    def test_half_at_n50_sweep(self, n50):
        assert abs(johnson_probability(n50, n50) - 0.5) <= 1e-12

    def test_matches_direct_formula(self):
        for n in np.linspace(0.01, 5.0, 200):
            assert johnson_probability(n, 0.75) == pytest.approx(_ttpf_oracle(n, 0.75), rel=1e-12)

    def test_no_overflow_far_above_threshold(self):
        assert johnson_probability(1e6, 0.75) == 1.0

    def test_strictly_increasing_and_bounded(self):
        ns = np.linspace(0.0, 3.0, 2000)
        ps = np.array([johnson_probability(n, 0.75) for n in ns])
        assert np.all(np.diff(ps) > 0)
        assert ps.min() >= 0 and ps.max() < 1

    @pytest.mark.parametrize("n, n50", [(-0.1, 0.75), (1.0, 0.0), (1.0, -1.0)])
    def test_rejects_bad_input(self, n, n50):
        with pytest.raises(ValueError):
            johnson_probability(n, n50)


class TestPod:
    def test_100m(self, camera, target):
        assert pod_at_altitude(camera, target, ViewGeometry(100.0)) == pytest.approx(0.99994, abs=5e-6)

    def test_400m(self, camera, target):
        p = pod_at_altitude(camera, target, ViewGeometry(400.0))
        n = 0.5 / (2 * _gsd_oracle(25.0, 640, 400.0))
        assert p == pytest.approx(_ttpf_oracle(n, 0.75), rel=1e-12)
        assert p == pytest.approx(0.671, abs=5e-4)

    def test_identification_below_detection(self, camera, target):
        v = ViewGeometry(400.0)
        assert pod_at_altitude(camera, target, v, "identification") < pod_at_altitude(camera, target, v)

    def test_monotone_on_dense_grid(self, camera, target):
        hs = np.linspace(1.0, 5000.0, 1000)
        ps = np.array([pod_at_altitude(camera, target, ViewGeometry(h)) for h in hs])
        # far below the threshold everything rounds to 1.0; strictness applies where resolvable
        assert np.all(np.diff(ps) <= 0)
        resolvable = ps < 1.0
        assert np.all(np.diff(ps[resolvable]) < 0)

    def test_task_ordering(self, camera, target):
        for h in np.linspace(5, 2000, 400):
            v = ViewGeometry(h)
            d, r, i = (pod_at_altitude(camera, target, v, t) for t in ("detection", "recognition", "identification"))
            assert d >= r >= i

    def test_geometric_mean_axis(self, camera, target):
        v = ViewGeometry(400.0)
        g = math.sqrt(_gsd_oracle(25.0, 640, 400.0) * _gsd_oracle(20.0, 512, 400.0))
        p = pod_at_altitude(camera, target, v, gsd_axis="geometric_mean")
        assert p == pytest.approx(_ttpf_oracle(0.5 / (2 * g), 0.75), rel=1e-12)

    def test_unknown_task(self, camera, target):
        with pytest.raises(ValueError):
            pod_at_altitude(camera, target, ViewGeometry(10.0), "classification")

    def test_altitude_for_pod_inverts(self, camera, target):
        h = altitude_for_pod(camera, target, 0.3)
        assert pod_at_altitude(camera, target, ViewGeometry(h)) == pytest.approx(0.3, abs=1e-12)


class TestPixelsAndFootprint:
    def test_pixels(self, target):
        assert pixels_on_target(target, 0.1) == 5.0
        assert pixels_on_target(target, 0.5) == 1.0
        assert pixels_on_target(target, 0.068177) == pytest.approx(7.33, abs=5e-3)
        with pytest.raises(ValueError):
            pixels_on_target(target, 0.0)

    def test_footprint_400m(self, camera):
        fs_h, fs_v = footprint(camera, ViewGeometry(400.0))
        assert fs_h == pytest.approx(_gsd_oracle(25.0, 640, 400.0) * 640, rel=1e-14)
        assert fs_v == pytest.approx(_gsd_oracle(20.0, 512, 400.0) * 512, rel=1e-14)
        assert (fs_h, fs_v) == pytest.approx((174.5, 139.6), abs=0.05)

    def test_footprint_linear(self, camera):
        a = footprint(camera, ViewGeometry(400.0))
        b = footprint(camera, ViewGeometry(100.0))
        assert b[0] == pytest.approx(a[0] / 4, rel=1e-15)
        assert b[1] == pytest.approx(a[1] / 4, rel=1e-15)

    def test_footprint_equals_gsd_times_pixels(self, camera):
        v = ViewGeometry(321.0)
        assert footprint(camera, v) == (gsd(camera, v, "horizontal") * 640, gsd(camera, v, "vertical") * 512)

    def test_single_pixel_camera(self):
        cam = CameraSpec(0.5, 0.4, 1, 1, 10.0)
        v = ViewGeometry(77.0)
        assert footprint(cam, v) == (gsd(cam, v, "horizontal"), gsd(cam, v, "vertical"))

    def test_max_speed(self, camera):
        s = max_coverage_speed(camera, ViewGeometry(400.0))
        assert s == pytest.approx(footprint(camera, ViewGeometry(400.0))[1] * 50, rel=1e-15)
        assert s == pytest.approx(6980, abs=2)
        assert max_coverage_speed(camera, ViewGeometry(200.0)) == pytest.approx(s / 2, rel=1e-15)

    def test_max_speed_one_hertz(self):
        # fov chosen so fs_v = 100 m at 100 m altitude: tan(fov/2) = 0.5
        cam = CameraSpec(1.0, 2 * math.atan(0.5), 1, 1, 1.0)
        assert max_coverage_speed(cam, ViewGeometry(100.0)) == pytest.approx(100.0, rel=1e-14)


class TestTypes:
    @pytest.mark.parametrize("kw", [dict(fov_h=0.0), dict(fov_v=math.pi), dict(px_h=0), dict(framerate=0.0),
                                    dict(emissivity_setting=0.0), dict(emissivity_setting=1.2)])
    def test_camera_invariants(self, kw):
        base = dict(fov_h=0.4, fov_v=0.3, px_h=640, px_v=512, framerate=50.0)
        base.update(kw)
        with pytest.raises(ValueError):
            CameraSpec(**base)

    def test_target_ordering(self):
        with pytest.raises(ValueError):
            TargetModel(n50_detection=3.0, n50_recognition=3.0)
        with pytest.raises(ValueError):
            TargetModel(d_c=0.0)

    def test_from_degrees(self):
        cam = CameraSpec.from_degrees(25, 20, 640, 512, 50)
        assert cam.fov_h == pytest.approx(math.radians(25))
        assert cam.emissivity_setting == 0.98


class TestMissProbability:
    @pytest.mark.parametrize("n", [0.0, 0.1, 0.75, 1.5, 4.0])
    def test_complements_p(self, n):
        from msarkit.sensor import johnson_miss_probability

        assert johnson_miss_probability(n, 0.75) + johnson_probability(n, 0.75) == pytest.approx(1.0, abs=1e-15)

    def test_resolves_where_p_saturates(self, camera, target):
        from msarkit.sensor import miss_at_altitude

        v10, v20 = ViewGeometry(10.0), ViewGeometry(20.0)
        assert pod_at_altitude(camera, target, v10) == pod_at_altitude(camera, target, v20) == 1.0
        assert 0 < miss_at_altitude(camera, target, v10) < miss_at_altitude(camera, target, v20)
