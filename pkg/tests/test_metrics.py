import numpy as np
import pytest

from msarkit.drift import SearchArea
from msarkit.metrics import golden_section_max, optimal_altitude, poc, pos, pos_at, pos_curve
from msarkit.sensor import ViewGeometry, footprint


def _brute_force_argmax(camera, target, area, lo, hi, n):
    hs = np.linspace(lo, hi, n)
    vals = np.array([pos_at(camera, target, area, h)[2] for h in hs])
    k = int(np.argmax(vals))
    return hs[k], vals[k], hs, vals


class TestPoc:
    def test_ratio(self, area1200):
        assert poc((174.5, 139.6), area1200) == pytest.approx(174.5 * 139.6 / 1200 ** 2, rel=1e-15)
        assert poc((174.5, 139.6), area1200) == pytest.approx(0.01692, abs=5e-6)

    def test_clamp(self, area1200):
        assert poc((2000.0, 2000.0), area1200) == 1.0

    def test_zero_footprint(self, area1200):
        assert poc((0.0, 0.0), area1200) == 0.0

    def test_rejects_negative(self, area1200):
        with pytest.raises(ValueError):
            poc((-1.0, 5.0), area1200)

    def test_clamp_exact_at_altitude(self, camera):
        area = SearchArea(0, 0, 100, 100)
        for h in (600.0, 800.0, 1000.0):
            assert poc(footprint(camera, ViewGeometry(h)), area) == 1.0


class TestPos:
    def test_product(self):
        assert pos(0.01692, 0.671) == pytest.approx(0.01692 * 0.671, rel=1e-15)
        assert pos(0.01692, 0.671) == pytest.approx(0.01135, abs=5e-6)

    def test_identity_and_zero(self):
        assert pos(1.0, 0.37) == 0.37
        assert pos(0.0, 0.9) == 0.0

    @pytest.mark.parametrize("a, b", [(1.1, 0.5), (0.5, -0.1)])
    def test_range(self, a, b):
        with pytest.raises(ValueError):
            pos(a, b)


class TestCurve:
    def test_monotone_columns(self, camera, target, area1200):
        c = pos_curve(camera, target, area1200, 10.0, 1000.0, 500)
        assert np.all(np.diff(c.poc) >= 0)
        assert np.all(np.diff(c.pod) <= 0)
        assert np.all(np.diff(c.pod[c.pod < 1.0]) < 0)
        assert np.all(c.pos == c.poc * c.pod)
        assert np.all(c.pos <= np.minimum(c.poc, c.pod))
        assert c.pos.min() >= 0 and c.pos.max() <= 1

    def test_argmax_matches_finer_grid(self, camera, target, area1200):
        c = pos_curve(camera, target, area1200, 10.0, 1000.0, 4096)
        h_fine, *_ = _brute_force_argmax(camera, target, area1200, 10.0, 1000.0, 40960)
        step = c.altitude[1] - c.altitude[0]
        assert abs(c.altitude[c.argmax()] - h_fine) <= step

    def test_rejects(self, camera, target, area1200):
        with pytest.raises(ValueError):
            pos_curve(camera, target, area1200, 10.0, 5.0, 10)
        with pytest.raises(ValueError):
            pos_curve(camera, target, area1200, 10.0, 50.0, 2)

    def test_csv(self, camera, target, area1200, tmp_path):
        c = pos_curve(camera, target, area1200, 10.0, 1000.0, 5)
        c.write_csv(tmp_path / "c.csv")
        lines = (tmp_path / "c.csv").read_text().splitlines()
        assert lines[0] == "altitude_m,poc,pod,pos" and len(lines) == 6

    def test_scale_property(self, camera, target):
        small = SearchArea(0, 0, 1200, 1200)
        big = SearchArea(0, 0, 2400, 2400)
        a = pos_curve(camera, target, small, 10.0, 1000.0, 300)
        b = pos_curve(camera, target, big, 10.0, 1000.0, 300)
        assert np.all(a.poc < 1)
        assert np.allclose(b.poc * 4, a.poc, rtol=1e-14, atol=0)
        assert np.allclose(b.pos * 4, a.pos, rtol=1e-14, atol=0)
        assert a.argmax() == b.argmax()


class TestGoldenSection:
    def test_parabola(self):
        x, fx = golden_section_max(lambda x: -(x - 1.234) ** 2, -3.0, 7.0, 1e-8)
        assert x == pytest.approx(1.234, abs=1e-7)


class TestOptimalAltitude:
    def test_matches_million_point_grid(self, camera, target, area1200):
        # vectorised brute force over 1e6 altitudes as the independent oracle
        hs = np.linspace(10.0, 1000.0, 1_000_000)
        g_h = 2 * hs * np.tan(camera.fov_h / (2 * camera.px_h))
        g_v = 2 * hs * np.tan(camera.fov_v / (2 * camera.px_v))
        x = (0.5 / (2 * g_h)) / 0.75
        e = x ** (2.7 + 0.7 * x)
        pod = e / (1 + e)
        p = np.minimum(1.0, g_h * 640 * g_v * 512 / 1200 ** 2) * pod
        h_oracle = hs[np.argmax(p)]
        opt = optimal_altitude(camera, target, area1200, 10.0, 1000.0, 0.1)
        assert abs(opt.h_star - h_oracle) <= 0.1
        assert not opt.tie

    def test_sound_on_dense_grid(self, camera, target, area1200):
        opt = optimal_altitude(camera, target, area1200, 10.0, 1000.0, 0.1)
        _, best, _, vals = _brute_force_argmax(camera, target, area1200, 10.0, 1000.0, 4096)
        assert np.all(opt.pos_star >= vals - 1e-12)

    def test_tiny_area_gives_h_min(self, camera, target):
        area = SearchArea(0, 0, 1.0, 1.0)
        h, p = optimal_altitude(camera, target, area, 50.0, 1000.0, 0.1)
        assert h == 50.0
        assert p == pos_at(camera, target, area, 50.0)[2]

    def test_narrow_bracket_returns_endpoint(self, camera, target, area1200):
        opt = optimal_altitude(camera, target, area1200, 100.0, 100.0 + 1e-3, 0.1)
        assert opt.h_star in (100.0, 100.0 + 1e-3)

    def test_flat_curve_reports_tie(self, camera, target):
        # POC == 1 and POD == 1.0 (saturated) at the low end: flat maximum
        area = SearchArea(0, 0, 0.01, 0.01)
        opt = optimal_altitude(camera, target, area, 1.0, 5.0, 0.01)
        assert opt.tie and opt.h_star == 1.0

    def test_rejects(self, camera, target, area1200):
        with pytest.raises(ValueError):
            optimal_altitude(camera, target, area1200, 100.0, 50.0)
        with pytest.raises(ValueError):
            optimal_altitude(camera, target, area1200, 10.0, 50.0, 0.0)
