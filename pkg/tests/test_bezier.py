import numpy as np
import pytest

from etcoord import BezierTrajectory, TrajectorySet, position, velocity, virtual_target_velocity
from etcoord.bezier import min_pairwise_separation

LINE = BezierTrajectory(((0.0, 0.0, 0.0), (0.0, 150.0, 0.0)), 21.10)


class TestPosition:
    def test_start_is_first_control_point(self):
        pts = ((1.25, -3.5, 7.0), (4.0, 5.0, 6.0), (9.0, 1.0, 2.0))
        tr = BezierTrajectory(pts, 10.0)
        assert position(tr, 0.0).tolist() == list(pts[0])

    def test_end_is_last_control_point(self):
        pts = ((1.25, -3.5, 7.0), (4.0, 5.0, 6.0), (9.0, 1.0, 2.0))
        tr = BezierTrajectory(pts, 10.0)
        assert position(tr, 10.0).tolist() == list(pts[-1])

    def test_line_midpoint(self):
        assert np.allclose(position(LINE, 21.10 / 2), [0.0, 75.0, 0.0], atol=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            position(LINE, -0.01)
        with pytest.raises(ValueError):
            position(LINE, 21.11)


class TestVelocity:
    def test_line_constant_rate(self):
        for s in (0.0, 5.0, 21.10):
            v = velocity(LINE, s)
            assert np.allclose(v, [0.0, 150.0 / 21.10, 0.0], atol=1e-12)

    def test_quadratic_start_slope(self):
        pts = ((0.0, 0.0, 0.0), (10.0, 5.0, 1.0), (20.0, 0.0, 2.0))
        tr = BezierTrajectory(pts, 4.0)
        expect = 2.0 * (np.array(pts[1]) - np.array(pts[0])) / 4.0
        assert np.allclose(velocity(tr, 0.0), expect, atol=1e-12)

    def test_degenerate_curve_is_stationary(self):
        tr = BezierTrajectory(((3.0, 3.0, 3.0),) * 4, 5.0)
        assert np.array_equal(velocity(tr, 2.5), np.zeros(3))

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        for _ in range(8):
            deg = int(rng.integers(2, 7))
            pts = tuple(tuple(map(float, rng.uniform(-50, 50, 3))) for _ in range(deg + 1))
            t_f = float(rng.uniform(5.0, 30.0))
            tr = BezierTrajectory(pts, t_f)
            h = t_f * 1e-5
            for s in rng.uniform(h, t_f - h, 100):
                fd = (position(tr, s + h) - position(tr, s - h)) / (2 * h)
                v = velocity(tr, s)
                assert np.linalg.norm(fd - v) <= 1e-6 * max(1.0, np.linalg.norm(v))


class TestVirtualTargetVelocity:
    def test_zero_rate(self):
        assert np.array_equal(virtual_target_velocity(LINE, 3.0, 0.0), np.zeros(3))

    def test_unit_rate(self):
        assert np.allclose(virtual_target_velocity(LINE, 3.0, 1.0), [0, 150.0 / 21.10, 0], atol=1e-12)

    def test_scaling(self):
        v1 = virtual_target_velocity(LINE, 3.0, 1.0)
        v14 = virtual_target_velocity(LINE, 3.0, 1.4)
        assert np.allclose(v14, 1.4 * v1, atol=1e-14)


class TestValidation:
    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            BezierTrajectory(((0.0, 0.0, 0.0),), 1.0)

    def test_needs_positive_duration(self):
        with pytest.raises(ValueError):
            BezierTrajectory(((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)), 0.0)

    def test_trajectory_set_requires_common_arrival(self):
        t1 = BezierTrajectory(((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)), 1.0)
        t2 = BezierTrajectory(((0.0, 0.0, 0.0), (1.0, 0.0, 0.0)), 2.0)
        with pytest.raises(ValueError, match="same t_f"):
            TrajectorySet((t1, t2))


class TestSeparation:
    def test_parallel_lines(self):
        t1 = BezierTrajectory(((0.0, 0.0, 0.0), (0.0, 100.0, 0.0)), 10.0)
        t2 = BezierTrajectory(((12.0, 0.0, 0.0), (12.0, 100.0, 0.0)), 10.0)
        sep = min_pairwise_separation(TrajectorySet((t1, t2)))
        assert abs(sep - 12.0) <= 1e-9

    def test_crossing_lines_collide_at_matched_time(self):
        t1 = BezierTrajectory(((-10.0, 0.0, 0.0), (10.0, 100.0, 0.0)), 10.0)
        t2 = BezierTrajectory(((10.0, 0.0, 0.0), (-10.0, 100.0, 0.0)), 10.0)
        sep = min_pairwise_separation(TrajectorySet((t1, t2)))
        assert sep <= 0.2
