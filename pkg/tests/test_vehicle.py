import numpy as np
import pytest

from etcoord import BezierTrajectory, PFConfig, VehicleState, inject_disturbance, pf_error, pf_step
from etcoord import position, virtual_target_velocity
from etcoord.vehicle import saturate_speed

LINE = BezierTrajectory(((0.0, 0.0, 0.0), (0.0, 150.0, 0.0)), 20.0)
CFG = PFConfig(k_p=1.0, v_min=0.0, v_max=25.0, rho=5.0)


class TestPfError:
    def test_on_target(self):
        p = position(LINE, 3.0)
        assert np.array_equal(pf_error(p, LINE, 3.0), np.zeros(3))

    def test_definition(self):
        assert pf_error([0.0, 1.0, 0.0], LINE, 0.0).tolist() == [0.0, 1.0, 0.0]


class TestSaturation:
    def test_band_respected(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            v = rng.uniform(-40, 40, 3)
            out = saturate_speed(v, 3.0, 12.0)
            speed = np.linalg.norm(out)
            assert speed <= 12.0 + 1e-12
            if np.linalg.norm(v) > 0:
                assert speed >= 3.0 - 1e-12

    def test_zero_stays_zero(self):
        assert np.array_equal(saturate_speed(np.zeros(3), 3.0, 12.0), np.zeros(3))

    def test_in_band_untouched(self):
        v = np.array([0.0, 5.0, 0.0])
        assert np.array_equal(saturate_speed(v, 3.0, 12.0), v)


class TestPfStep:
    def test_feedforward_only_tracks_exactly(self):
        st = VehicleState(p=tuple(position(LINE, 2.0)))
        out = pf_step(st, LINE, 2.0, 1.0, CFG, dt=0.01)
        expect = np.asarray(st.p) + 0.01 * virtual_target_velocity(LINE, 2.0, 1.0)
        assert np.array_equal(np.asarray(out.p), expect)

    def test_correction_opposes_error(self):
        target = position(LINE, 2.0)
        st = VehicleState(p=(target[0], target[1] + 2.0, target[2]))
        out = pf_step(st, LINE, 2.0, 1.0, CFG, dt=0.01)
        ff = virtual_target_velocity(LINE, 2.0, 1.0)
        expect = np.asarray(st.p) + 0.01 * (ff - CFG.k_p * np.array([0.0, 2.0, 0.0]))
        assert np.allclose(np.asarray(out.p), expect, atol=1e-14)

    def test_offset_decays_monotonically(self):
        # frozen calibration run: 3 m lateral offset, plain straight-line
        # tracking, pf gain 1; error must shrink every step and end < 0.1 m
        st = VehicleState(p=(3.0, 0.0, 0.0))
        gamma, gamma_dot, dt = 0.0, 1.0, 1e-3
        prev = np.linalg.norm(pf_error(st.p, LINE, gamma))
        for step in range(6000):
            st = pf_step(st, LINE, gamma, gamma_dot, CFG, dt)
            gamma += dt * gamma_dot
            err = np.linalg.norm(pf_error(st.p, LINE, gamma))
            assert err <= prev + 1e-12
            prev = err
        assert prev < 0.1


class TestDisturbance:
    def test_window_outside_run_changes_nothing(self):
        st = VehicleState(p=(0.0, 0.0, 0.0))
        st_d = inject_disturbance(st, (100.0, 101.0), (5.0, 0.0, 0.0))
        a = pf_step(st, LINE, 1.0, 1.0, CFG, dt=0.01, t=0.5)
        b = pf_step(st_d, LINE, 1.0, 1.0, CFG, dt=0.01, t=0.5)
        assert np.array_equal(np.asarray(a.p), np.asarray(b.p))

    def test_active_window_applies(self):
        st = inject_disturbance(VehicleState(p=(0.0, 0.0, 0.0)), (0.0, 1.0), (1.0, 0.0, 0.0))
        out = pf_step(st, LINE, 0.0, 0.0, PFConfig(k_p=1.0, v_min=0.0, v_max=25.0, rho=5.0), dt=0.5, t=0.5)
        assert out.p[0] > 0.0

    def test_window_boundary_is_half_open(self):
        st = inject_disturbance(VehicleState(p=(0.0, 0.0, 0.0)), (0.0, 1.0), (1.0, 0.0, 0.0))
        from etcoord.vehicle import disturbance_velocity

        assert disturbance_velocity(st, 0.0).tolist() == [1.0, 0.0, 0.0]
        assert disturbance_velocity(st, 1.0).tolist() == [0.0, 0.0, 0.0]

    def test_overlapping_windows_rejected(self):
        st = inject_disturbance(VehicleState(p=(0.0, 0.0, 0.0)), (0.0, 2.0), (1.0, 0.0, 0.0))
        with pytest.raises(ValueError, match="overlaps"):
            inject_disturbance(st, (1.5, 3.0), (0.0, 1.0, 0.0))

    def test_disjoint_windows_allowed(self):
        st = inject_disturbance(VehicleState(p=(0.0, 0.0, 0.0)), (0.0, 2.0), (1.0, 0.0, 0.0))
        st = inject_disturbance(st, (2.0, 3.0), (0.0, 1.0, 0.0))
        assert len(st.disturbances) == 2

    def test_empty_window_rejected(self):
        with pytest.raises(ValueError):
            inject_disturbance(VehicleState(p=(0.0, 0.0, 0.0)), (2.0, 2.0), (1.0, 0.0, 0.0))


class TestInitialOffsetCoupling:
    def test_alpha_signs_match_offsets(self, bundled_run):
        # agents 3 and 5 start ahead of the start plane, agent 4 behind it:
        # their virtual-time couplings at t=0 must push 3 and 5 forward and 4
        # backward, with the unperturbed agents near zero
        result, _ = bundled_run
        alpha0 = result.alpha[0]
        assert alpha0[2] > 0.1 and alpha0[4] > 0.1
        assert alpha0[3] < -0.1
        assert abs(alpha0[0]) < 1e-9 and abs(alpha0[1]) < 1e-9


class TestPFConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            PFConfig(k_p=0.0, v_min=0.0, v_max=1.0, rho=1.0)
        with pytest.raises(ValueError):
            PFConfig(k_p=1.0, v_min=2.0, v_max=1.0, rho=1.0)
        with pytest.raises(ValueError):
            PFConfig(k_p=1.0, v_min=0.0, v_max=1.0, rho=0.0)
