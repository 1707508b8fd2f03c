import math

import numpy as np
import pytest

from rampmerge import (IdmParams, NonPositiveGapError, ValidationError,
                       VehicleParams, VehicleState, idm_acceleration,
                       step_kinematics)

PARAMS = VehicleParams()
IDM = IdmParams()


def rk4_oracle(state, v, delta, horizon, n_steps, L):
    """Fourth-order reference integration of the kinematic model with
    constant controls (test oracle, independent of step_kinematics)."""
    def deriv(y):
        x, yy, phi = y
        return np.array([v * math.cos(phi), v * math.sin(phi),
                         v * math.tan(delta) / L])

    y = np.array([state.x, state.y, state.phi])
    h = horizon / n_steps
    for _ in range(n_steps):
        k1 = deriv(y)
        k2 = deriv(y + h / 2 * k1)
        k3 = deriv(y + h / 2 * k2)
        k4 = deriv(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


class TestStepKinematics:
    def test_straight_line(self):
        s = VehicleState(x=0, y=0, phi=0, v=10)
        out = step_kinematics(s, 10.0, 0.0, 0.1, PARAMS)
        assert out.x == pytest.approx(1.0, abs=1e-12)
        assert out.y == 0.0
        assert out.phi == 0.0

    def test_rotated_straight_line(self):
        s = VehicleState(x=0, y=0, phi=math.pi / 2, v=10)
        out = step_kinematics(s, 10.0, 0.0, 0.1, PARAMS)
        assert out.x == pytest.approx(0.0, abs=1e-12)
        assert out.y == pytest.approx(1.0, abs=1e-12)
        assert out.phi == math.pi / 2

    def test_steered_step_hand_evaluated(self):
        # one Euler step of the model with delta = 0.1, L = 2.7
        s = VehicleState(x=0, y=0, phi=0, v=10)
        out = step_kinematics(s, 10.0, 0.1, 0.1, PARAMS)
        assert out.phi == pytest.approx(0.1 * 10 * math.tan(0.1) / 2.7,
                                        rel=1e-12)
        assert out.x == pytest.approx(1.0, abs=1e-12)
        assert out.y == 0.0

    def test_returned_acceleration(self):
        s = VehicleState(x=0, y=0, phi=0, v=10)
        out = step_kinematics(s, 12.0, 0.0, 0.5, PARAMS)
        assert out.a == pytest.approx((12.0 - 10.0) / 0.5, rel=1e-12)

    def test_commands_clamped_before_integration(self):
        s = VehicleState(x=0, y=0, phi=0, v=10)
        out = step_kinematics(s, 100.0, 2.0, 0.1, PARAMS)
        assert out.v == PARAMS.v_max
        assert out.delta == PARAMS.delta_max
        assert out.x == pytest.approx(PARAMS.v_max * 0.1, rel=1e-12)

    def test_zero_steering_preserves_heading(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            s = VehicleState(x=float(rng.normal()), y=float(rng.normal()),
                             phi=float(rng.uniform(-3, 3)),
                             v=float(rng.uniform(0, 30)))
            out = step_kinematics(s, float(rng.uniform(0, 33)), 0.0,
                                  float(rng.uniform(0.01, 1.0)), PARAMS)
            assert out.phi == s.phi

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            theta = float(rng.uniform(-math.pi, math.pi))
            v_cmd = float(rng.uniform(1, 30))
            d_cmd = float(rng.uniform(-0.5, 0.5))
            dt = 0.1
            base = VehicleState(x=float(rng.normal(scale=5)),
                                y=float(rng.normal(scale=5)),
                                phi=float(rng.uniform(-1, 1)),
                                v=float(rng.uniform(0, 30)))
            direct = step_kinematics(base, v_cmd, d_cmd, dt, PARAMS)

            c, s = math.cos(theta), math.sin(theta)
            rot = VehicleState(x=c * base.x - s * base.y,
                               y=s * base.x + c * base.y,
                               phi=base.phi + theta, v=base.v)
            stepped = step_kinematics(rot, v_cmd, d_cmd, dt, PARAMS)
            back_x = c * stepped.x + s * stepped.y
            back_y = -s * stepped.x + c * stepped.y
            assert back_x == pytest.approx(direct.x, abs=1e-12)
            assert back_y == pytest.approx(direct.y, abs=1e-12)
            assert stepped.phi - theta == pytest.approx(direct.phi, abs=1e-12)

    def test_euler_converges_first_order_to_rk4(self):
        s0 = VehicleState(x=0, y=0, phi=0.2, v=15)
        v_cmd, d_cmd, horizon, L = 15.0, 0.2, 1.0, PARAMS.wheelbase_L
        ref = rk4_oracle(s0, v_cmd, d_cmd, horizon, 20000, L)

        errors = []
        for n in (10, 20, 40, 80, 160):
            dt = horizon / n
            s = s0
            for _ in range(n):
                s = step_kinematics(s, v_cmd, d_cmd, dt, PARAMS)
            errors.append(math.hypot(s.x - ref[0], s.y - ref[1]))
        ratios = [errors[i] / errors[i + 1] for i in range(len(errors) - 1)]
        for r in ratios:
            assert 1.7 < r < 2.3  # first-order decay halves the error

    def test_finite_in_finite_out(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            s = VehicleState(x=float(rng.normal(scale=100)),
                             y=float(rng.normal(scale=100)),
                             phi=float(rng.uniform(-10, 10)),
                             v=float(rng.uniform(0, 33)))
            out = step_kinematics(s, float(rng.uniform(-5, 40)),
                                  float(rng.uniform(-2, 2)), 0.1, PARAMS)
            for val in (out.x, out.y, out.phi, out.v, out.delta, out.a):
                assert math.isfinite(val)

    def test_non_finite_rejected(self):
        s = VehicleState(x=0, y=0, phi=0, v=10)
        with pytest.raises(ValidationError):
            step_kinematics(s, math.nan, 0.0, 0.1, PARAMS)
        with pytest.raises(ValidationError):
            step_kinematics(s, 10.0, math.inf, 0.1, PARAMS)
        with pytest.raises(ValidationError):
            step_kinematics(s, 10.0, 0.0, -0.1, PARAMS)
        with pytest.raises(ValidationError):
            VehicleState(x=math.inf, y=0, phi=0, v=1)


class TestIdm:
    def test_free_flow_equilibrium(self):
        a = idm_acceleration(IDM.v0_desired, math.inf, 0.0, IDM)
        assert abs(a) < 1e-9

    def test_standstill_equilibrium(self):
        a = idm_acceleration(0.0, IDM.s0_min_gap, 0.0, IDM)
        assert abs(a) < 1e-9

    def test_frozen_scalar_evaluation(self):
        # independent scalar evaluation of the formula, frozen before the
        # implementation was written
        a = idm_acceleration(20.0, 30.0, 15.0,
                             IdmParams(v0_desired=26.4, T_headway=1.5,
                                       s0_min_gap=2.0, a_accel=1.5,
                                       b_decel=2.0, exponent=4))
        assert a == pytest.approx(-5.168835011607597, rel=1e-12)

    def test_non_positive_gap_is_error(self):
        with pytest.raises(NonPositiveGapError):
            idm_acceleration(10.0, 0.0, 10.0, IDM)
        with pytest.raises(NonPositiveGapError):
            idm_acceleration(10.0, -5.0, 10.0, IDM)

    def test_monotone_in_ego_speed(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            gap = float(rng.uniform(5, 100))
            lead_v = float(rng.uniform(0, 30))
            speeds = np.sort(rng.uniform(0, 33, size=8))
            accs = [idm_acceleration(float(v), gap, lead_v, IDM)
                    for v in speeds]
            assert all(a1 >= a2 - 1e-12 for a1, a2 in zip(accs, accs[1:]))

    def test_monotone_in_gap(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            ego_v = float(rng.uniform(0, 33))
            lead_v = float(rng.uniform(0, 30))
            gaps = np.sort(rng.uniform(1, 200, size=8))
            accs = [idm_acceleration(ego_v, float(g), lead_v, IDM)
                    for g in gaps]
            assert all(a2 >= a1 - 1e-12 for a1, a2 in zip(accs, accs[1:]))

    def test_clamped_to_limits(self):
        a = idm_acceleration(30.0, 3.0, 0.0, IDM, limits=PARAMS)
        assert a == PARAMS.a_min


class TestParamValidation:
    def test_vehicle_params(self):
        with pytest.raises(ValidationError):
            VehicleParams(wheelbase_L=-1)
        with pytest.raises(ValidationError):
            VehicleParams(a_min=0.5)
        with pytest.raises(ValidationError):
            VehicleParams(delta_max=2.0)

    def test_idm_params(self):
        with pytest.raises(ValidationError):
            IdmParams(T_headway=0.0)
