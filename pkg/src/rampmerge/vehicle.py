"""Kinematic single-track vehicle model and IDM car-following law.

Both the ego vehicle and the background traffic share the same kinematics:

    x_dot   = v * cos(phi)
    y_dot   = v * sin(phi)
    phi_dot = v * tan(delta) / L

with speed v and steering angle delta as the control inputs.  Integration
is explicit Euler at the simulation step; a fourth-order reference
integrator lives in the test suite only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NonPositiveGapError, ValidationError


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class VehicleParams:
    """Physical limits and dimensions of one vehicle."""

    wheelbase_L: float = 2.7
    body_length: float = 4.5
    body_width: float = 2.0
    v_max: float = 33.0
    v_min: float = 0.0
    a_max: float = 3.0
    a_min: float = -6.0
    delta_max: float = 0.6

    def __post_init__(self):
        for name in ("wheelbase_L", "body_length", "body_width"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.v_min > self.v_max:
            raise ValidationError("v_min must not exceed v_max")
        if not (self.a_min < 0 < self.a_max):
            raise ValidationError("need a_min < 0 < a_max")
        if not (0 < self.delta_max < math.pi / 2):
            raise ValidationError("delta_max must lie in (0, pi/2)")


@dataclass(frozen=True)
class VehicleState:
    """Pose, speed, steering and longitudinal acceleration of one vehicle."""

    x: float
    y: float
    phi: float
    v: float
    delta: float = 0.0
    a: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "phi", "v", "delta", "a"):
            _require_finite(name, getattr(self, name))


@dataclass(frozen=True)
class IdmParams:
    """Intelligent Driver Model parameters (standard literature defaults)."""

    v0_desired: float = 26.4
    T_headway: float = 1.5
    s0_min_gap: float = 2.0
    a_accel: float = 1.5
    b_decel: float = 2.0
    exponent: float = 4.0

    def __post_init__(self):
        for name in ("v0_desired", "T_headway", "s0_min_gap", "a_accel",
                     "b_decel", "exponent"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be strictly positive")


def step_kinematics(state: VehicleState, v_cmd: float, delta_cmd: float,
                    dt: float, params: VehicleParams) -> VehicleState:
    """Advance one Euler step with commanded speed and steering.

    Commands are clamped to the vehicle limits *before* integration so a
    single step never uses out-of-range inputs.  The returned acceleration
    is the realised (v_new - v_old) / dt.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    _require_finite("v_cmd", v_cmd)
    _require_finite("delta_cmd", delta_cmd)

    v = min(max(v_cmd, params.v_min), params.v_max)
    delta = min(max(delta_cmd, -params.delta_max), params.delta_max)

    x = state.x + v * math.cos(state.phi) * dt
    y = state.y + v * math.sin(state.phi) * dt
    phi = state.phi + v * math.tan(delta) / params.wheelbase_L * dt
    return VehicleState(x=x, y=y, phi=phi, v=v, delta=delta,
                        a=(v - state.v) / dt)


def idm_acceleration(ego_v: float, gap: float, lead_v: float,
                     params: IdmParams,
                     limits: VehicleParams | None = None) -> float:
    """IDM acceleration for a follower at `gap` metres behind a leader.

    `gap` is bumper-to-bumper.  A free road is modelled by gap = inf.
    When `limits` is given the result is clamped to [a_min, a_max].

    The dynamic part of the desired gap is floored at zero (the canonical
    form); without the floor a fast leader makes the squared term reward
    slowness, breaking monotonicity in ego speed.
    """
    if gap <= 0:
        raise NonPositiveGapError(
            f"gap must be positive (got {gap}); treat as collision")
    dv = ego_v - lead_v
    dynamic = (ego_v * params.T_headway
               + ego_v * dv / (2.0 * math.sqrt(params.a_accel * params.b_decel)))
    s_star = params.s0_min_gap + max(0.0, dynamic)
    a = params.a_accel * (1.0 - (ego_v / params.v0_desired) ** params.exponent
                          - (s_star / gap) ** 2)
    if limits is not None:
        a = min(max(a, limits.a_min), limits.a_max)
    return a
