"""Baseline lane-change curve generators and a reactive potential-field planner.

These exist for comparison against the sampled quintic planner: Bezier and
B-spline curves over the same endpoints for curvature comparisons, and a
simple attractive/repulsive potential-field controller for velocity
comparisons.  The constructions are fixed heuristics so the comparison
tests are deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import BSpline

from .errors import ValidationError
from .planner import QuinticPolynomial
from .vehicle import VehicleParams, VehicleState

CURVE_KINDS = ("quintic", "bezier", "bspline")


class ParametricCurve:
    """Planar curve on the parameter interval [0, 1] with two derivatives."""

    def __init__(self, kind: str, control_points, evaluator):
        if kind not in CURVE_KINDS:
            raise ValidationError(f"unknown curve kind {kind!r}")
        pts = np.asarray(control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 2 or pts.shape[1] != 2:
            raise ValidationError("need at least two 2-d control points")
        self.kind = kind
        self.control_points = pts
        self._evaluator = evaluator

    def point(self, u):
        return self._evaluator(np.asarray(u, dtype=float), 0)

    def deriv1(self, u):
        return self._evaluator(np.asarray(u, dtype=float), 1)

    def deriv2(self, u):
        return self._evaluator(np.asarray(u, dtype=float), 2)


def _bezier_evaluator(ctrl: np.ndarray):
    deg = len(ctrl) - 1
    d1c = deg * np.diff(ctrl, axis=0)
    d2c = (deg - 1) * np.diff(d1c, axis=0)

    def bernstein_sum(cps, u):
        n = len(cps) - 1
        u = np.atleast_1d(u)
        acc = np.zeros((u.size, 2))
        for i, cp in enumerate(cps):
            acc += (math.comb(n, i) * u[:, None] ** i
                    * (1.0 - u[:, None]) ** (n - i)) * cp
        return acc

    def ev(u, order):
        cps = (ctrl, d1c, d2c)[order]
        res = bernstein_sum(cps, u)
        return res[0] if np.ndim(u) == 0 else res

    return ev


def bezier_lane_change(start: tuple[float, float], end: tuple[float, float],
                       heading_s: float = 0.0) -> ParametricCurve:
    """Degree-5 Bezier between lane centerlines.

    Control points sit at chord fractions {0, 0.25, 0.5, 0.5, 0.75, 1}:
    the first two on the start centerline extended along the start heading,
    the middle two stacked at mid-chord (one per centerline), the last two
    on the target centerline.  The stacked middle pair concentrates the
    lateral transition, giving this baseline its characteristic curvature
    peaks.
    """
    x0, y0 = start
    x1, y1 = end
    dx = x1 - x0
    if dx <= 0:
        raise ValidationError("degenerate chord: end must lie ahead of start")
    slope = math.tan(heading_s)

    def start_line(f):
        return (x0 + f * dx, y0 + f * dx * slope)

    ctrl = [start_line(0.0), start_line(0.25), start_line(0.5),
            (x0 + 0.5 * dx, y1), (x0 + 0.75 * dx, y1), (x1, y1)]
    return ParametricCurve("bezier", ctrl, _bezier_evaluator(np.asarray(ctrl)))


def bspline_lane_change(start: tuple[float, float],
                        end: tuple[float, float]) -> ParametricCurve:
    """Clamped cubic B-spline on a smoothed step between centerlines."""
    x0, y0 = start
    x1, y1 = end
    if x1 - x0 <= 0:
        raise ValidationError("degenerate chord: end must lie ahead of start")
    fx = np.array([0.0, 0.15, 0.35, 0.65, 0.85, 1.0])
    fy = np.array([0.0, 0.0, 0.2, 0.8, 1.0, 1.0])
    ctrl = np.column_stack([x0 + fx * (x1 - x0), y0 + fy * (y1 - y0)])
    knots = np.array([0, 0, 0, 0, 1 / 3, 2 / 3, 1, 1, 1, 1], dtype=float)
    spline = BSpline(knots, ctrl, 3)
    derivs = (spline, spline.derivative(1), spline.derivative(2))

    def ev(u, order):
        return derivs[order](u)

    return ParametricCurve("bspline", ctrl, ev)


def quintic_curve(path: QuinticPolynomial,
                  x_start: float = 0.0) -> ParametricCurve:
    """Wrap a fitted y(x) quintic as a curve parameterized by u = x / x_e."""
    x_e = path.domain_end

    def ev(u, order):
        scalar = np.ndim(u) == 0
        s = np.atleast_1d(u) * x_e
        if order == 0:
            res = np.column_stack([x_start + s, path.value(s)])
        elif order == 1:
            res = np.column_stack([np.full_like(s, x_e),
                                   path.deriv1(s) * x_e])
        else:
            res = np.column_stack([np.zeros_like(s),
                                   path.deriv2(s) * x_e * x_e])
        return res[0] if scalar else res

    ends = [(x_start, float(path.value(0.0))),
            (x_start + x_e, float(path.value(x_e)))]
    return ParametricCurve("quintic", ends, ev)


@dataclass(frozen=True)
class CurvatureProfile:
    """Sampled signed curvature paired with cumulative arclength."""

    points: list[tuple[float, float]]
    degenerate_samples: int

    @property
    def kappas(self) -> np.ndarray:
        return np.array([k for _, k in self.points])

    @property
    def mean_abs(self) -> float:
        return float(np.mean(np.abs(self.kappas)))

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.kappas)))


def curvature_profile(curve: ParametricCurve, samples: int) -> CurvatureProfile:
    """Signed curvature at uniform parameter samples with arclength."""
    if samples < 2:
        raise ValidationError("need at least two samples")
    us = np.linspace(0.0, 1.0, samples)
    d1 = np.atleast_2d(curve.deriv1(us))
    d2 = np.atleast_2d(curve.deriv2(us))
    speed_sq = d1[:, 0] ** 2 + d1[:, 1] ** 2
    num = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    degenerate = int(np.sum(speed_sq == 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa = np.where(speed_sq > 0.0, num / np.power(speed_sq, 1.5), 0.0)
    ds = np.sqrt(speed_sq)
    arc = np.concatenate([[0.0], np.cumsum((ds[1:] + ds[:-1]) / 2.0
                                           * np.diff(us))])
    return CurvatureProfile(points=list(zip(arc.tolist(), kappa.tolist())),
                            degenerate_samples=degenerate)


@dataclass(frozen=True)
class APFGains:
    """Fixed gains for the potential-field baseline (tuned once, frozen)."""

    k_attract: float = 1.0
    k_repulse: float = 100.0
    influence_radius: float = 30.0
    lookahead: float = 10.0
    k_steer: float = 0.3
    k_speed: float = 0.3
    k_brake: float = 4.0
    max_brake_step: float = 0.6
    v_cruise: float = 26.4
    min_effective_distance: float = 0.5


def _wrap_angle(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def apf_step(av: VehicleState, fv: Optional[VehicleState],
             rv: Optional[VehicleState], goal_lane_y: float,
             gains: APFGains,
             params: VehicleParams = VehicleParams()
             ) -> tuple[float, float]:
    """One reactive step: force field -> (speed command, steering command).

    Attraction pulls toward a lookahead point on the goal lane centerline;
    obstacles inside the influence radius push back with an inverse-square
    force saturated at a minimum effective distance.  The repulsion
    component opposing travel brakes the commanded speed below the current
    one; otherwise speed creeps toward the cruise setting.
    """
    target = (av.x + gains.lookahead, goal_lane_y)
    force = [gains.k_attract * (target[0] - av.x),
             gains.k_attract * (target[1] - av.y)]
    heading = (math.cos(av.phi), math.sin(av.phi))

    brake = 0.0
    for obs in (fv, rv):
        if obs is None:
            continue
        dx = av.x - obs.x
        dy = av.y - obs.y
        dist = math.hypot(dx, dy)
        if dist >= gains.influence_radius:
            continue
        d_eff = max(dist, gains.min_effective_distance)
        mag = gains.k_repulse / (d_eff * d_eff)
        if dist > 0:
            rep = (mag * dx / dist, mag * dy / dist)
        else:
            rep = (-mag, 0.0)
        force[0] += rep[0]
        force[1] += rep[1]
        brake += max(0.0, -(rep[0] * heading[0] + rep[1] * heading[1]))

    heading_des = math.atan2(force[1], force[0])
    delta_cmd = gains.k_steer * _wrap_angle(heading_des - av.phi)
    delta_cmd = min(max(delta_cmd, -params.delta_max), params.delta_max)

    v_free = min(gains.v_cruise, av.v + gains.k_speed)
    v_cmd = v_free - gains.k_brake * brake
    # braking authority is bounded so one command cannot panic-stop
    v_cmd = max(v_cmd, av.v - gains.max_brake_step)
    v_cmd = min(max(v_cmd, params.v_min), params.v_max)
    return v_cmd, delta_cmd
