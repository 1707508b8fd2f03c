"""Double-dimensional sampled lane-change planning.

Candidates are generated as an "arrow cluster": a Cartesian grid of
endpoint displacements and maneuver durations.  Each candidate gets two
quintic fits — a path shape y(x) and a speed profile x(t) — coupled through
the shared endpoint, and is scored with a weighted sum of path smoothness,
speed-tracking smoothness and a proximity risk term.

All candidate quantities live in a maneuver-local frame: x is displacement
from the lane-change start (so x(0) = 0) and t is time since the start.
Lateral positions are absolute road coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import NoFeasibleCandidateError, ValidationError
from .vehicle import VehicleState


@dataclass(frozen=True)
class SamplingGrid:
    """Endpoint abscissa and duration ranges for candidate sampling."""

    x_s: float = 0.0
    t_s_start: float = 0.0
    d_min: float = 30.0
    d_max: float = 80.0
    T_min: float = 3.0
    T_max: float = 6.0
    d_step: float = 10.0
    t_step: float = 0.5

    def __post_init__(self):
        if not (0 < self.d_min <= self.d_max):
            raise ValidationError("need 0 < d_min <= d_max")
        if not (0 < self.T_min <= self.T_max):
            raise ValidationError("need 0 < T_min <= T_max")
        if self.d_step <= 0 or self.t_step <= 0:
            raise ValidationError("sampling steps must be positive")

    @property
    def m_count(self) -> int:
        return int(math.floor((self.d_max - self.d_min) / self.d_step + 1e-9)) + 1

    @property
    def n_count(self) -> int:
        return int(math.floor((self.T_max - self.T_min) / self.t_step + 1e-9)) + 1


def build_grid(grid: SamplingGrid) -> list[tuple[float, float]]:
    """All (x_e, t_e) endpoint pairs, row-major in (m, n)."""
    xs = [grid.x_s + grid.d_min + k * grid.d_step for k in range(grid.m_count)]
    ts = [grid.t_s_start + grid.T_min + j * grid.t_step for j in range(grid.n_count)]
    return [(x, t) for x in xs for t in ts]


@dataclass(frozen=True)
class BoundaryConditions:
    """Start state of the maneuver plus the target lane offset."""

    y_s: float = 0.0
    phi_s: float = 0.0
    delta_s: float = 0.0
    v_s: float = 22.0
    a_s: float = 0.0
    lane_offset_w: float = 3.5
    v_comfort: float = 26.4
    wheelbase_L: float = 2.7

    def __post_init__(self):
        if self.lane_offset_w == 0:
            raise ValidationError("lane_offset_w must be non-zero")
        if self.v_comfort <= 0:
            raise ValidationError("v_comfort must be positive")
        if self.wheelbase_L <= 0:
            raise ValidationError("wheelbase_L must be positive")


class QuinticPolynomial:
    """Degree-5 polynomial with exact derivative and integral algebra."""

    __slots__ = ("coeffs", "domain_end")

    def __init__(self, coeffs: Sequence[float], domain_end: float):
        coeffs = tuple(float(c) for c in coeffs)
        if len(coeffs) != 6:
            raise ValidationError("quintic needs exactly six coefficients")
        if not all(math.isfinite(c) for c in coeffs):
            raise ValidationError("coefficients must be finite")
        if domain_end <= 0:
            raise ValidationError("domain_end must be positive")
        self.coeffs = coeffs
        self.domain_end = float(domain_end)

    def value(self, s):
        return npoly.polyval(s, self.coeffs)

    def deriv1(self, s):
        return npoly.polyval(s, npoly.polyder(self.coeffs))

    def deriv2(self, s):
        return npoly.polyval(s, npoly.polyder(self.coeffs, 2))

    def deriv3(self, s):
        return npoly.polyval(s, npoly.polyder(self.coeffs, 3))

    def integral_sq_deriv(self, order: int, offset: float = 0.0) -> float:
        """Exact integral over [0, domain_end] of (d^k/ds^k P - offset)^2."""
        d = npoly.polyder(self.coeffs, order).copy()
        if offset:
            d = d.astype(float)
            d[0] -= offset
        sq = npoly.polymul(d, d)
        anti = npoly.polyint(sq)
        return float(npoly.polyval(self.domain_end, anti))

    def __repr__(self):
        return f"QuinticPolynomial(coeffs={self.coeffs}, domain_end={self.domain_end})"


def _solve_tail(e: float, p0: float, p1: float, p2: float,
                pe: float, ve: float, ae: float) -> tuple[float, float, float]:
    """Solve c3..c5 given fixed c0..c2 and end conditions at s = e."""
    mat = np.array([[e ** 3, e ** 4, e ** 5],
                    [3 * e ** 2, 4 * e ** 3, 5 * e ** 4],
                    [6 * e, 12 * e ** 2, 20 * e ** 3]])
    rhs = np.array([pe - (p0 + p1 * e + p2 * e ** 2),
                    ve - (p1 + 2 * p2 * e),
                    ae - 2 * p2])
    c3, c4, c5 = np.linalg.solve(mat, rhs)
    return float(c3), float(c4), float(c5)


def fit_yx(bc: BoundaryConditions, x_e: float) -> QuinticPolynomial:
    """Quintic path shape y(x) over [0, x_e].

    Start: position y_s, slope tan(phi_s), curvature consistent with the
    starting steering angle.  End: the adjacent lane centerline with zero
    slope and zero second derivative.
    """
    if x_e <= 0:
        raise ValidationError(f"x_e must be positive, got {x_e}")
    c0 = bc.y_s
    c1 = math.tan(bc.phi_s)
    ypp0 = (1.0 + c1 * c1) ** 1.5 * math.tan(bc.delta_s) / bc.wheelbase_L
    c2 = ypp0 / 2.0
    c3, c4, c5 = _solve_tail(x_e, c0, c1, c2,
                             pe=bc.y_s + bc.lane_offset_w, ve=0.0, ae=0.0)
    return QuinticPolynomial((c0, c1, c2, c3, c4, c5), x_e)


def fit_xt(bc: BoundaryConditions, x_e: float,
           t_e_duration: float) -> QuinticPolynomial:
    """Quintic speed profile x(t) over [0, t_e_duration].

    Start: zero displacement, the projected start speed and acceleration.
    End: displacement x_e at the comfortable cruise speed with zero
    acceleration.
    """
    if x_e <= 0:
        raise ValidationError(f"x_e must be positive, got {x_e}")
    if t_e_duration <= 0:
        raise ValidationError(f"duration must be positive, got {t_e_duration}")
    c0 = 0.0
    c1 = bc.v_s * math.cos(bc.phi_s)
    xpp0 = (bc.a_s * math.cos(bc.phi_s)
            + bc.v_s ** 2 * math.tan(bc.delta_s) * math.sin(bc.phi_s)
            / bc.wheelbase_L)
    c2 = xpp0 / 2.0
    c3, c4, c5 = _solve_tail(t_e_duration, c0, c1, c2,
                             pe=x_e, ve=bc.v_comfort, ae=0.0)
    return QuinticPolynomial((c0, c1, c2, c3, c4, c5), t_e_duration)


@dataclass(frozen=True)
class LossWeights:
    """Outer loss weights, inner integral weights, and risk shape factors."""

    w_yx: float = 1.0
    w_xt: float = 1.0
    w_risk: float = 10.0
    w_yx_1: float = 1.0
    w_yx_2: float = 1.0
    w_yx_3: float = 0.1
    w_xt_1: float = 1.0
    w_xt_2: float = 1.0
    w_xt_3: float = 0.1
    p1: float = 0.5
    p2: float = 0.05

    def __post_init__(self):
        for name in ("w_yx", "w_xt", "w_risk", "w_yx_1", "w_yx_2", "w_yx_3",
                     "w_xt_1", "w_xt_2", "w_xt_3", "p1", "p2"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        if self.w_yx + self.w_xt + self.w_risk <= 0:
            raise ValidationError("outer weights must not all be zero")


def smoothness_loss_yx(p: QuinticPolynomial, weights: LossWeights) -> float:
    """Weighted squared-derivative integrals of the path shape."""
    return (weights.w_yx_1 * p.integral_sq_deriv(1)
            + weights.w_yx_2 * p.integral_sq_deriv(2)
            + weights.w_yx_3 * p.integral_sq_deriv(3))


def tracking_loss_xt(p: QuinticPolynomial, v_des: float,
                     weights: LossWeights) -> float:
    """Weighted speed-deficit and higher-derivative integrals of x(t)."""
    return (weights.w_xt_1 * p.integral_sq_deriv(1, offset=v_des)
            + weights.w_xt_2 * p.integral_sq_deriv(2)
            + weights.w_xt_3 * p.integral_sq_deriv(3))


def risk_term(d: float) -> float:
    """One obstacle's inverse-exponential risk 1 / (1 - exp(-d)).

    d is a weighted squared distance; exact overlap (d = 0) gives +inf.
    The term decreases strictly in d and tends to 1 from above.
    """
    if d <= 0:
        return math.inf
    if math.isinf(d):
        return 1.0
    return 1.0 / -math.expm1(-d)


def _weighted_sq_distance(p1: float, p2: float, dy: float, dx: float) -> float:
    if not (math.isfinite(dy) and math.isfinite(dx)):
        return math.inf
    return p1 * dy * dy + p2 * dx * dx


@dataclass(frozen=True)
class CandidateTrajectory:
    """One (m, n) candidate with its fits and loss breakdown."""

    m_index: int
    n_index: int
    s_yx: QuinticPolynomial
    s_xt: QuinticPolynomial
    x_e: float
    t_e: float
    u_yx: float
    u_xt: float
    u_risk: float
    u_total: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.u_total)


def _maneuver_times(t_e: float, dt: float) -> list[float]:
    n = int(math.floor(t_e / dt + 1e-9))
    times = [i * dt for i in range(n + 1)]
    if times[-1] < t_e - 1e-9:
        times.append(t_e)
    return times


def risk_loss(candidate: CandidateTrajectory, av_start: VehicleState,
              rv: Optional[VehicleState], fv: Optional[VehicleState],
              weights: LossWeights, dt: float,
              rv_predictive: bool = False) -> float:
    """Proximity risk along the candidate against the rear and front vehicles.

    The rear-vehicle distance is taken at the maneuver start (the literal
    formulation); `rv_predictive` switches to a min over the horizon with a
    constant-velocity rear-vehicle prediction.  The front vehicle is always
    propagated at constant speed and constant lateral position, with the
    ego read off the composed curves.  Absent vehicles contribute the
    asymptotic term 1.
    """
    if dt <= 0:
        raise ValidationError("dt must be positive")
    times = _maneuver_times(candidate.t_e, dt)

    if rv is None:
        d1 = math.inf
    elif rv_predictive:
        d1 = math.inf
        for tau in times:
            disp = float(candidate.s_xt.value(tau))
            x_av = av_start.x + disp
            y_av = float(candidate.s_yx.value(disp))
            d1 = min(d1, _weighted_sq_distance(
                weights.p1, weights.p2,
                y_av - rv.y, x_av - (rv.x + rv.v * tau)))
    else:
        d1 = _weighted_sq_distance(weights.p1, weights.p2,
                                   av_start.y - rv.y, av_start.x - rv.x)

    if fv is None:
        d2 = math.inf
    else:
        d2 = math.inf
        for tau in times:
            disp = float(candidate.s_xt.value(tau))
            x_av = av_start.x + disp
            y_av = float(candidate.s_yx.value(disp))
            d2 = min(d2, _weighted_sq_distance(
                weights.p1, weights.p2,
                y_av - fv.y, x_av - (fv.x + fv.v * tau)))

    return risk_term(d1) + risk_term(d2)


def generate_candidates(bc: BoundaryConditions, grid: SamplingGrid,
                        weights: LossWeights, v_des: float,
                        av_start: VehicleState,
                        fv: Optional[VehicleState],
                        rv: Optional[VehicleState],
                        dt: float = 0.1,
                        rv_predictive: bool = False
                        ) -> list[CandidateTrajectory]:
    """Fit and score the full M x N cluster, row-major in (m, n)."""
    out = []
    endpoints = build_grid(grid)
    n_count = grid.n_count
    for idx, (x_abs, t_abs) in enumerate(endpoints):
        m, n = divmod(idx, n_count)
        x_e = x_abs - grid.x_s
        t_e = t_abs - grid.t_s_start
        s_yx = fit_yx(bc, x_e)
        s_xt = fit_xt(bc, x_e, t_e)
        u_yx = smoothness_loss_yx(s_yx, weights)
        u_xt = tracking_loss_xt(s_xt, v_des, weights)
        cand = CandidateTrajectory(m, n, s_yx, s_xt, x_e, t_e,
                                   u_yx, u_xt, math.nan, math.nan)
        u_risk = risk_loss(cand, av_start, rv, fv, weights, dt,
                           rv_predictive=rv_predictive)
        u_total = (weights.w_yx * u_yx + weights.w_xt * u_xt
                   + weights.w_risk * u_risk)
        out.append(CandidateTrajectory(m, n, s_yx, s_xt, x_e, t_e,
                                       u_yx, u_xt, u_risk, u_total))
    return out


def select_best(candidates: Sequence[CandidateTrajectory]) -> CandidateTrajectory:
    """Minimal-loss feasible candidate; ties prefer faster then shorter."""
    feasible = [c for c in candidates if c.feasible]
    if not feasible:
        raise NoFeasibleCandidateError("no safe gap: all candidates infeasible")
    return min(feasible, key=lambda c: (c.u_total, c.t_e, c.x_e))
