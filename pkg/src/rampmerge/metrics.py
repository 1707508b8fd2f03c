"""Evaluation metrics extracted from simulation traces.

Covers the quantities used in the experiment reports: time-to-collision
against the front vehicle, decision time, episode-average velocity, and
curvature statistics of the executed lane-change curve, plus distribution
summaries across trials.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, fields
from typing import Optional, Sequence

from .errors import ValidationError
from .vehicle import VehicleParams, VehicleState


def ttc(follower: VehicleState, leader: Optional[VehicleState],
        params: VehicleParams) -> float:
    """Bumper-to-bumper time-to-collision.

    Positive closing speed divides the signed gap (so a negative gap gives
    a negative TTC, which does occur while the pair straddles two lanes);
    an opening or matched pair returns +inf, as does an absent leader.
    """
    if leader is None:
        return math.inf
    gap = (leader.x - follower.x) - params.body_length
    closing = follower.v - leader.v
    if closing <= 0:
        return math.inf
    return gap / closing


def decision_time(trace) -> Optional[float]:
    """Time of the first step with the decision flag up, None if never."""
    for rec in trace.steps:
        if rec.decision_flag:
            return rec.time
    return None


@dataclass(frozen=True)
class TrialSummary:
    """Per-episode metric row."""

    decision_time: Optional[float]
    min_ttc_after_decision: Optional[float]
    mean_velocity: float
    max_abs_curvature: Optional[float]
    mean_abs_curvature: Optional[float]
    outcome: str
    ttc_at_initiation: Optional[float] = None
    deferrals_ttc: int = 0
    deferrals_no_feasible: int = 0


def _av_speeds(trace) -> list[float]:
    out = []
    for rec in trace.steps:
        for v in rec.vehicles:
            if v.role == "AV":
                out.append(v.v)
                break
    return out


def trial_summary(trace) -> TrialSummary:
    """Extract the per-episode metrics from one trace."""
    d_time = decision_time(trace)

    min_ttc = None
    if d_time is not None:
        vals = [r.ttc_av_fv for r in trace.steps if r.time >= d_time]
        if vals:
            min_ttc = min(vals)

    speeds = _av_speeds(trace)
    mean_v = sum(speeds) / len(speeds) if speeds else math.nan

    max_k = mean_k = None
    cand = trace.selected_candidate
    if cand is not None:
        from .baselines import curvature_profile, quintic_curve
        prof = curvature_profile(quintic_curve(cand.s_yx), samples=1001)
        max_k = prof.max_abs
        mean_k = prof.mean_abs

    return TrialSummary(
        decision_time=d_time,
        min_ttc_after_decision=min_ttc,
        mean_velocity=mean_v,
        max_abs_curvature=max_k,
        mean_abs_curvature=mean_k,
        outcome=trace.outcome,
        ttc_at_initiation=trace.initiation_ttc,
        deferrals_ttc=trace.deferrals_ttc,
        deferrals_no_feasible=trace.deferrals_no_feasible)


@dataclass(frozen=True)
class FieldStats:
    mean: float
    median: float
    std: float
    min: float
    max: float
    count: int
    excluded: int


NUMERIC_FIELDS = ("decision_time", "min_ttc_after_decision", "mean_velocity",
                  "max_abs_curvature", "mean_abs_curvature",
                  "ttc_at_initiation")


def aggregate(summaries: Sequence[TrialSummary]) -> dict[str, FieldStats]:
    """Sample statistics (n-1 std) per numeric field, skipping absent and
    non-finite values with an exclusion count."""
    if not summaries:
        raise ValidationError("aggregate needs at least one summary")
    report = {}
    for name in NUMERIC_FIELDS:
        raw = [getattr(s, name) for s in summaries]
        vals = [v for v in raw if v is not None and math.isfinite(v)]
        excluded = len(raw) - len(vals)
        if not vals:
            report[name] = FieldStats(math.nan, math.nan, math.nan,
                                      math.nan, math.nan, 0, excluded)
            continue
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        report[name] = FieldStats(
            mean=statistics.fmean(vals), median=statistics.median(vals),
            std=std, min=min(vals), max=max(vals),
            count=len(vals), excluded=excluded)
    return report
