"""Deterministic ramp-merging simulation kit.

Discomfort-triggered lane-change decisions, double-dimensional quintic
candidate sampling with a smoothness / speed-tracking / proximity-risk
loss, IDM background traffic, baseline curve generators, and metric
extraction for desk-scale experiment reproduction.
"""

from .decision import (DecisionConfig, UnsatisfactoryAccumulator, accumulate,
                       instantaneous_discomfort, should_change_lane)
from .errors import (NoFeasibleCandidateError, NonPositiveGapError,
                     RampMergeError, ValidationError)
from .metrics import TrialSummary, aggregate, decision_time, trial_summary, ttc
from .planner import (BoundaryConditions, CandidateTrajectory, LossWeights,
                      QuinticPolynomial, SamplingGrid, build_grid, fit_xt,
                      fit_yx, generate_candidates, risk_loss, risk_term,
                      select_best, smoothness_loss_yx, tracking_loss_xt)
from .simulator import (ScenarioConfig, SimulationTrace, check_collision,
                        identify_fv_rv, run_episode, spawn_traffic)
from .vehicle import (IdmParams, VehicleParams, VehicleState,
                      idm_acceleration, step_kinematics)

__all__ = [
    "BoundaryConditions", "CandidateTrajectory", "DecisionConfig",
    "IdmParams", "LossWeights", "NoFeasibleCandidateError",
    "NonPositiveGapError", "QuinticPolynomial", "RampMergeError",
    "SamplingGrid", "ScenarioConfig", "SimulationTrace", "TrialSummary",
    "UnsatisfactoryAccumulator", "ValidationError", "VehicleParams",
    "VehicleState", "accumulate", "aggregate", "build_grid",
    "check_collision", "decision_time", "fit_xt", "fit_yx",
    "generate_candidates", "identify_fv_rv", "idm_acceleration",
    "instantaneous_discomfort", "risk_loss", "risk_term", "run_episode",
    "select_best", "should_change_lane", "smoothness_loss_yx",
    "spawn_traffic", "step_kinematics", "tracking_loss_xt", "trial_summary",
    "ttc",
]

__version__ = "0.1.0"
