"""Two-lane ramp-merging scenario simulation.

Geometry: a straight ramp lane (centerline y = 0) runs parallel to a
straight main lane (centerline y = lane_width).  The ego starts on the
ramp, car-follows its ramp leader while discomfort accumulates, and merges
through a sampled quintic maneuver once the decision trigger fires, the
front-vehicle time-to-collision clears the safety threshold, and a
collision-free candidate exists.  Background traffic spawns from seeded
Poisson arrival schedules and follows IDM within its lane.

Everything is deterministic given the scenario config (including seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .baselines import APFGains, apf_step
from .decision import (DecisionConfig, UnsatisfactoryAccumulator, accumulate,
                       should_change_lane)
from .errors import (NoFeasibleCandidateError, NonPositiveGapError,
                     ValidationError)
from .metrics import ttc
from .planner import (BoundaryConditions, CandidateTrajectory, LossWeights,
                      SamplingGrid, generate_candidates, select_best)
from .vehicle import (IdmParams, VehicleParams, VehicleState, idm_acceleration,
                      step_kinematics)

RAMP = "ramp"
MAIN = "main"

# planner status strings recorded per step
STATUS_FOLLOWING = "following"
STATUS_DEFERRED_TTC = "deferred_ttc"
STATUS_NO_FEASIBLE = "no_feasible"
STATUS_PLANNED = "planned"
STATUS_EXECUTING = "executing"
STATUS_MERGED = "merged"

OUTCOME_MERGED = "merged"
OUTCOME_TIMEOUT = "timeout"
OUTCOME_COLLISION = "collision"


@dataclass(frozen=True)
class ScenarioConfig:
    """Road geometry, traffic flows, initial conditions and planner knobs."""

    main_lane_length: float = 250.0
    ramp_lane_length: float = 180.0
    lane_width: float = 3.5
    ramp_flow: float = 200.0
    main_flow: float = 100.0
    av_initial_x: float = 30.0
    av_initial_v: float = 22.0
    v_des: float = 26.4
    dt: float = 0.1
    rng_seed: int = 42
    initial_fv_relative_distance: float = 20.0
    with_sweep_vehicle: bool = True
    ramp_leader_distance: float = 35.0
    with_ramp_leader: bool = True
    ramp_follower_distance: float = 15.0
    with_ramp_follower: bool = True
    actor_speed_low: float = 19.0
    actor_speed_high: float = 21.0
    timeout_s: float = 60.0
    forcing_zone_length: float = 40.0
    merge_tol_y: float = 0.2
    merge_tol_phi: float = 0.05
    ttc_initiation_threshold: float = 3.0
    veto_margin_long: float = 2.0
    veto_margin_lat: float = 0.3
    v_vir_window: float = 50.0
    av_controller: str = "planner"
    rv_predictive_risk: bool = False
    trial_count: int = 10
    decision: DecisionConfig = field(default_factory=DecisionConfig)
    grid: SamplingGrid = field(default_factory=SamplingGrid)
    weights: LossWeights = field(default_factory=LossWeights)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    idm: IdmParams = field(default_factory=IdmParams)
    apf: APFGains = field(default_factory=APFGains)

    def __post_init__(self):
        if self.lane_width <= self.vehicle.body_width:
            raise ValidationError("lane narrower than the vehicle body")
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.ramp_flow < 0 or self.main_flow < 0:
            raise ValidationError("flows must be non-negative")
        if self.av_controller not in ("planner", "apf"):
            raise ValidationError("av_controller must be 'planner' or 'apf'")
        if self.timeout_s <= 0:
            raise ValidationError("timeout_s must be positive")
        if not (0 <= self.av_initial_x < self.ramp_lane_length):
            raise ValidationError("av_initial_x must lie on the ramp")

    @property
    def main_lane_y(self) -> float:
        return self.lane_width


@dataclass
class Arrival:
    """One scheduled traffic spawn (re-queued while unsafe to insert)."""

    time: float
    lane: str
    speed: float
    vid: str
    spawned: bool = False


def spawn_traffic(cfg: ScenarioConfig, rng: np.random.Generator) -> list[Arrival]:
    """Seeded Poisson arrival schedules for both lanes over the episode."""
    schedule = []
    for lane, flow in ((RAMP, cfg.ramp_flow), (MAIN, cfg.main_flow)):
        if flow <= 0:
            continue
        scale = 3600.0 / flow
        t, i = 0.0, 0
        while True:
            t += float(rng.exponential(scale))
            if t >= cfg.timeout_s:
                break
            speed = float(rng.uniform(0.8, 1.0)) * cfg.v_des
            schedule.append(Arrival(t, lane, speed, f"hdv_{lane}_{i:03d}"))
            i += 1
    schedule.sort(key=lambda a: (a.time, a.lane, a.vid))
    return schedule


def identify_fv_rv(av: VehicleState,
                   traffic: Sequence[tuple[VehicleState, str]]
                   ) -> tuple[Optional[VehicleState], Optional[VehicleState]]:
    """Front vehicle (nearest main-lane vehicle ahead) and rear vehicle
    (nearest vehicle behind, either lane).  None means no such vehicle."""
    fv = None
    rv = None
    for state, lane in traffic:
        if lane == MAIN and state.x > av.x:
            if fv is None or state.x < fv.x:
                fv = state
        if state.x < av.x:
            if rv is None or state.x > rv.x:
                rv = state
    return fv, rv


def _corners(state: VehicleState, params: VehicleParams):
    c, s = math.cos(state.phi), math.sin(state.phi)
    hl, hw = params.body_length / 2.0, params.body_width / 2.0
    return [(state.x + dx * c - dy * s, state.y + dx * s + dy * c)
            for dx, dy in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw))]


def check_collision(state_a: VehicleState, params_a: VehicleParams,
                    state_b: VehicleState, params_b: VehicleParams) -> bool:
    """Separating-axis overlap test between two heading-aligned rectangles."""
    ca = _corners(state_a, params_a)
    cb = _corners(state_b, params_b)
    for phi in (state_a.phi, state_b.phi):
        for ax, ay in ((math.cos(phi), math.sin(phi)),
                       (-math.sin(phi), math.cos(phi))):
            pa = [x * ax + y * ay for x, y in ca]
            pb = [x * ax + y * ay for x, y in cb]
            if max(pa) < min(pb) or max(pb) < min(pa):
                return False
    return True


@dataclass
class VehicleRecord:
    vid: str
    role: str
    lane: str
    x: float
    y: float
    phi: float
    v: float
    a: float


@dataclass
class StepRecord:
    step: int
    time: float
    vehicles: list[VehicleRecord]
    c_av: float
    c_vir: float
    decision_flag: bool
    planner_status: str
    selected_m: Optional[int]
    selected_n: Optional[int]
    u_total: Optional[float]
    ttc_av_fv: float


@dataclass
class PlanningEvent:
    """One evaluated candidate cluster (successful or deferred)."""

    step: int
    time: float
    candidates: list[CandidateTrajectory]
    vetoed: list[bool]
    selected: Optional[tuple[int, int]]
    ttc_at_plan: float


@dataclass
class SimulationTrace:
    steps: list[StepRecord]
    outcome: str
    planning_events: list[PlanningEvent]
    deferrals_ttc: int
    deferrals_no_feasible: int
    initiation_step: Optional[int]
    initiation_ttc: Optional[float]
    selected_candidate: Optional[CandidateTrajectory]
    config: ScenarioConfig


class _Vehicle:
    __slots__ = ("vid", "lane", "state", "is_av")

    def __init__(self, vid, lane, state, is_av=False):
        self.vid = vid
        self.lane = lane
        self.state = state
        self.is_av = is_av


class _Engine:
    """Mutable episode state; run_episode drives it start to finish."""

    def __init__(self, cfg: ScenarioConfig, include_av: bool = True):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.rng_seed)
        self.vehicles: list[_Vehicle] = []
        self.av: Optional[_Vehicle] = None

        if include_av:
            self.av = _Vehicle("av", RAMP, VehicleState(
                x=cfg.av_initial_x, y=0.0, phi=0.0, v=cfg.av_initial_v),
                is_av=True)
            self.vehicles.append(self.av)

        def actor_speed():
            return float(self.rng.uniform(cfg.actor_speed_low,
                                          cfg.actor_speed_high))

        if cfg.with_sweep_vehicle:
            x = cfg.av_initial_x + cfg.initial_fv_relative_distance
            self.vehicles.append(_Vehicle("sweep", MAIN, VehicleState(
                x=x, y=cfg.main_lane_y, phi=0.0, v=actor_speed())))
        if cfg.with_ramp_leader:
            self.vehicles.append(_Vehicle("ramp_leader", RAMP, VehicleState(
                x=cfg.av_initial_x + cfg.ramp_leader_distance, y=0.0,
                phi=0.0, v=actor_speed())))
        if cfg.with_ramp_follower:
            self.vehicles.append(_Vehicle("ramp_follower", RAMP, VehicleState(
                x=cfg.av_initial_x - cfg.ramp_follower_distance, y=0.0,
                phi=0.0, v=actor_speed())))

        self.schedule = spawn_traffic(cfg, self.rng)

        self.acc = UnsatisfactoryAccumulator(v_des=cfg.v_des, dt=cfg.dt)
        self.decision_flag = False
        self.status = STATUS_FOLLOWING
        self.executing = False
        self.exec_start_time = 0.0
        self.exec_start_x = 0.0
        self.selected: Optional[CandidateTrajectory] = None
        self.planning_events: list[PlanningEvent] = []
        self.deferrals_ttc = 0
        self.deferrals_no_feasible = 0
        self.initiation_step: Optional[int] = None
        self.initiation_ttc: Optional[float] = None
        self.time = 0.0
        self.step_index = 0
        self.outcome: Optional[str] = None
        self.records: list[StepRecord] = []

    # -- lane/band helpers -------------------------------------------------

    def _lane_y(self, lane: str) -> float:
        return 0.0 if lane == RAMP else self.cfg.main_lane_y

    def _lane_of(self, state: VehicleState) -> str:
        return RAMP if abs(state.y) <= abs(state.y - self.cfg.main_lane_y) \
            else MAIN

    def _in_band(self, state: VehicleState, lane: str) -> bool:
        # body overlaps the lane strip
        half = self.cfg.lane_width / 2.0 + self.cfg.vehicle.body_width / 2.0
        return abs(state.y - self._lane_y(lane)) < half

    def _band_leader(self, veh: _Vehicle) -> Optional[VehicleState]:
        best = None
        for other in self.vehicles:
            if other is veh:
                continue
            s = other.state
            if s.x > veh.state.x and self._in_band(s, veh.lane):
                if best is None or s.x < best.x:
                    best = s
        return best

    def _traffic_seen_by_av(self):
        return [(v.state, v.lane) for v in self.vehicles if not v.is_av]

    # -- controls ----------------------------------------------------------

    def _car_following_state(self, veh: _Vehicle) -> VehicleState:
        cfg = self.cfg
        leader = self._band_leader(veh)
        if leader is None:
            a = idm_acceleration(veh.state.v, math.inf, 0.0, cfg.idm,
                                 limits=cfg.vehicle)
        else:
            gap = leader.x - veh.state.x - cfg.vehicle.body_length
            try:
                a = idm_acceleration(veh.state.v, gap, leader.v, cfg.idm,
                                     limits=cfg.vehicle)
            except NonPositiveGapError:
                # overlapping abscissas without box overlap (side-by-side
                # pass); brake hard and let the collision check decide
                a = cfg.vehicle.a_min
        v_cmd = veh.state.v + a * cfg.dt
        return step_kinematics(veh.state, v_cmd, 0.0, cfg.dt, cfg.vehicle)

    def _playback_state(self, tau: float) -> VehicleState:
        cfg = self.cfg
        cand = self.selected
        if tau >= cand.t_e:
            x = self.exec_start_x + cand.x_e + cfg.v_des * (tau - cand.t_e)
            return VehicleState(x=x, y=cfg.main_lane_y, phi=0.0,
                                v=cfg.v_des, delta=0.0, a=0.0)
        disp = float(cand.s_xt.value(tau))
        xdot = float(cand.s_xt.deriv1(tau))
        slope = float(cand.s_yx.deriv1(disp))
        ydd = float(cand.s_yx.deriv2(disp))
        kappa = ydd / (1.0 + slope * slope) ** 1.5
        v = math.hypot(xdot, slope * xdot)
        v = min(max(v, cfg.vehicle.v_min), cfg.vehicle.v_max)
        delta = math.atan(cfg.vehicle.wheelbase_L * kappa)
        delta = min(max(delta, -cfg.vehicle.delta_max), cfg.vehicle.delta_max)
        return VehicleState(x=self.exec_start_x + disp,
                            y=float(cand.s_yx.value(disp)),
                            phi=math.atan(slope), v=v, delta=delta,
                            a=float(cand.s_xt.deriv2(tau)))

    def _apf_av_state(self) -> VehicleState:
        # the reactive baseline responds to the nearest obstacles in either
        # lane, not the lane-filtered FV/RV pair the planner risk term uses
        cfg = self.cfg
        av = self.av.state
        ahead = behind = None
        for v in self.vehicles:
            if v.is_av:
                continue
            s = v.state
            if s.x > av.x and (ahead is None or s.x < ahead.x):
                ahead = s
            if s.x < av.x and (behind is None or s.x > behind.x):
                behind = s
        v_cmd, delta_cmd = apf_step(av, ahead, behind, cfg.main_lane_y,
                                    cfg.apf, cfg.vehicle)
        return step_kinematics(av, v_cmd, delta_cmd, cfg.dt, cfg.vehicle)

    # -- spawning ----------------------------------------------------------

    def _process_spawns(self):
        cfg = self.cfg
        for arr in self.schedule:
            if arr.spawned or arr.time > self.time:
                continue
            leader = None
            for v in self.vehicles:
                if v.lane == arr.lane and v.state.x >= 0 \
                        and self._in_band(v.state, arr.lane):
                    if leader is None or v.state.x < leader.state.x:
                        leader = v
            min_gap = cfg.idm.s0_min_gap + arr.speed * cfg.idm.T_headway
            if leader is not None:
                gap = leader.state.x - cfg.vehicle.body_length
                if gap < min_gap:
                    arr.time += cfg.dt  # re-queue one step
                    continue
            self.vehicles.append(_Vehicle(arr.vid, arr.lane, VehicleState(
                x=0.0, y=self._lane_y(arr.lane), phi=0.0, v=arr.speed)))
            arr.spawned = True

    def _despawn_finished(self):
        cfg = self.cfg
        keep = []
        for v in self.vehicles:
            length = cfg.ramp_lane_length if v.lane == RAMP \
                else cfg.main_lane_length
            if v.is_av or v.state.x <= length:
                keep.append(v)
        self.vehicles = keep

    # -- decision & planning ------------------------------------------------

    def _runway(self) -> float:
        return self.cfg.ramp_lane_length - self.av.state.x

    def _effective_threshold(self) -> float:
        """Ramp-end forcing: the threshold decays linearly to zero while the
        remaining runway shrinks from (d_max + forcing zone) to d_max, below
        which the trigger fires unconditionally (see advance)."""
        cfg = self.cfg
        slack = self._runway() - cfg.grid.d_max
        if slack >= cfg.forcing_zone_length:
            return cfg.decision.threshold
        frac = max(slack, 0.0) / cfg.forcing_zone_length
        return max(cfg.decision.threshold * frac, 1e-12)

    def _candidate_collides(self, cand: CandidateTrajectory) -> bool:
        """Predicted sweep of the candidate against constant-velocity traffic.

        Predicted obstacle boxes are inflated by a safety margin to absorb
        the drift of real traffic (which accelerates and brakes) away from
        the constant-velocity prediction over the maneuver horizon.
        """
        cfg = self.cfg
        n = int(math.floor(cand.t_e / cfg.dt + 1e-9))
        taus = [i * cfg.dt for i in range(n + 1)]
        if taus[-1] < cand.t_e - 1e-9:
            taus.append(cand.t_e)
        others = [v.state for v in self.vehicles if not v.is_av]
        inflated = replace(
            cfg.vehicle,
            body_length=cfg.vehicle.body_length + 2 * cfg.veto_margin_long,
            body_width=cfg.vehicle.body_width + 2 * cfg.veto_margin_lat)
        for tau in taus:
            pose = self._pose_on_candidate(cand, tau)
            for s in others:
                pred = VehicleState(
                    x=s.x + s.v * math.cos(s.phi) * tau,
                    y=s.y + s.v * math.sin(s.phi) * tau,
                    phi=s.phi, v=s.v)
                if check_collision(pose, cfg.vehicle, pred, inflated):
                    return True
        return False

    def _pose_on_candidate(self, cand: CandidateTrajectory,
                           tau: float) -> VehicleState:
        disp = float(cand.s_xt.value(tau))
        slope = float(cand.s_yx.deriv1(disp))
        return VehicleState(x=self.av.state.x + disp,
                            y=float(cand.s_yx.value(disp)),
                            phi=math.atan(slope),
                            v=max(float(cand.s_xt.deriv1(tau)), 0.0))

    def _try_plan(self):
        cfg = self.cfg
        av = self.av.state
        fv, rv = identify_fv_rv(av, self._traffic_seen_by_av())

        ttc_now = ttc(av, fv, cfg.vehicle)
        if ttc_now < cfg.ttc_initiation_threshold:
            self.status = STATUS_DEFERRED_TTC
            self.deferrals_ttc += 1
            return

        bc = BoundaryConditions(
            y_s=av.y, phi_s=av.phi, delta_s=av.delta, v_s=av.v, a_s=av.a,
            lane_offset_w=cfg.main_lane_y - av.y, v_comfort=cfg.v_des,
            wheelbase_L=cfg.vehicle.wheelbase_L)
        grid = replace(cfg.grid, x_s=0.0, t_s_start=0.0)
        candidates = generate_candidates(
            bc, grid, cfg.weights, cfg.v_des, av, fv, rv, dt=cfg.dt,
            rv_predictive=cfg.rv_predictive_risk)
        vetoed = [c.feasible and self._candidate_collides(c)
                  for c in candidates]
        survivors = [c for c, bad in zip(candidates, vetoed) if not bad]

        try:
            best = select_best(survivors)
        except NoFeasibleCandidateError:
            self.status = STATUS_NO_FEASIBLE
            self.deferrals_no_feasible += 1
            self.planning_events.append(PlanningEvent(
                self.step_index, self.time, candidates, vetoed, None, ttc_now))
            return

        self.selected = best
        self.executing = True
        self.exec_start_time = self.time
        self.exec_start_x = av.x
        self.initiation_step = self.step_index
        self.initiation_ttc = ttc_now
        self.status = STATUS_PLANNED
        self.planning_events.append(PlanningEvent(
            self.step_index, self.time, candidates, vetoed,
            (best.m_index, best.n_index), ttc_now))

    # -- bookkeeping ---------------------------------------------------------

    def _v_vir_sample(self) -> float:
        cfg = self.cfg
        best = None
        best_dist = cfg.v_vir_window
        for v in self.vehicles:
            if v.is_av or v.lane != MAIN:
                continue
            d = abs(v.state.x - self.av.state.x)
            if d <= best_dist:
                best_dist = d
                best = v.state.v
        return cfg.v_des if best is None else best

    def _record(self):
        cfg = self.cfg
        fv, rv = (None, None)
        ttc_now = math.inf
        if self.av is not None:
            fv, rv = identify_fv_rv(self.av.state, self._traffic_seen_by_av())
            ttc_now = ttc(self.av.state, fv, cfg.vehicle)
        recs = []
        for v in self.vehicles:
            if v.is_av:
                role = "AV"
            elif fv is not None and v.state is fv:
                role = "FV"
            elif rv is not None and v.state is rv:
                role = "RV"
            else:
                role = "other"
            recs.append(VehicleRecord(
                v.vid, role, self._lane_of(v.state), v.state.x, v.state.y,
                v.state.phi, v.state.v, v.state.a))
        sel = self.selected
        self.records.append(StepRecord(
            step=self.step_index, time=self.time, vehicles=recs,
            c_av=self.acc.c_av, c_vir=self.acc.c_vir,
            decision_flag=self.decision_flag, planner_status=self.status,
            selected_m=sel.m_index if sel else None,
            selected_n=sel.n_index if sel else None,
            u_total=sel.u_total if sel else None,
            ttc_av_fv=ttc_now))

    # -- outcome checks ------------------------------------------------------

    def _check_outcomes(self):
        cfg = self.cfg
        for i in range(len(self.vehicles)):
            for j in range(i + 1, len(self.vehicles)):
                if check_collision(self.vehicles[i].state, cfg.vehicle,
                                   self.vehicles[j].state, cfg.vehicle):
                    self.outcome = OUTCOME_COLLISION
                    return
        if self.av is None:
            return
        av = self.av.state
        if (abs(av.y - cfg.main_lane_y) <= cfg.merge_tol_y
                and abs(av.phi) <= cfg.merge_tol_phi):
            self.outcome = OUTCOME_MERGED
            self.status = STATUS_MERGED
            return
        on_ramp_band = abs(av.y) < cfg.lane_width / 2.0
        if av.x >= cfg.ramp_lane_length and on_ramp_band:
            self.outcome = OUTCOME_TIMEOUT

    # -- main loop -----------------------------------------------------------

    def advance(self):
        """One simulation step: controls, integration, spawns, decision.

        All controls are computed from the same pre-step snapshot, then
        applied together (simultaneous update).
        """
        cfg = self.cfg

        updates: list[tuple[_Vehicle, VehicleState]] = []
        for v in self.vehicles:
            if v.is_av:
                continue
            updates.append((v, self._car_following_state(v)))
        if self.av is not None:
            if cfg.av_controller == "apf":
                updates.append((self.av, self._apf_av_state()))
            elif self.executing:
                tau = (self.time + cfg.dt) - self.exec_start_time
                updates.append((self.av, self._playback_state(tau)))
                self.status = STATUS_EXECUTING
            else:
                updates.append((self.av, self._car_following_state(self.av)))
        for veh, state in updates:
            veh.state = state

        self.time += cfg.dt
        self.step_index += 1
        self._process_spawns()
        self._despawn_finished()

        if self.av is not None and cfg.av_controller == "planner":
            if not self.executing:
                self.acc = accumulate(self.acc, self.av.state.v,
                                      self._v_vir_sample())
                decision = replace(cfg.decision,
                                   threshold=self._effective_threshold())
                if (should_change_lane(self.acc, decision)
                        or self._runway() <= cfg.grid.d_max):
                    self.decision_flag = True
                if self.decision_flag:
                    self._try_plan()

        self._check_outcomes()
        self._record()

    def run(self) -> SimulationTrace:
        self._record()  # step 0 snapshot
        while self.outcome is None and self.time < self.cfg.timeout_s - 1e-9:
            self.advance()
        if self.outcome is None:
            self.outcome = OUTCOME_TIMEOUT
        return SimulationTrace(
            steps=self.records, outcome=self.outcome,
            planning_events=self.planning_events,
            deferrals_ttc=self.deferrals_ttc,
            deferrals_no_feasible=self.deferrals_no_feasible,
            initiation_step=self.initiation_step,
            initiation_ttc=self.initiation_ttc,
            selected_candidate=self.selected,
            config=self.cfg)


def run_episode(cfg: ScenarioConfig) -> SimulationTrace:
    """Run one deterministic episode from spawn to merge/collision/timeout."""
    return _Engine(cfg).run()
