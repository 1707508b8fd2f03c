import math

import pytest

from rampmerge import (ScenarioConfig, TrialSummary, ValidationError,
                       VehicleParams, VehicleState, aggregate, decision_time,
                       run_episode, trial_summary, ttc)

PARAMS = VehicleParams()


def veh(x, v):
    return VehicleState(x=x, y=0.0, phi=0.0, v=v)


class TestTtc:
    def test_definition(self):
        # bumper gap 30 m, closing 10 m/s
        follower = veh(0.0, 20.0)
        leader = veh(30.0 + PARAMS.body_length, 10.0)
        assert ttc(follower, leader, PARAMS) == pytest.approx(3.0, rel=1e-12)

    def test_opening_gap_is_infinite(self):
        assert ttc(veh(0.0, 10.0), veh(30.0, 20.0), PARAMS) == math.inf
        assert ttc(veh(0.0, 10.0), veh(30.0, 10.0), PARAMS) == math.inf

    def test_absent_leader_is_infinite(self):
        assert ttc(veh(0.0, 10.0), None, PARAMS) == math.inf

    def test_negative_gap_reported_signed(self):
        follower = veh(0.0, 20.0)
        leader = veh(2.0, 10.0)  # bumper gap 2 - 4.5 < 0
        value = ttc(follower, leader, PARAMS)
        assert value < 0.0
        assert value == pytest.approx((2.0 - 4.5) / 10.0, rel=1e-12)

    def test_scale_consistency(self):
        base = ttc(veh(0.0, 20.0), veh(30.0 + 4.5, 10.0), PARAMS)
        doubled = ttc(veh(0.0, 30.0), veh(60.0 + 4.5, 10.0), PARAMS)
        assert doubled == pytest.approx(base, rel=1e-12)


class TestDecisionTime:
    def test_flag_step_time(self):
        trace = run_episode(ScenarioConfig())
        t = decision_time(trace)
        first = next(r for r in trace.steps if r.decision_flag)
        assert t == first.time
        # within one step of the accumulator crossing the threshold
        prev = trace.steps[first.step - 1]
        assert not prev.decision_flag

    def test_matches_accumulator_threshold_crossing(self):
        cfg = ScenarioConfig()
        trace = run_episode(cfg)
        t = decision_time(trace)
        crossing = next(r.time for r in trace.steps
                        if r.c_av > cfg.decision.threshold)
        assert abs(t - crossing) <= cfg.dt + 1e-9

    def test_absent_when_never_triggered(self):
        cfg = ScenarioConfig(av_initial_v=26.4, av_initial_x=0.0,
                             ramp_flow=0.0, main_flow=0.0,
                             with_sweep_vehicle=False, with_ramp_leader=False,
                             with_ramp_follower=False, timeout_s=2.0)
        trace = run_episode(cfg)
        assert decision_time(trace) is None
        summary = trial_summary(trace)
        assert summary.decision_time is None
        assert summary.min_ttc_after_decision is None


def make_summary(value):
    return TrialSummary(decision_time=value, min_ttc_after_decision=None,
                        mean_velocity=20.0, max_abs_curvature=None,
                        mean_abs_curvature=None, outcome="merged")


class TestAggregate:
    def test_single_trial_convention(self):
        report = aggregate([make_summary(1.5)])
        st = report["decision_time"]
        assert st.mean == st.median == 1.5
        assert st.std == 0.0
        assert st.count == 1

    def test_hand_arithmetic(self):
        report = aggregate([make_summary(v) for v in (1.0, 2.0, 3.0)])
        st = report["decision_time"]
        assert st.mean == pytest.approx(2.0)
        assert st.median == pytest.approx(2.0)
        assert st.std == pytest.approx(1.0)
        assert (st.min, st.max) == (1.0, 3.0)

    def test_permutation_invariance(self):
        vals = [0.9, 1.7, 1.1, 2.4, 1.3]
        a = aggregate([make_summary(v) for v in vals])
        b = aggregate([make_summary(v) for v in reversed(vals)])
        for field in a:
            assert a[field] == b[field]

    def test_absent_values_excluded_with_count(self):
        rows = [make_summary(1.0), make_summary(None),
                make_summary(math.inf)]
        st = aggregate(rows)["decision_time"]
        assert st.count == 1
        assert st.excluded == 2
        assert st.mean == 1.0

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError):
            aggregate([])
