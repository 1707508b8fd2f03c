import math

import pytest

from rampmerge import ScenarioConfig, ValidationError
from rampmerge.cli import main
from rampmerge.configio import (apply_override, parse_config_text,
                                scenario_from_text, scenario_to_text)
from rampmerge.decision import DecisionConfig


class TestConfigRoundTrip:
    def test_defaults_round_trip(self):
        cfg = ScenarioConfig()
        text = scenario_to_text(cfg)
        assert scenario_from_text(text) == cfg

    def test_modified_round_trip(self):
        cfg = ScenarioConfig(rng_seed=987, ramp_flow=123.456,
                             av_controller="apf",
                             decision=DecisionConfig(threshold=0.31415,
                                                     mode="relative"))
        text = scenario_to_text(cfg)
        assert scenario_from_text(text) == cfg

    def test_overrides_applied(self):
        cfg = scenario_from_text("scenario.v_des = 30.0\n"
                                 "weights.w_risk = 25.0\n"
                                 "# a comment\n"
                                 "decision.mode = relative\n")
        assert cfg.v_des == 30.0
        assert cfg.weights.w_risk == 25.0
        assert cfg.decision.mode == "relative"

    def test_unknown_key_names_line(self):
        with pytest.raises(ValidationError, match="line 2"):
            parse_config_text("scenario.v_des = 30\nscenario.bogus = 1\n")

    def test_bad_value_names_line(self):
        with pytest.raises(ValidationError, match="line 1"):
            parse_config_text("scenario.v_des = fast\n")

    def test_missing_equals_names_line(self):
        with pytest.raises(ValidationError, match="line 3"):
            parse_config_text("\n# ok\nscenario.v_des 30\n")

    def test_apply_override_bare_and_dotted(self):
        cfg = ScenarioConfig()
        assert apply_override(cfg, "initial_fv_relative_distance", -9.0) \
            .initial_fv_relative_distance == -9.0
        assert apply_override(cfg, "weights.w_risk", 3.0).weights.w_risk == 3.0
        with pytest.raises(ValidationError):
            apply_override(cfg, "nope", 1.0)


class TestCli:
    def test_run_and_determinism(self, tmp_path):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        assert main(["run", "--out", str(out1), "--seed", "11"]) == 0
        assert main(["run", "--out", str(out2), "--seed", "11"]) == 0
        for name in ("trace.csv", "candidates.csv", "trials.csv",
                     "ttc_series.csv", "config_echo.cfg"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_run_config_echo_parses_back(self, tmp_path):
        out = tmp_path / "run"
        assert main(["run", "--out", str(out), "--seed", "5"]) == 0
        cfg = scenario_from_text((out / "config_echo.cfg").read_text())
        assert cfg.rng_seed == 5

    def test_trace_schema(self, tmp_path):
        out = tmp_path / "run"
        assert main(["run", "--out", str(out)]) == 0
        header = (out / "trace.csv").read_text().splitlines()[0]
        assert header == ("step,time_s,vehicle_id,role,x_m,y_m,phi_rad,"
                          "v_mps,a_mps2,lane,c_av,c_vir,decision_flag,"
                          "planner_status,selected_m,selected_n,u_total")

    def test_malformed_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text("scenario.v_des = banana\n")
        code = main(["run", "--config", str(bad), "--out",
                     str(tmp_path / "o")])
        assert code == 1
        assert "line 1" in capsys.readouterr().err

    def test_infeasible_scenario_rejected_before_simulation(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("scenario.lane_width = 1.0\n")
        assert main(["run", "--config", str(bad), "--out",
                     str(tmp_path / "o")]) == 1

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.cfg"),
                     "--out", str(tmp_path / "o")]) == 1

    def test_small_sweep_outputs(self, tmp_path):
        out = tmp_path / "sw"
        code = main(["sweep", "--out", str(out), "--seed", "3",
                     "--param", "initial_fv_relative_distance",
                     "--from", "-3", "--to", "3", "--step", "3",
                     "--trials", "2"])
        assert code == 0
        trials = (out / "trials.csv").read_text().splitlines()
        assert len(trials) == 1 + 3 * 2
        assert len(list((out / "traces").glob("ep_*.csv"))) == 6
        assert (out / "report.txt").exists()
        assert (out / "ttc_series.csv").exists()

    def test_sweep_determinism(self, tmp_path):
        args = ["sweep", "--seed", "9", "--param",
                "initial_fv_relative_distance", "--from", "0", "--to", "3",
                "--step", "3", "--trials", "1"]
        assert main(args + ["--out", str(tmp_path / "s1")]) == 0
        assert main(args + ["--out", str(tmp_path / "s2")]) == 0
        assert (tmp_path / "s1" / "trials.csv").read_bytes() \
            == (tmp_path / "s2" / "trials.csv").read_bytes()
        for ep in ("ep_000.csv", "ep_001.csv"):
            assert (tmp_path / "s1" / "traces" / ep).read_bytes() \
                == (tmp_path / "s2" / "traces" / ep).read_bytes()

    def test_bad_sweep_range(self, tmp_path):
        assert main(["sweep", "--out", str(tmp_path / "o"), "--param",
                     "initial_fv_relative_distance", "--from", "5",
                     "--to", "1", "--step", "1"]) == 1

    def test_fail_on_collision_exit_code(self, tmp_path):
        # ramp follower spawned on top of the ego forces a step-1 collision
        crash = tmp_path / "crash.cfg"
        crash.write_text("scenario.ramp_follower_distance = 0.0\n")
        assert main(["run", "--config", str(crash), "--out",
                     str(tmp_path / "c1"), "--fail-on-collision"]) == 2
        # without the flag the collision outcome is reported, not an error
        assert main(["run", "--config", str(crash), "--out",
                     str(tmp_path / "c2")]) == 0

    def test_calibrate_outputs(self, tmp_path):
        out = tmp_path / "cal"
        assert main(["calibrate", "--out", str(out), "--seed", "42",
                     "--trials", "3", "--target", "1.1"]) == 0
        text = (out / "calibration.txt").read_text()
        assert "calibrated_threshold" in text
        calibrated = scenario_from_text((out / "calibrated.cfg").read_text())
        assert calibrated.decision.threshold > 0

    def test_compare_baselines_outputs(self, tmp_path):
        out = tmp_path / "cmp"
        assert main(["compare-baselines", "--out", str(out), "--seed", "42",
                     "--trials", "1"]) == 0
        table = (out / "curvature_table.csv").read_text().splitlines()
        assert table[0] == ("method,mean_abs_curvature_per_m,"
                            "max_abs_curvature_per_m")
        assert {line.split(",")[0] for line in table[1:]} \
            == {"quintic", "bezier", "bspline"}
        velocity = (out / "velocity_comparison.csv").read_text().splitlines()
        assert {line.split(",")[0] for line in velocity[1:]} \
            == {"proposed", "apf"}
