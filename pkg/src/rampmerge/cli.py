"""Command-line entry point.

Verbs:
    run                one episode -> trace/candidates/summary files
    sweep              parameter sweep, N trials per point -> per-episode
                       traces plus aggregated report
    calibrate          bisection on the decision threshold so the mean
                       decision time hits a target
    compare-baselines  curvature table (quintic / bezier / b-spline) and a
                       velocity comparison against the potential-field planner

All outputs are reproducible from (config, seed) alone; floats are written
with 9 significant digits.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .baselines import bezier_lane_change, bspline_lane_change, \
    curvature_profile, quintic_curve
from .configio import apply_override, scenario_from_text, scenario_to_text
from .errors import RampMergeError, ValidationError
from .metrics import aggregate, trial_summary
from .simulator import OUTCOME_COLLISION, ScenarioConfig, SimulationTrace, \
    run_episode

TRACE_COLUMNS = ("step,time_s,vehicle_id,role,x_m,y_m,phi_rad,v_mps,a_mps2,"
                 "lane,c_av,c_vir,decision_flag,planner_status,selected_m,"
                 "selected_n,u_total")

TRIALS_COLUMNS = ("episode,param_value,seed,decision_time_s,"
                  "ttc_at_initiation_s,min_ttc_after_decision_s,"
                  "mean_velocity_mps,max_abs_curvature_per_m,"
                  "mean_abs_curvature_per_m,outcome,deferrals_ttc,"
                  "deferrals_no_feasible")

CANDIDATE_COLUMNS = ("m,n,x_e_m,t_e_s,u_yx,u_xt,u_risk,u_total,feasible,"
                     "vetoed,selected,sample_idx,x_m,y_m")

CANDIDATE_SAMPLES = 33


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        if not math.isfinite(x):
            return ""
        return f"{x:.9g}"
    return str(x)


def episode_seed(base_seed: int, episode_index: int) -> int:
    """Stable per-episode RNG stream derived from (seed, trial index)."""
    seq = np.random.SeedSequence([int(base_seed), int(episode_index)])
    return int(seq.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# writers
# ---------------------------------------------------------------------------

def write_trace_csv(trace: SimulationTrace, path: Path):
    lines = [TRACE_COLUMNS]
    for rec in trace.steps:
        for v in rec.vehicles:
            lines.append(",".join((
                str(rec.step), _fmt(rec.time), v.vid, v.role, _fmt(v.x),
                _fmt(v.y), _fmt(v.phi), _fmt(v.v), _fmt(v.a), v.lane,
                _fmt(rec.c_av), _fmt(rec.c_vir),
                "1" if rec.decision_flag else "0", rec.planner_status,
                _fmt(rec.selected_m), _fmt(rec.selected_n),
                _fmt(rec.u_total))))
    path.write_text("\n".join(lines) + "\n")


def write_candidates_csv(trace: SimulationTrace, path: Path):
    """The executed (or last evaluated) candidate cluster, sampled in world
    coordinates for plotting."""
    event = None
    for ev in trace.planning_events:
        event = ev
        if ev.selected is not None:
            break
    lines = [CANDIDATE_COLUMNS]
    if event is not None:
        av_x = next(v.x for v in trace.steps[event.step].vehicles
                    if v.role == "AV")
        for cand, vetoed in zip(event.candidates, event.vetoed):
            selected = (event.selected is not None
                        and (cand.m_index, cand.n_index) == event.selected)
            for i in range(CANDIDATE_SAMPLES):
                disp = cand.x_e * i / (CANDIDATE_SAMPLES - 1)
                lines.append(",".join((
                    str(cand.m_index), str(cand.n_index), _fmt(cand.x_e),
                    _fmt(cand.t_e), _fmt(cand.u_yx), _fmt(cand.u_xt),
                    _fmt(cand.u_risk), _fmt(cand.u_total),
                    "1" if cand.feasible else "0", "1" if vetoed else "0",
                    "1" if selected else "0", str(i), _fmt(av_x + disp),
                    _fmt(float(cand.s_yx.value(disp))))))
    path.write_text("\n".join(lines) + "\n")


def write_trials_csv(rows, path: Path):
    """rows: list of (episode, param_value, seed, TrialSummary)."""
    lines = [TRIALS_COLUMNS]
    for episode, param_value, seed, s in rows:
        lines.append(",".join((
            str(episode), _fmt(param_value), str(seed),
            _fmt(s.decision_time), _fmt(s.ttc_at_initiation),
            _fmt(s.min_ttc_after_decision), _fmt(s.mean_velocity),
            _fmt(s.max_abs_curvature), _fmt(s.mean_abs_curvature),
            s.outcome, str(s.deferrals_ttc), str(s.deferrals_no_feasible))))
    path.write_text("\n".join(lines) + "\n")


def write_ttc_series_csv(traces: list[SimulationTrace], path: Path):
    lines = ["episode,step,time_s,ttc_s"]
    for episode, trace in enumerate(traces):
        for rec in trace.steps:
            lines.append(",".join((str(episode), str(rec.step),
                                   _fmt(rec.time), _fmt(rec.ttc_av_fv))))
    path.write_text("\n".join(lines) + "\n")


def write_report(report: dict, outcomes: list[str], path: Path,
                 header: str = "", extra_lines: list[str] | None = None):
    lines = []
    if header:
        lines.append(header)
    lines.append(f"episodes: {len(outcomes)}")
    for outcome in ("merged", "timeout", "collision"):
        lines.append(f"outcome {outcome}: {outcomes.count(outcome)}")
    lines.append("")
    lines.append(f"{'metric':32s} {'mean':>12s} {'median':>12s} {'std':>12s} "
                 f"{'min':>12s} {'max':>12s} {'n':>5s} {'excl':>5s}")
    for name, st in report.items():
        lines.append(f"{name:32s} {_fmt(st.mean):>12s} {_fmt(st.median):>12s} "
                     f"{_fmt(st.std):>12s} {_fmt(st.min):>12s} "
                     f"{_fmt(st.max):>12s} {st.count:5d} {st.excluded:5d}")
    if extra_lines:
        lines.append("")
        lines.extend(extra_lines)
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _load_config(args) -> ScenarioConfig:
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ValidationError(f"config file not found: {path}")
        cfg = scenario_from_text(path.read_text())
    else:
        cfg = ScenarioConfig()
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    if getattr(args, "trials", None):
        cfg = replace(cfg, trial_count=args.trials)
    return cfg


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = _prepare_out(args)
    trace = run_episode(cfg)
    summary = trial_summary(trace)

    write_trace_csv(trace, out / "trace.csv")
    write_candidates_csv(trace, out / "candidates.csv")
    write_ttc_series_csv([trace], out / "ttc_series.csv")
    write_trials_csv([(0, None, cfg.rng_seed, summary)], out / "trials.csv")
    write_report(aggregate([summary]), [trace.outcome], out / "summary.txt",
                 header="single episode")
    (out / "config_echo.cfg").write_text(scenario_to_text(cfg))

    if args.fail_on_collision and trace.outcome == OUTCOME_COLLISION:
        return 2
    return 0


def _run_sweep(cfg: ScenarioConfig, param: str, values: list[float],
               trials: int, controller: str | None = None):
    traces, rows = [], []
    episode = 0
    for value in values:
        cfg_v = apply_override(cfg, param, value)
        if controller:
            cfg_v = replace(cfg_v, av_controller=controller)
        for _ in range(trials):
            seed = episode_seed(cfg.rng_seed, episode)
            trace = run_episode(replace(cfg_v, rng_seed=seed))
            traces.append(trace)
            rows.append((episode, value, seed, trial_summary(trace)))
            episode += 1
    return traces, rows


def _sweep_values(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ValidationError("--step must be positive")
    if stop < start:
        raise ValidationError("--to must be >= --from")
    values = []
    v = start
    while v <= stop + 1e-9:
        values.append(round(v, 12))
        v += step
    return values


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _prepare_out(args)
    values = _sweep_values(args.start, args.stop, args.step)
    traces, rows = _run_sweep(cfg, args.param, values, cfg.trial_count)

    traces_dir = out / "traces"
    traces_dir.mkdir(exist_ok=True)
    for episode, trace in enumerate(traces):
        write_trace_csv(trace, traces_dir / f"ep_{episode:03d}.csv")
    planned = next((t for t in traces
                    if t.selected_candidate is not None), traces[0])
    write_candidates_csv(planned, out / "candidates.csv")
    write_ttc_series_csv(traces, out / "ttc_series.csv")
    write_trials_csv(rows, out / "trials.csv")
    outcomes = [t.outcome for t in traces]
    write_report(aggregate([r[3] for r in rows]), outcomes,
                 out / "report.txt",
                 header=f"sweep {args.param} over {values} x "
                        f"{cfg.trial_count} trials")
    (out / "config_echo.cfg").write_text(scenario_to_text(cfg))

    if args.fail_on_collision and OUTCOME_COLLISION in outcomes:
        return 2
    return 0


def calibrate_threshold(cfg: ScenarioConfig, target: float, trials: int,
                        lo: float = 0.02, hi: float = 1.2,
                        iterations: int = 24) -> tuple[float, float]:
    """Bisection on the decision threshold toward a target mean decision
    time.  Mean decision time is non-decreasing in the threshold."""

    def mean_decision_time(threshold: float) -> float:
        times = []
        for i in range(trials):
            cfg_i = replace(cfg,
                            rng_seed=episode_seed(cfg.rng_seed, i),
                            decision=replace(cfg.decision,
                                             threshold=threshold))
            summary = trial_summary(run_episode(cfg_i))
            if summary.decision_time is not None:
                times.append(summary.decision_time)
        return sum(times) / len(times) if times else math.inf

    if mean_decision_time(lo) >= target:
        return lo, mean_decision_time(lo)
    if mean_decision_time(hi) <= target:
        return hi, mean_decision_time(hi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        mean = mean_decision_time(mid)
        if abs(mean - target) < 5e-3:
            return mid, mean
        if mean < target:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return mid, mean_decision_time(mid)


def cmd_calibrate(args) -> int:
    cfg = _load_config(args)
    out = _prepare_out(args)
    threshold, mean = calibrate_threshold(cfg, args.target, cfg.trial_count)
    calibrated = replace(cfg, decision=replace(cfg.decision,
                                               threshold=threshold))
    (out / "calibrated.cfg").write_text(scenario_to_text(calibrated))
    (out / "calibration.txt").write_text(
        f"target_mean_decision_time_s = {_fmt(args.target)}\n"
        f"calibrated_threshold = {_fmt(threshold)}\n"
        f"achieved_mean_decision_time_s = {_fmt(mean)}\n")
    return 0


def cmd_compare_baselines(args) -> int:
    cfg = _load_config(args)
    out = _prepare_out(args)

    trace = run_episode(cfg)
    cand = trace.selected_candidate
    if cand is None:
        raise ValidationError("reference episode never planned a lane change;"
                              " cannot compare curves")
    start_x = next(v.x for v in trace.steps[trace.initiation_step].vehicles
                   if v.role == "AV")
    y_s = float(cand.s_yx.value(0.0))
    start = (start_x, y_s)
    end = (start_x + cand.x_e, float(cand.s_yx.value(cand.x_e)))

    curves = {
        "quintic": quintic_curve(cand.s_yx, x_start=start_x),
        "bezier": bezier_lane_change(start, end, heading_s=0.0),
        "bspline": bspline_lane_change(start, end),
    }
    table_lines = ["method,mean_abs_curvature_per_m,max_abs_curvature_per_m"]
    curve_lines = ["method,sample_idx,x_m,y_m,arclength_m,kappa_per_m"]
    table = {}
    for name, curve in curves.items():
        prof = curvature_profile(curve, samples=1001)
        table[name] = prof
        table_lines.append(f"{name},{_fmt(prof.mean_abs)},{_fmt(prof.max_abs)}")
        pts = curve.point(np.linspace(0.0, 1.0, 201))
        arcs = [a for a, _ in prof.points[::5]]
        kaps = [k for _, k in prof.points[::5]]
        for i, ((x, y), arc, kap) in enumerate(zip(pts, arcs, kaps)):
            curve_lines.append(f"{name},{i},{_fmt(float(x))},{_fmt(float(y))},"
                               f"{_fmt(arc)},{_fmt(kap)}")
    (out / "curvature_table.csv").write_text("\n".join(table_lines) + "\n")
    (out / "curves.csv").write_text("\n".join(curve_lines) + "\n")

    values = _sweep_values(-15.0, 15.0, 3.0)
    vel_lines = ["method,mean_velocity_mps,std_mps,episodes,collisions"]
    means = {}
    for method, controller in (("proposed", "planner"), ("apf", "apf")):
        traces, rows = _run_sweep(cfg, "initial_fv_relative_distance",
                                  values, cfg.trial_count, controller)
        vels = [r[3].mean_velocity for r in rows]
        mean_v = sum(vels) / len(vels)
        std_v = (sum((v - mean_v) ** 2 for v in vels)
                 / (len(vels) - 1)) ** 0.5 if len(vels) > 1 else 0.0
        collisions = sum(1 for t in traces if t.outcome == OUTCOME_COLLISION)
        means[method] = mean_v
        vel_lines.append(f"{method},{_fmt(mean_v)},{_fmt(std_v)},"
                         f"{len(rows)},{collisions}")
    (out / "velocity_comparison.csv").write_text("\n".join(vel_lines) + "\n")

    report = ["curvature comparison (per-curve sample averages):"]
    report.extend(table_lines)
    report.append("")
    report.append("velocity comparison over the standard sweep:")
    report.extend(vel_lines)
    (out / "report.txt").write_text("\n".join(report) + "\n")
    (out / "config_echo.cfg").write_text(scenario_to_text(cfg))
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rampmerge",
        description="Deterministic ramp-merging simulation kit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="scenario config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None,
                       help="trials per sweep point / calibration sample")
        p.add_argument("--fail-on-collision", action="store_true")

    p_run = sub.add_parser("run", help="single episode")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="parameter sweep")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--step", type=float, required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_cal = sub.add_parser("calibrate", help="fit the decision threshold")
    common(p_cal)
    p_cal.add_argument("--target", type=float, default=1.24,
                       help="target mean decision time [s]")
    p_cal.set_defaults(func=cmd_calibrate)

    p_cmp = sub.add_parser("compare-baselines",
                           help="curve and velocity comparisons")
    common(p_cmp)
    p_cmp.set_defaults(func=cmd_compare_baselines)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RampMergeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
