/**
 * The seven figure kinds rendered from the simulator's CSV outputs.
 *
 * Each kind consumes exactly one input file carrying the producing tool's
 * exact column schema; rendering is a pure function of the parsed table,
 * so re-rendering a spec yields identical bytes.
 */

import {
  SchemaError,
  Table,
  column,
  numericColumn,
  parseCsv,
  requireRows,
  requireSchema,
} from "./csv.js";
import { DEFAULT_MARGIN, Svg, drawFrame, extent, fmt } from "./svg.js";

export const TRACE_SCHEMA = [
  "step", "time_s", "vehicle_id", "role", "x_m", "y_m", "phi_rad", "v_mps",
  "a_mps2", "lane", "c_av", "c_vir", "decision_flag", "planner_status",
  "selected_m", "selected_n", "u_total",
];

export const CANDIDATES_SCHEMA = [
  "m", "n", "x_e_m", "t_e_s", "u_yx", "u_xt", "u_risk", "u_total",
  "feasible", "vetoed", "selected", "sample_idx", "x_m", "y_m",
];

export const TRIALS_SCHEMA = [
  "episode", "param_value", "seed", "decision_time_s", "ttc_at_initiation_s",
  "min_ttc_after_decision_s", "mean_velocity_mps", "max_abs_curvature_per_m",
  "mean_abs_curvature_per_m", "outcome", "deferrals_ttc",
  "deferrals_no_feasible",
];

export const TTC_SERIES_SCHEMA = ["episode", "step", "time_s", "ttc_s"];

export const CURVES_SCHEMA = [
  "method", "sample_idx", "x_m", "y_m", "arclength_m", "kappa_per_m",
];

export const CURVATURE_TABLE_SCHEMA = [
  "method", "mean_abs_curvature_per_m", "max_abs_curvature_per_m",
];

export const VELOCITY_SCHEMA = [
  "method", "mean_velocity_mps", "std_mps", "episodes", "collisions",
];

export type FigureKind =
  | "cluster"
  | "losses"
  | "curves"
  | "curvature-bars"
  | "decision-hist"
  | "ttc-band"
  | "velocity-bars";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  output: string;
  width?: number;
  height?: number;
}

const METHOD_COLORS: Record<string, string> = {
  quintic: "#d62728",
  proposed: "#d62728",
  bezier: "#1f77b4",
  bspline: "#2ca02c",
  apf: "#7f7f7f",
};

function methodColor(name: string, index: number): string {
  const fallback = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b"];
  return METHOD_COLORS[name] ?? fallback[index % fallback.length];
}

interface KindDef {
  schema: string[];
  describe: string;
  render(table: Table, width: number, height: number): string;
}

// ---------------------------------------------------------------------------
// cluster: every candidate path faint, the selected one emphasized
// ---------------------------------------------------------------------------

function renderCluster(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  const m = numericColumn(table, "m");
  const n = numericColumn(table, "n");
  const idx = numericColumn(table, "sample_idx");
  const xs = numericColumn(table, "x_m");
  const ys = numericColumn(table, "y_m");
  const selected = column(table, "selected");

  const byCandidate = new Map<string, Array<{ i: number; x: number; y: number; sel: boolean }>>();
  for (let r = 0; r < table.rows.length; r++) {
    const key = `${m[r]},${n[r]}`;
    if (!byCandidate.has(key)) byCandidate.set(key, []);
    byCandidate.get(key)!.push({ i: idx[r], x: xs[r], y: ys[r], sel: selected[r] === "1" });
  }

  const region = {
    x0: DEFAULT_MARGIN.left,
    y0: DEFAULT_MARGIN.top,
    x1: width - DEFAULT_MARGIN.right,
    y1: height - DEFAULT_MARGIN.bottom,
  };
  const frame = drawFrame(svg, region, extent(xs, 0.04), [-2.2, 5.9], {
    title: "Candidate lane-change cluster",
    xLabel: "longitudinal position [m]",
    yLabel: "lateral position [m]",
  });

  // lane markings: ramp centerline y = 0, main centerline y = 3.5
  const laneStyle = 'stroke="#c8c8c8" stroke-width="1" stroke-dasharray="6 4"';
  for (const laneY of [0, 3.5]) {
    svg.line(region.x0, frame.y.at(laneY), region.x1, frame.y.at(laneY), laneStyle);
  }
  svg.line(region.x0, frame.y.at(1.75), region.x1, frame.y.at(1.75),
    'stroke="#aaaaaa" stroke-width="1"');

  const keys = [...byCandidate.keys()].sort((a, b) => {
    const [ma, na] = a.split(",").map(Number);
    const [mb, nb] = b.split(",").map(Number);
    return ma - mb || na - nb;
  });
  let selectedKey: string | null = null;
  for (const key of keys) {
    const pts = byCandidate.get(key)!;
    pts.sort((a, b) => a.i - b.i);
    if (pts[0].sel) selectedKey = key;
    svg.polyline(
      pts.map((p) => [frame.x.at(p.x), frame.y.at(p.y)] as [number, number]),
      'class="candidate" stroke="#b0bec9" stroke-width="1" opacity="0.7"',
    );
  }
  if (selectedKey !== null) {
    const pts = byCandidate.get(selectedKey)!;
    svg.polyline(
      pts.map((p) => [frame.x.at(p.x), frame.y.at(p.y)] as [number, number]),
      'class="selected" stroke="#d62728" stroke-width="2.5"',
    );
  }
  return svg.render();
}

// ---------------------------------------------------------------------------
// losses: four panels over the candidate index
// ---------------------------------------------------------------------------

function renderLosses(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  const idx = numericColumn(table, "sample_idx");
  const m = numericColumn(table, "m");
  const n = numericColumn(table, "n");
  const fields = ["u_yx", "u_xt", "u_risk", "u_total"] as const;
  const values: Record<string, Array<{ k: number; v: number }>> = {};
  for (const f of fields) values[f] = [];

  const nMax = Math.max(...n) + 1;
  for (let r = 0; r < table.rows.length; r++) {
    if (idx[r] !== 0) continue;
    const flat = m[r] * nMax + n[r];
    for (const f of fields) {
      const v = numericColumn(table, f)[r];
      if (Number.isFinite(v)) values[f].push({ k: flat, v });
    }
  }

  const titles: Record<string, string> = {
    u_yx: "path smoothness loss",
    u_xt: "speed profile loss",
    u_risk: "proximity risk loss",
    u_total: "total loss",
  };
  const cols = 2;
  const panelW = (width - 40) / cols;
  const panelH = (height - 30) / 2;
  fields.forEach((f, i) => {
    const px = 20 + (i % cols) * panelW;
    const py = 10 + Math.floor(i / cols) * panelH;
    const region = {
      x0: px + DEFAULT_MARGIN.left,
      y0: py + DEFAULT_MARGIN.top,
      x1: px + panelW - DEFAULT_MARGIN.right,
      y1: py + panelH - DEFAULT_MARGIN.bottom,
    };
    const pts = values[f].sort((a, b) => a.k - b.k);
    const frame = drawFrame(
      svg,
      region,
      extent(pts.map((p) => p.k), 0.02),
      extent(pts.map((p) => p.v)),
      { title: titles[f], xLabel: "candidate index", yLabel: f },
    );
    svg.polyline(
      pts.map((p) => [frame.x.at(p.k), frame.y.at(p.v)] as [number, number]),
      `class="loss-${f}" stroke="#1f77b4" stroke-width="1.5"`,
    );
    for (const p of pts) {
      svg.raw(
        `<circle cx="${fmt(frame.x.at(p.k))}" cy="${fmt(frame.y.at(p.v))}" r="2" fill="#1f77b4"/>`,
      );
    }
  });
  return svg.render();
}

// ---------------------------------------------------------------------------
// curves: trajectories and curvature profiles per method
// ---------------------------------------------------------------------------

function renderCurves(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  const methods = [...new Set(column(table, "method"))];
  const xs = numericColumn(table, "x_m");
  const ys = numericColumn(table, "y_m");
  const arcs = numericColumn(table, "arclength_m");
  const kaps = numericColumn(table, "kappa_per_m");
  const names = column(table, "method");
  const idx = numericColumn(table, "sample_idx");

  const half = width / 2;
  const left = {
    x0: DEFAULT_MARGIN.left,
    y0: DEFAULT_MARGIN.top,
    x1: half - DEFAULT_MARGIN.right,
    y1: height - DEFAULT_MARGIN.bottom,
  };
  const right = {
    x0: half + DEFAULT_MARGIN.left,
    y0: DEFAULT_MARGIN.top,
    x1: width - DEFAULT_MARGIN.right,
    y1: height - DEFAULT_MARGIN.bottom,
  };
  const trajFrame = drawFrame(svg, left, extent(xs, 0.03), extent(ys, 0.1), {
    title: "lane-change trajectories",
    xLabel: "x [m]",
    yLabel: "y [m]",
  });
  const curvFrame = drawFrame(svg, right, extent(arcs, 0.03), extent(kaps, 0.1), {
    title: "curvature profiles",
    xLabel: "arclength [m]",
    yLabel: "curvature [1/m]",
  });

  methods.forEach((method, mi) => {
    const pts: Array<{ i: number; x: number; y: number; a: number; k: number }> = [];
    for (let r = 0; r < table.rows.length; r++) {
      if (names[r] !== method) continue;
      pts.push({ i: idx[r], x: xs[r], y: ys[r], a: arcs[r], k: kaps[r] });
    }
    pts.sort((a, b) => a.i - b.i);
    const color = methodColor(method, mi);
    svg.polyline(
      pts.map((p) => [trajFrame.x.at(p.x), trajFrame.y.at(p.y)] as [number, number]),
      `class="traj-${method}" stroke="${color}" stroke-width="1.8"`,
    );
    svg.polyline(
      pts.map((p) => [curvFrame.x.at(p.a), curvFrame.y.at(p.k)] as [number, number]),
      `class="curv-${method}" stroke="${color}" stroke-width="1.8"`,
    );
    svg.line(left.x0 + 8, left.y0 + 14 + 16 * mi, left.x0 + 30, left.y0 + 14 + 16 * mi,
      `stroke="${color}" stroke-width="2"`);
    svg.text(left.x0 + 36, left.y0 + 18 + 16 * mi, method, 'fill="#333"');
  });
  return svg.render();
}

// ---------------------------------------------------------------------------
// bar charts
// ---------------------------------------------------------------------------

function renderBars(
  svg: Svg,
  width: number,
  height: number,
  labels: string[],
  means: number[],
  opts: { title: string; yLabel: string; whiskers?: number[] },
): void {
  const region = {
    x0: DEFAULT_MARGIN.left,
    y0: DEFAULT_MARGIN.top,
    x1: width - DEFAULT_MARGIN.right,
    y1: height - DEFAULT_MARGIN.bottom,
  };
  const tops = means.map((v, i) => v + (opts.whiskers?.[i] ?? 0));
  const frame = drawFrame(svg, region, [-0.5, labels.length - 0.5],
    [0, Math.max(...tops) * 1.15], { title: opts.title, yLabel: opts.yLabel });
  const bandW = (region.x1 - region.x0) / labels.length;
  labels.forEach((label, i) => {
    const cx = frame.x.at(i);
    const barW = bandW * 0.55;
    const y = frame.y.at(means[i]);
    svg.rect(cx - barW / 2, y, barW, region.y1 - y,
      `class="bar" fill="${methodColor(label, i)}" opacity="0.85"`);
    if (opts.whiskers && Number.isFinite(opts.whiskers[i]) && opts.whiskers[i] > 0) {
      const hi = frame.y.at(means[i] + opts.whiskers[i]);
      const lo = frame.y.at(Math.max(0, means[i] - opts.whiskers[i]));
      svg.line(cx, hi, cx, lo, 'class="whisker" stroke="#222" stroke-width="1.5"');
      svg.line(cx - 6, hi, cx + 6, hi, 'stroke="#222" stroke-width="1.5"');
      svg.line(cx - 6, lo, cx + 6, lo, 'stroke="#222" stroke-width="1.5"');
    }
    svg.text(cx, region.y1 + 16, label, 'text-anchor="middle" fill="#333"');
    svg.text(cx, y - 6, fmt(means[i]), 'text-anchor="middle" fill="#333" font-size="10"');
  });
}

function renderCurvatureBars(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  renderBars(svg, width, height, column(table, "method"),
    numericColumn(table, "mean_abs_curvature_per_m"), {
      title: "average |curvature| by method",
      yLabel: "mean |kappa| [1/m]",
    });
  return svg.render();
}

function renderVelocityBars(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  renderBars(svg, width, height, column(table, "method"),
    numericColumn(table, "mean_velocity_mps"), {
      title: "mean episode velocity by method",
      yLabel: "velocity [m/s]",
      whiskers: numericColumn(table, "std_mps"),
    });
  return svg.render();
}

// ---------------------------------------------------------------------------
// decision-time histogram
// ---------------------------------------------------------------------------

function renderDecisionHist(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  const times = numericColumn(table, "decision_time_s").filter(Number.isFinite);
  if (times.length === 0) {
    throw new SchemaError("trials file has no finite decision_time_s values");
  }
  const [lo, hi] = extent(times, 0);
  const bins = 12;
  const binW = (hi - lo) / bins || 1;
  const counts = new Array<number>(bins).fill(0);
  for (const t of times) {
    const b = Math.min(bins - 1, Math.floor((t - lo) / binW));
    counts[b]++;
  }
  const region = {
    x0: DEFAULT_MARGIN.left,
    y0: DEFAULT_MARGIN.top,
    x1: width - DEFAULT_MARGIN.right,
    y1: height - DEFAULT_MARGIN.bottom,
  };
  const frame = drawFrame(svg, region, [lo - 0.05, hi + 0.05],
    [0, Math.max(...counts) * 1.12], {
      title: "lane-change decision time distribution",
      xLabel: "decision time [s]",
      yLabel: "episodes",
    });
  counts.forEach((count, b) => {
    const x0 = frame.x.at(lo + b * binW);
    const x1 = frame.x.at(lo + (b + 1) * binW);
    const y = frame.y.at(count);
    svg.rect(x0 + 1, y, Math.max(0, x1 - x0 - 2), region.y1 - y,
      'class="bar" fill="#1f77b4" opacity="0.85"');
  });
  const mean = times.reduce((a, b) => a + b, 0) / times.length;
  svg.line(frame.x.at(mean), region.y0, frame.x.at(mean), region.y1,
    'class="mean" stroke="#d62728" stroke-width="1.5" stroke-dasharray="5 3"');
  svg.text(frame.x.at(mean) + 4, region.y0 + 12, `mean ${mean.toFixed(2)} s`,
    'fill="#d62728" font-size="11"');
  return svg.render();
}

// ---------------------------------------------------------------------------
// ttc band: per-step mean with +/- 1 std band and the 3-s reference
// ---------------------------------------------------------------------------

function renderTtcBand(table: Table, width: number, height: number): string {
  const svg = new Svg(width, height);
  const times = numericColumn(table, "time_s");
  const ttcs = numericColumn(table, "ttc_s");
  const byTime = new Map<number, number[]>();
  for (let r = 0; r < times.length; r++) {
    if (!Number.isFinite(ttcs[r])) continue;
    if (!byTime.has(times[r])) byTime.set(times[r], []);
    byTime.get(times[r])!.push(ttcs[r]);
  }
  if (byTime.size === 0) {
    throw new SchemaError("ttc series contains no finite ttc_s values");
  }
  const CLIP = 12.0; // display ceiling; raw TTC grows unbounded
  const series = [...byTime.entries()]
    .sort((a, b) => a[0] - b[0])
    .map(([t, vals]) => {
      const mean = vals.reduce((a, b) => a + b, 0) / vals.length;
      const std = vals.length > 1
        ? Math.sqrt(vals.reduce((a, b) => a + (b - mean) ** 2, 0) / (vals.length - 1))
        : 0;
      const clamp = (v: number) => Math.max(-2, Math.min(CLIP, v));
      return { t, mean: clamp(mean), lo: clamp(mean - std), hi: clamp(mean + std) };
    });

  const region = {
    x0: DEFAULT_MARGIN.left,
    y0: DEFAULT_MARGIN.top,
    x1: width - DEFAULT_MARGIN.right,
    y1: height - DEFAULT_MARGIN.bottom,
  };
  const frame = drawFrame(svg, region,
    extent(series.map((s) => s.t), 0.02), [-2, CLIP], {
      title: "ego-front vehicle TTC over time (mean +/- 1 std)",
      xLabel: "time [s]",
      yLabel: "TTC [s]",
    });

  const upper = series.map((s) => `${fmt(frame.x.at(s.t))},${fmt(frame.y.at(s.hi))}`);
  const lower = [...series].reverse()
    .map((s) => `${fmt(frame.x.at(s.t))},${fmt(frame.y.at(s.lo))}`);
  svg.path(`M${upper.join("L")}L${lower.join("L")}Z`,
    'class="band" fill="#1f77b4" opacity="0.18" stroke="none"');
  svg.polyline(
    series.map((s) => [frame.x.at(s.t), frame.y.at(s.mean)] as [number, number]),
    'class="mean" stroke="#1f77b4" stroke-width="2"',
  );
  const refY = frame.y.at(3.0);
  svg.line(region.x0, refY, region.x1, refY,
    'class="refline" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"');
  svg.text(region.x1 - 4, refY - 6, "3 s safety threshold",
    'text-anchor="end" fill="#d62728" font-size="11"');
  return svg.render();
}

// ---------------------------------------------------------------------------

export const KINDS: Record<FigureKind, KindDef> = {
  "cluster": { schema: CANDIDATES_SCHEMA, describe: "candidates file", render: renderCluster },
  "losses": { schema: CANDIDATES_SCHEMA, describe: "candidates file", render: renderLosses },
  "curves": { schema: CURVES_SCHEMA, describe: "curves file", render: renderCurves },
  "curvature-bars": { schema: CURVATURE_TABLE_SCHEMA, describe: "curvature table", render: renderCurvatureBars },
  "decision-hist": { schema: TRIALS_SCHEMA, describe: "trials file", render: renderDecisionHist },
  "ttc-band": { schema: TTC_SERIES_SCHEMA, describe: "ttc series file", render: renderTtcBand },
  "velocity-bars": { schema: VELOCITY_SCHEMA, describe: "velocity comparison", render: renderVelocityBars },
};

export function renderFigure(
  kind: FigureKind,
  csvText: string,
  width = 820,
  height = 520,
): string {
  const def = KINDS[kind];
  if (!def) {
    throw new SchemaError(`unknown figure kind '${kind}'`);
  }
  const table = parseCsv(csvText);
  requireSchema(table, def.schema);
  requireRows(table, def.describe);
  return def.render(table, width, height);
}
