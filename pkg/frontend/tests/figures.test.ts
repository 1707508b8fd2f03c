import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { SchemaError, parseCsv } from "../src/csv.js";
import { FigureKind, KINDS, renderFigure } from "../src/figures.js";
import { main, parseArgs } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");

const FIXTURE_FOR: Record<FigureKind, string> = {
  "cluster": "candidates.csv",
  "losses": "candidates.csv",
  "curves": "curves.csv",
  "curvature-bars": "curvature_table.csv",
  "decision-hist": "trials.csv",
  "ttc-band": "ttc_series.csv",
  "velocity-bars": "velocity_comparison.csv",
};

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

describe("all seven figure kinds render from real sweep outputs", () => {
  for (const kind of Object.keys(KINDS) as FigureKind[]) {
    it(`renders ${kind}`, () => {
      const svg = renderFigure(kind, fixture(FIXTURE_FOR[kind]));
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    });
  }
});

describe("cluster figure", () => {
  it("contains exactly M*N candidate polylines plus one emphasized selection", () => {
    const text = fixture("candidates.csv");
    const table = parseCsv(text);
    const mIdx = table.columns.indexOf("m");
    const nIdx = table.columns.indexOf("n");
    const clusterSize = new Set(table.rows.map((r) => `${r[mIdx]},${r[nIdx]}`)).size;

    const svg = renderFigure("cluster", text);
    const candidates = svg.match(/class="candidate"/g) ?? [];
    const selected = svg.match(/class="selected"/g) ?? [];
    expect(candidates.length).toBe(clusterSize);
    expect(selected.length).toBe(1);
  });

  it("draws the 3-s reference only in the ttc band figure", () => {
    const svg = renderFigure("ttc-band", fixture("ttc_series.csv"));
    expect(svg).toContain('class="refline"');
    expect(svg).toContain("3 s safety threshold");
  });
});

describe("figure content", () => {
  it("losses figure has all four loss panels", () => {
    const svg = renderFigure("losses", fixture("candidates.csv"));
    for (const f of ["u_yx", "u_xt", "u_risk", "u_total"]) {
      expect(svg).toContain(`class="loss-${f}"`);
    }
  });

  it("curves figure draws every method twice (trajectory + curvature)", () => {
    const svg = renderFigure("curves", fixture("curves.csv"));
    for (const m of ["quintic", "bezier", "bspline"]) {
      expect(svg).toContain(`class="traj-${m}"`);
      expect(svg).toContain(`class="curv-${m}"`);
    }
  });

  it("bar charts carry one bar per method", () => {
    const svg = renderFigure("velocity-bars", fixture("velocity_comparison.csv"));
    expect((svg.match(/class="bar"/g) ?? []).length).toBe(2);
    expect((svg.match(/class="whisker"/g) ?? []).length).toBe(2);
    const curv = renderFigure("curvature-bars", fixture("curvature_table.csv"));
    expect((curv.match(/class="bar"/g) ?? []).length).toBe(3);
  });

  it("decision histogram has bars and a mean marker", () => {
    const svg = renderFigure("decision-hist", fixture("trials.csv"));
    expect((svg.match(/class="bar"/g) ?? []).length).toBeGreaterThan(0);
    expect(svg).toContain('class="mean"');
  });
});

describe("determinism", () => {
  it("re-rendering the same spec yields identical bytes", () => {
    for (const kind of Object.keys(KINDS) as FigureKind[]) {
      const text = fixture(FIXTURE_FOR[kind]);
      expect(renderFigure(kind, text)).toBe(renderFigure(kind, text));
    }
  });
});

describe("validation", () => {
  it("schema mismatch names the first offending column", () => {
    const broken = fixture("trials.csv").replace("decision_time_s", "dt_s");
    try {
      renderFigure("decision-hist", broken);
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(SchemaError);
      expect((err as SchemaError).message).toContain("decision_time_s");
    }
  });

  it("header-only input errors out before producing anything", () => {
    const headerOnly = fixture("trials.csv").split("\n")[0] + "\n";
    expect(() => renderFigure("decision-hist", headerOnly)).toThrow(/no data rows/);
  });

  it("unknown kind is rejected", () => {
    expect(() => renderFigure("waterfall" as FigureKind, "a\n1\n")).toThrow(SchemaError);
  });
});

describe("cli", () => {
  it("parses plot arguments", () => {
    const spec = parseArgs([
      "plot", "--kind", "cluster", "--in", "c.csv", "--out", "o.svg",
      "--width", "1000",
    ]);
    expect(spec.kind).toBe("cluster");
    expect(spec.inputs).toEqual(["c.csv"]);
    expect(spec.output).toBe("o.svg");
    expect(spec.width).toBe(1000);
  });

  it("rejects missing or unknown flags", () => {
    expect(() => parseArgs(["plot", "--kind", "cluster"])).toThrow(SchemaError);
    expect(() => parseArgs(["plot", "--kind", "nope", "--in", "a", "--out", "b"]))
      .toThrow(/--kind must be one of/);
    expect(() => parseArgs(["render"])).toThrow(/unknown command/);
  });

  it("writes an svg for a valid spec and nothing for an empty input", () => {
    const dir = mkdtempSync(join(tmpdir(), "rmplot-"));
    const ok = join(dir, "fig.svg");
    const code = main([
      "plot", "--kind", "decision-hist",
      "--in", join(FIXTURES, "trials.csv"), "--out", ok,
    ]);
    expect(code).toBe(0);
    expect(readFileSync(ok, "utf8")).toContain("</svg>");

    const emptyCsv = join(dir, "empty.csv");
    const partial = join(dir, "partial.svg");
    const headerOnly = fixture("trials.csv").split("\n")[0] + "\n";
    writeFileSync(emptyCsv, headerOnly);
    const bad = main([
      "plot", "--kind", "decision-hist", "--in", emptyCsv, "--out", partial,
    ]);
    expect(bad).toBe(1);
    expect(existsSync(partial)).toBe(false);
  });

  it("missing input file exits 1", () => {
    const dir = mkdtempSync(join(tmpdir(), "rmplot-"));
    const code = main([
      "plot", "--kind", "cluster", "--in", join(dir, "nope.csv"),
      "--out", join(dir, "x.svg"),
    ]);
    expect(code).toBe(1);
  });
});
