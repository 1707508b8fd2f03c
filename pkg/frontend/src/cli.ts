#!/usr/bin/env node
/**
 * rampmerge-plot: render simulation figures from CSV outputs.
 *
 * Usage:
 *   rampmerge-plot plot --kind <kind> --in <path> --out <image.svg>
 *                       [--width N] [--height N]
 *
 * Kinds: cluster, losses, curves, curvature-bars, decision-hist,
 * ttc-band, velocity-bars.  Validation happens before anything is
 * written, so a failing spec never leaves a partial image behind.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { SchemaError } from "./csv.js";
import { FigureKind, FigureSpec, KINDS, renderFigure } from "./figures.js";

export function parseArgs(argv: string[]): FigureSpec {
  if (argv[0] !== "plot") {
    throw new SchemaError(`unknown command '${argv[0] ?? ""}'; expected 'plot'`);
  }
  let kind: string | undefined;
  const inputs: string[] = [];
  let output: string | undefined;
  let width: number | undefined;
  let height: number | undefined;

  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    switch (arg) {
      case "--kind":
        kind = argv[++i];
        break;
      case "--in":
        while (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
          inputs.push(argv[++i]);
        }
        break;
      case "--out":
        output = argv[++i];
        break;
      case "--width":
        width = Number(argv[++i]);
        break;
      case "--height":
        height = Number(argv[++i]);
        break;
      default:
        throw new SchemaError(`unknown argument '${arg}'`);
    }
  }
  if (!kind || !(kind in KINDS)) {
    throw new SchemaError(
      `--kind must be one of: ${Object.keys(KINDS).join(", ")}`,
    );
  }
  if (inputs.length !== 1) {
    throw new SchemaError(
      `--in expects exactly one input file for kind '${kind}'`,
    );
  }
  if (!output) {
    throw new SchemaError("--out is required");
  }
  return { kind: kind as FigureKind, inputs, output, width, height };
}

export function runSpec(spec: FigureSpec): void {
  const text = readFileSync(spec.inputs[0], "utf8");
  const svg = renderFigure(spec.kind, text, spec.width, spec.height);
  writeFileSync(spec.output, svg);
}

export function main(argv: string[]): number {
  try {
    runSpec(parseArgs(argv));
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    if (err instanceof Error && "code" in err && err.code === "ENOENT") {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
