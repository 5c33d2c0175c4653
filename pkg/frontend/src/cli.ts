#!/usr/bin/env node
/** Figure CLI:
 *
 *   shoalsbench-plot trajectories --in <campaign dir> --out fig.svg [--accuracy 0.0016]
 *   shoalsbench-plot ratio --in sweep.csv --out fig.svg
 *
 * Exit codes: 0 success, 1 schema/usage error, 2 unexpected failure.
 * Inputs are only ever read; when the campaign directory contains a
 * summary.json, the medians it reports are cross-checked against the
 * trajectory files before anything is rendered.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { loadRuns, parseSummary, parseSweepCsv } from "./csv.js";
import { crossCheckSummary, trajectoryFigureData } from "./figures.js";
import { renderRatioSvg, renderTrajectoriesSvg } from "./render.js";
import { SchemaError } from "./schema.js";

const USAGE = `usage:
  shoalsbench-plot trajectories --in <campaign dir> --out <fig.svg> [--accuracy 0.0016]
  shoalsbench-plot ratio --in <sweep.csv> --out <fig.svg>`;

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new UsageError(`bad argument ${key}`);
    }
    flags.set(key.slice(2), value);
  }
  return flags;
}

class UsageError extends Error {}

function requireFlag(flags: Map<string, string>, name: string): string {
  const value = flags.get(name);
  if (value === undefined) {
    throw new UsageError(`missing --${name}\n${USAGE}`);
  }
  return value;
}

function plotTrajectories(flags: Map<string, string>): void {
  const dir = requireFlag(flags, "in");
  const out = requireFlag(flags, "out");
  const accuracy = Number(flags.get("accuracy") ?? "0.0016");
  if (!(accuracy > 0)) {
    throw new UsageError("--accuracy must be positive");
  }
  const runs = loadRuns(dir);
  const summaryPath = path.join(dir, "summary.json");
  if (fs.existsSync(summaryPath)) {
    const summary = parseSummary(summaryPath, fs.readFileSync(summaryPath, "utf-8"));
    crossCheckSummary(runs, summary, accuracy, summaryPath);
  }
  const svg = renderTrajectoriesSvg(trajectoryFigureData(runs), accuracy);
  fs.writeFileSync(out, svg, "utf-8");
  console.log(`wrote ${out}`);
}

function plotRatio(flags: Map<string, string>): void {
  const file = requireFlag(flags, "in");
  const out = requireFlag(flags, "out");
  let text: string;
  try {
    text = fs.readFileSync(file, "utf-8");
  } catch {
    throw new SchemaError(file, "not a readable file");
  }
  const svg = renderRatioSvg(parseSweepCsv(file, text));
  fs.writeFileSync(out, svg, "utf-8");
  console.log(`wrote ${out}`);
}

export function main(argv: string[]): number {
  try {
    const [command, ...rest] = argv;
    if (command === "trajectories") {
      plotTrajectories(parseFlags(rest));
    } else if (command === "ratio") {
      plotRatio(parseFlags(rest));
    } else {
      throw new UsageError(USAGE);
    }
    return 0;
  } catch (error) {
    if (error instanceof SchemaError || error instanceof UsageError) {
      console.error(`error: ${error.message}`);
      return 1;
    }
    console.error(`failure: ${error instanceof Error ? error.stack : String(error)}`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === new URL(`file://${path.resolve(process.argv[1])}`).href;

if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
