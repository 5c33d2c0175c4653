/** Readers for the workbench's trajectory CSVs, sweep CSVs, and summary JSON.
 * Reading is strictly side-effect-free on the inputs. */

import * as fs from "node:fs";
import * as path from "node:path";

import { SchemaError, SWEEP_COLUMNS, TRAJECTORY_COLUMNS } from "./schema.js";

export interface TrajectoryRun {
  label: string;
  seed: number;
  /** Cumulative simulated seconds per row (row 0 is the initial state). */
  times: number[];
  /** |exact_f - f_star| per row. */
  gaps: number[];
}

export interface SweepRow {
  ratio: number;
  q25: number;
  q50: number;
  q75: number;
}

export interface SweepTable {
  rows: SweepRow[];
  /** c1/c2 where the median ratio equals 1; null when the grid never crosses. */
  crossing: number | null;
}

function splitLines(file: string, text: string): string[] {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(file, "empty file");
  }
  return lines;
}

function checkHeader(file: string, header: string, expected: readonly string[]): void {
  const got = header.split(",");
  for (let i = 0; i < expected.length; i++) {
    if (got[i] !== expected[i]) {
      throw new SchemaError(
        file,
        `column ${i + 1} is ${JSON.stringify(got[i] ?? "")}, expected "${expected[i]}"`,
      );
    }
  }
  if (got.length !== expected.length) {
    throw new SchemaError(file, `expected ${expected.length} columns, found ${got.length}`);
  }
}

function parseNumber(file: string, line: number, column: string, raw: string): number {
  const value = raw === "inf" ? Infinity : Number(raw);
  if (raw === "" || Number.isNaN(value)) {
    throw new SchemaError(file, `row ${line}: bad value ${JSON.stringify(raw)} in column "${column}"`);
  }
  return value;
}

export function parseTrajectoryCsv(file: string, text: string, label: string, seed: number): TrajectoryRun {
  const lines = splitLines(file, text);
  checkHeader(file, lines[0], TRAJECTORY_COLUMNS);
  if (lines.length < 2) {
    throw new SchemaError(file, "no data rows");
  }
  const gapIdx = TRAJECTORY_COLUMNS.indexOf("gap_to_fstar");
  const wallIdx = TRAJECTORY_COLUMNS.indexOf("wall_clock_s");
  const times: number[] = [];
  const gaps: number[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== TRAJECTORY_COLUMNS.length) {
      throw new SchemaError(file, `row ${i}: expected ${TRAJECTORY_COLUMNS.length} fields, found ${fields.length}`);
    }
    times.push(parseNumber(file, i, "wall_clock_s", fields[wallIdx]));
    gaps.push(parseNumber(file, i, "gap_to_fstar", fields[gapIdx]));
  }
  for (let i = 1; i < times.length; i++) {
    if (times[i] < times[i - 1]) {
      throw new SchemaError(file, `row ${i}: wall_clock_s decreases`);
    }
  }
  return { label, seed, times, gaps };
}

const RUN_FILE = /^(.+)__seed(\d+)\.csv$/;

/** Load every <label>__seed<k>.csv in a campaign output directory. */
export function loadRuns(dir: string): Map<string, TrajectoryRun[]> {
  let entries: string[];
  try {
    entries = fs.readdirSync(dir);
  } catch {
    throw new SchemaError(dir, "not a readable directory");
  }
  const byLabel = new Map<string, TrajectoryRun[]>();
  for (const name of entries.sort()) {
    const match = RUN_FILE.exec(name);
    if (!match) continue;
    const file = path.join(dir, name);
    const run = parseTrajectoryCsv(file, fs.readFileSync(file, "utf-8"), match[1], Number(match[2]));
    const runs = byLabel.get(run.label) ?? [];
    runs.push(run);
    byLabel.set(run.label, runs);
  }
  if (byLabel.size === 0) {
    throw new SchemaError(dir, "no <label>__seed<k>.csv trajectory files found");
  }
  return byLabel;
}

export function parseSweepCsv(file: string, text: string): SweepTable {
  const lines = splitLines(file, text);
  checkHeader(file, lines[0], SWEEP_COLUMNS);
  if (lines.length < 2) {
    throw new SchemaError(file, "no data rows");
  }
  const rows: SweepRow[] = [];
  let crossing: number | null = null;
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== SWEEP_COLUMNS.length) {
      throw new SchemaError(file, `row ${i}: expected ${SWEEP_COLUMNS.length} fields, found ${fields.length}`);
    }
    rows.push({
      ratio: parseNumber(file, i, "ratio", fields[0]),
      q25: parseNumber(file, i, "q25", fields[1]),
      q50: parseNumber(file, i, "q50", fields[2]),
      q75: parseNumber(file, i, "q75", fields[3]),
    });
    if (fields[4] !== "") {
      crossing = parseNumber(file, i, "crossing", fields[4]);
    }
  }
  return { rows, crossing };
}

export interface SummaryStats {
  [label: string]: { wallClockMedian: number };
}

/** Pull each solver's median wall-clock-to-accuracy out of summary.json. */
export function parseSummary(file: string, text: string): SummaryStats {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    throw new SchemaError(file, "not valid JSON");
  }
  const solvers = (data as { solvers?: Record<string, unknown> }).solvers;
  if (!solvers || typeof solvers !== "object") {
    throw new SchemaError(file, 'missing "solvers" block');
  }
  const out: SummaryStats = {};
  for (const [label, stats] of Object.entries(solvers)) {
    const block = (stats as { wall_clock_s?: { q50?: unknown } }).wall_clock_s;
    const q50 = block?.q50;
    if (q50 === undefined) {
      throw new SchemaError(file, `solver "${label}": missing wall_clock_s.q50`);
    }
    out[label] = { wallClockMedian: q50 === "inf" ? Infinity : Number(q50) };
  }
  return out;
}
