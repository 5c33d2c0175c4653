/** Figure data: per-solver median gap-versus-time curves and the summary
 * cross-check.  All medians use the shared quantile convention so they can be
 * recomputed bit-for-bit from the same files. */

import { SchemaError } from "./schema.js";
import { SummaryStats, TrajectoryRun } from "./csv.js";
import { median } from "./quantiles.js";

export interface MedianCurve {
  label: string;
  times: number[];
  gaps: number[];
  runCount: number;
}

/** Step-function value of a run at each grid time: the gap of the last row
 * whose wall-clock does not exceed it (runs start at time 0, and a finished
 * run holds its final value). */
export function sampleAt(run: TrajectoryRun, grid: number[]): number[] {
  const out = new Array<number>(grid.length);
  let idx = 0;
  for (let g = 0; g < grid.length; g++) {
    while (idx + 1 < run.times.length && run.times[idx + 1] <= grid[g]) {
      idx++;
    }
    out[g] = run.gaps[idx];
  }
  return out;
}

/** Median over runs of the carried-forward gap, on the union of all recorded
 * wall-clock instants of this solver. */
export function medianGapCurve(label: string, runs: TrajectoryRun[]): MedianCurve {
  if (runs.length === 0) {
    throw new Error(`no runs for solver ${label}`);
  }
  const grid = [...new Set(runs.flatMap((run) => run.times))].sort((a, b) => a - b);
  const sampled = runs.map((run) => sampleAt(run, grid));
  const gaps = grid.map((_, g) => median(sampled.map((values) => values[g])));
  return { label, times: grid, gaps, runCount: runs.length };
}

export function trajectoryFigureData(runsByLabel: Map<string, TrajectoryRun[]>): MedianCurve[] {
  return [...runsByLabel.entries()]
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([label, runs]) => medianGapCurve(label, runs));
}

/** Simulated seconds until a run first comes within `accuracy` of the
 * optimum; Infinity when it never does. */
export function timeToAccuracy(run: TrajectoryRun, accuracy: number): number {
  for (let i = 0; i < run.gaps.length; i++) {
    if (run.gaps[i] <= accuracy) {
      return run.times[i];
    }
  }
  return Infinity;
}

/** Recompute each solver's median wall-clock-to-accuracy from the trajectory
 * files and compare with summary.json (tolerance 1e-9).  Returns the
 * recomputed medians; throws a SchemaError naming the first mismatching
 * solver. */
export function crossCheckSummary(
  runsByLabel: Map<string, TrajectoryRun[]>,
  summary: SummaryStats,
  accuracy: number,
  summaryFile: string,
): Map<string, number> {
  const recomputed = new Map<string, number>();
  for (const [label, runs] of runsByLabel) {
    const times = runs.map((run) => timeToAccuracy(run, accuracy));
    recomputed.set(label, median(times));
  }
  for (const [label, value] of recomputed) {
    const reported = summary[label]?.wallClockMedian;
    if (reported === undefined) {
      throw new SchemaError(summaryFile, `solver "${label}" has trajectories but no summary entry`);
    }
    const agree =
      (value === Infinity && reported === Infinity) || Math.abs(value - reported) <= 1e-9;
    if (!agree) {
      throw new SchemaError(
        summaryFile,
        `solver "${label}": median wall-clock ${reported} disagrees with ${value} recomputed from trajectories`,
      );
    }
  }
  return recomputed;
}
