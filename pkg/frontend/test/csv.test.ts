import * as fs from "node:fs";
import * as path from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { loadRuns, parseSummary, parseSweepCsv, parseTrajectoryCsv } from "../src/csv.js";
import { SchemaError, TRAJECTORY_COLUMNS } from "../src/schema.js";

const GOLDEN = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures", "golden");

const read = (name: string) => fs.readFileSync(path.join(GOLDEN, name), "utf-8");

describe("trajectory CSV parsing", () => {
  it("reads a golden file", () => {
    const run = parseTrajectoryCsv("shoals__seed0.csv", read("shoals__seed0.csv"), "shoals", 0);
    expect(run.label).toBe("shoals");
    expect(run.times[0]).toBe(0);
    expect(run.gaps.length).toBe(run.times.length);
    for (let i = 1; i < run.times.length; i++) {
      expect(run.times[i]).toBeGreaterThanOrEqual(run.times[i - 1]);
    }
  });

  it("rejects an empty file, naming it", () => {
    expect(() => parseTrajectoryCsv("empty.csv", "", "x", 0)).toThrowError(
      /empty\.csv: empty file/,
    );
  });

  it("rejects a wrong column, naming the column", () => {
    const header = TRAJECTORY_COLUMNS.join(",").replace("gap_to_fstar", "gap");
    expect(() => parseTrajectoryCsv("bad.csv", `${header}\n`, "x", 0)).toThrowError(
      /bad\.csv: column 3 .* "gap_to_fstar"/,
    );
  });

  it("rejects a bad numeric value with row and column", () => {
    const lines = read("shoals__seed0.csv").split("\n");
    const fields = lines[1].split(",");
    fields[13] = "not-a-number";
    lines[1] = fields.join(",");
    expect(() => parseTrajectoryCsv("bad.csv", lines.join("\n"), "x", 0)).toThrowError(
      /row 1: bad value .* "wall_clock_s"/,
    );
  });

  it("rejects decreasing wall-clock", () => {
    const base = read("shoals__seed0.csv").split("\n").filter((l) => l);
    const swapped = [base[0], base[2], base[1], ...base.slice(3)].join("\n");
    expect(() => parseTrajectoryCsv("bad.csv", swapped, "x", 0)).toThrowError(/decreases/);
  });
});

describe("campaign directory loading", () => {
  it("groups runs by solver label", () => {
    const runs = loadRuns(GOLDEN);
    expect([...runs.keys()].sort()).toEqual(["adam-100", "shoals"]);
    expect(runs.get("shoals")).toHaveLength(5);
    expect(runs.get("adam-100")).toHaveLength(5);
  });

  it("fails on a directory without trajectories", () => {
    expect(() => loadRuns(path.dirname(GOLDEN))).toThrow(SchemaError);
  });
});

describe("sweep CSV parsing", () => {
  it("reads the golden sweep", () => {
    const table = parseSweepCsv("sweep.csv", read("sweep.csv"));
    expect(table.rows).toHaveLength(5);
    expect(table.rows[0].ratio).toBe(1e-6);
    expect(table.crossing).toBeCloseTo(0.002125234211250061, 12);
    for (const row of table.rows) {
      expect(row.q25).toBeLessThanOrEqual(row.q50);
      expect(row.q50).toBeLessThanOrEqual(row.q75);
    }
  });

  it("rejects a missing column", () => {
    expect(() => parseSweepCsv("s.csv", "ratio,q25,q50,q75\n1,1,1,1\n")).toThrowError(
      /s\.csv: .*"crossing"|s\.csv: expected 5 columns/,
    );
  });

  it("rejects an empty sweep", () => {
    expect(() => parseSweepCsv("s.csv", "ratio,q25,q50,q75,crossing\n")).toThrowError(
      /no data rows/,
    );
  });
});

describe("summary JSON parsing", () => {
  it("reads the golden summary", () => {
    const summary = parseSummary("summary.json", read("summary.json"));
    expect(Object.keys(summary).sort()).toEqual(["adam-100", "shoals"]);
    expect(summary["shoals"].wallClockMedian).toBeGreaterThan(0);
  });

  it("maps the inf marker to Infinity", () => {
    const text = JSON.stringify({
      solvers: { slow: { wall_clock_s: { q50: "inf" } } },
    });
    expect(parseSummary("s.json", text)["slow"].wallClockMedian).toBe(Infinity);
  });

  it("rejects JSON without solvers", () => {
    expect(() => parseSummary("s.json", "{}")).toThrowError(/"solvers"/);
    expect(() => parseSummary("s.json", "not json")).toThrowError(/not valid JSON/);
  });
});
