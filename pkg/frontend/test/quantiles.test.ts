import { describe, expect, it } from "vitest";

import { median, quantile } from "../src/quantiles.js";

describe("quantile convention", () => {
  it("matches the workbench convention on the documented example", () => {
    const values = [100, 200, 400];
    expect(quantile(values, 0.5)).toBe(200);
    expect(quantile(values, 0.25)).toBe(150);
    expect(quantile(values, 0.75)).toBe(300);
  });

  it("interpolates between order statistics", () => {
    expect(quantile([1, 2, 3, 4], 0.25)).toBeCloseTo(1.75, 12);
    expect(quantile([5], 0.9)).toBe(5);
  });

  it("does not sort its input in place", () => {
    const values = [3, 1, 2];
    median(values);
    expect(values).toEqual([3, 1, 2]);
  });

  it("keeps infinities instead of producing NaN", () => {
    expect(quantile([1, 2, Infinity], 0.5)).toBe(2);
    expect(quantile([Infinity, Infinity], 0.5)).toBe(Infinity);
    expect(quantile([1, Infinity], 0.75)).toBe(Infinity);
  });

  it("rejects empty input and bad q", () => {
    expect(() => quantile([], 0.5)).toThrow();
    expect(() => quantile([1], 1.5)).toThrow();
  });
});
