/** Quantile convention shared with the workbench: linear interpolation
 * between order statistics, with infinities surviving (no inf - inf NaN). */

export function quantile(values: number[], q: number): number {
  if (values.length === 0) {
    throw new Error("quantile of empty list");
  }
  if (q < 0 || q > 1) {
    throw new Error(`q must lie in [0, 1], got ${q}`);
  }
  const ordered = [...values].sort((a, b) => a - b);
  const position = (ordered.length - 1) * q;
  const lo = Math.floor(position);
  const hi = Math.ceil(position);
  if (ordered[lo] === ordered[hi]) {
    return ordered[lo];
  }
  const weight = position - lo;
  return (1 - weight) * ordered[lo] + weight * ordered[hi];
}

export function median(values: number[]): number {
  return quantile(values, 0.5);
}
