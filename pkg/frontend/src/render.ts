/** Deterministic SVG rendering via echarts in server-side mode.
 *
 * Both figure kinds live on log-log axes.  The ratio figure draws its
 * 25th-75th percentile band with a stacked area, which is only positionally
 * correct on a linear axis, so values are plotted as log10 and the axis
 * labels show the original magnitudes.
 */

import * as echarts from "echarts";

import { SweepTable } from "./csv.js";
import { MedianCurve } from "./figures.js";

export interface RenderOptions {
  width?: number;
  height?: number;
  title?: string;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

function renderToSvg(option: echarts.EChartsOption, opts: RenderOptions): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: opts.width ?? 760,
    height: opts.height ?? 520,
  });
  try {
    chart.setOption({ animation: false, ...option });
    return normalizeSvgClasses(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/** The renderer embeds a process-global instance counter in its CSS class
 * names and clip-path ids; renumber every such token by first appearance so
 * identical figures are byte-identical across renders. */
export function normalizeSvgClasses(svg: string): string {
  const seen = new Map<string, string>();
  return svg.replace(/zr\d+-[\w-]+/g, (token) => {
    let stable = seen.get(token);
    if (stable === undefined) {
      stable = `zr-t${seen.size}`;
      seen.set(token, stable);
    }
    return stable;
  });
}

/** Nonpositive values cannot sit on a log axis; drop them from display only. */
function logSafe(points: Array<[number, number]>): Array<[number, number] | [number, null]> {
  return points.map(([x, y]) => (x > 0 && y > 0 ? [x, y] : [x, null]));
}

export function renderTrajectoriesSvg(
  curves: MedianCurve[],
  accuracyLine: number,
  opts: RenderOptions = {},
): string {
  const series: echarts.SeriesOption[] = curves.map((curve, i) => ({
    name: `${curve.label} (median of ${curve.runCount})`,
    type: "line",
    step: "end",
    symbol: "none",
    lineStyle: { width: 2, color: PALETTE[i % PALETTE.length] },
    itemStyle: { color: PALETTE[i % PALETTE.length] },
    data: logSafe(curve.times.map((t, k) => [t, curve.gaps[k]])),
  }));
  // reference lines are ordinary series: markLine does not survive
  // server-side rendering
  const positiveTimes = curves.flatMap((c) => c.times.filter((t) => t > 0));
  if (positiveTimes.length > 0) {
    series.push({
      name: `accuracy ${accuracyLine}`,
      type: "line",
      symbol: "none",
      lineStyle: { width: 1, color: "#444" },
      itemStyle: { color: "#444" },
      data: [
        [Math.min(...positiveTimes), accuracyLine],
        [Math.max(...positiveTimes), accuracyLine],
      ],
    });
  }
  return renderToSvg(
    {
      title: { text: opts.title ?? "Median distance to the known optimum", left: "center" },
      legend: { bottom: 0 },
      grid: { left: 70, right: 30, top: 50, bottom: 70 },
      xAxis: {
        type: "log",
        name: "simulated wall-clock (s)",
        nameLocation: "middle",
        nameGap: 30,
      },
      yAxis: { type: "log", name: "gap to optimum" },
      series,
    },
    opts,
  );
}

const log10 = Math.log10;

function magnitudeLabel(value: number): string {
  return `1e${Math.round(value)}`;
}

export function renderRatioSvg(table: SweepTable, opts: RenderOptions = {}): string {
  const xs = table.rows.map((row) => log10(row.ratio));
  const lower = table.rows.map((row, i) => [xs[i], log10(row.q25)]);
  const bandHeight = table.rows.map((row, i) => [xs[i], log10(row.q75) - log10(row.q25)]);
  const medianLine = table.rows.map((row, i) => [xs[i], log10(row.q50)]);
  const plottedY = table.rows.flatMap((row) => [log10(row.q25), log10(row.q50), log10(row.q75), 0]);
  const yLo = Math.min(...plottedY);
  const yHi = Math.max(...plottedY);
  const series: echarts.SeriesOption[] = [
    {
      name: "q25",
      type: "line",
      stack: "band",
      symbol: "none",
      lineStyle: { opacity: 0 },
      data: lower,
    },
    {
      name: "25-75 band",
      type: "line",
      stack: "band",
      symbol: "none",
      lineStyle: { opacity: 0 },
      areaStyle: { color: "#1f77b4", opacity: 0.2 },
      itemStyle: { color: "#9ec5e4" },
      data: bandHeight,
    },
    {
      name: "median",
      type: "line",
      symbol: "circle",
      lineStyle: { type: "dashed", width: 2, color: "#1f77b4" },
      itemStyle: { color: "#1f77b4" },
      data: medianLine,
    },
    {
      name: "equal time",
      type: "line",
      symbol: "none",
      lineStyle: { width: 1, color: "#444" },
      itemStyle: { color: "#444" },
      data: [
        [Math.min(...xs), 0],
        [Math.max(...xs), 0],
      ],
    },
  ];
  if (table.crossing !== null) {
    const cx = log10(table.crossing);
    series.push({
      name: `median=1 at ${table.crossing.toExponential(2)}`,
      type: "line",
      symbol: "none",
      lineStyle: { width: 1, type: "dotted", color: "#d62728" },
      itemStyle: { color: "#d62728" },
      data: [
        [cx, yLo],
        [cx, yHi],
      ],
    });
  }
  const yMin = Math.floor(yLo);
  const yMax = Math.ceil(yHi);
  return renderToSvg(
    {
      title: { text: opts.title ?? "Wall-clock ratio vs shot/switch cost ratio", left: "center" },
      legend: { bottom: 0, data: series.map((s) => s.name as string).filter((n) => n !== "q25") },
      grid: { left: 70, right: 30, top: 50, bottom: 90 },
      xAxis: {
        type: "value",
        name: "c1 / c2",
        nameLocation: "middle",
        nameGap: 30,
        axisLine: { onZero: false },
        axisLabel: { formatter: magnitudeLabel },
      },
      yAxis: {
        type: "value",
        name: "time ratio",
        min: yMin,
        max: yMax,
        interval: Math.max(1, Math.ceil((yMax - yMin) / 6)),
        axisLine: { onZero: false },
        axisLabel: { formatter: magnitudeLabel },
      },
      series,
    },
    opts,
  );
}
