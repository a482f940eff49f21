import { writeFileSync } from "fs";
import { basename } from "path";

import { column, readTable, requireColumns, type Table } from "./csv.js";
import {
  formatTick,
  linearScale,
  logScale,
  type Scale,
  type ScaleKind,
} from "./scale.js";
import { element, round, segmentedPath, text } from "./svg.js";

export type FigureTag = "fig1" | "fig2" | "fig3";

export interface FigureSpec {
  figure: FigureTag;
  /** CSV inputs; the first is the main table. */
  inputs: string[];
  /** Output image path (SVG). */
  output: string;
  /** Vertical axis scale; defaults to log for fig3, linear otherwise. */
  scale?: ScaleKind;
  /** Right-hand axis column, fig2 only. */
  secondaryColumn?: string;
}

export interface RenderResult {
  svg: string;
  /** Left vertical axis domain actually drawn. */
  yDomain: [number, number];
  rightDomain?: [number, number];
  seriesLabels: string[];
}

interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dash?: string;
  markers?: boolean;
  right?: boolean;
}

const WIDTH = 760;
const HEIGHT = 480;
const PLOT = { left: 86, right: 676, top: 46, bottom: 420 };

const DEFAULT_SCALE: Record<FigureTag, ScaleKind> = {
  fig1: "linear",
  fig2: "linear",
  fig3: "log",
};

/** Render one figure and write the SVG to spec.output. */
export function render(spec: FigureSpec): RenderResult {
  const first = spec.inputs[0];
  if (first === undefined) {
    throw new Error(`no input CSVs for ${spec.figure}`);
  }
  const builder = BUILDERS[spec.figure];
  if (builder === undefined) {
    throw new Error(`unknown figure tag ${spec.figure}`);
  }
  const result = builder(spec);
  writeFileSync(spec.output, result.svg);
  return result;
}

const BUILDERS: Record<FigureTag, (spec: FigureSpec) => RenderResult> = {
  fig1: buildFig1,
  fig2: buildFig2,
  fig3: buildFig3,
};

const FIG1_COLUMNS = ["t_cycles", "occ0_up", "occ0_down", "occ2_up", "occ2_down"];

function buildFig1(spec: FigureSpec): RenderResult {
  const main = readTable(spec.inputs[0]!);
  requireColumns(main, FIG1_COLUMNS);
  const t = column(main, "t_cycles");
  const series: Series[] = [
    {
      label: "occ0_up + occ0_down",
      x: t,
      y: sumColumns(main, "occ0_up", "occ0_down"),
      color: "#1f4e8c",
    },
    {
      label: "occ2_up + occ2_down",
      x: t,
      y: sumColumns(main, "occ2_up", "occ2_down"),
      color: "#c23128",
    },
  ];
  // further inputs overlay their transfer trace, tagged by file name
  const palette = ["#3a8c4e", "#8c6d1f", "#6d3a8c"];
  spec.inputs.slice(1).forEach((path, i) => {
    const extra = readTable(path);
    requireColumns(extra, FIG1_COLUMNS);
    series.push({
      label: `${stem(path)}: occ2_up + occ2_down`,
      x: column(extra, "t_cycles"),
      y: sumColumns(extra, "occ2_up", "occ2_down"),
      color: palette[i % palette.length]!,
      dash: "6 3",
    });
  });
  return draw(spec, series, {
    xLabel: "interaction time (cycles)",
    yLabel: "occupation probability",
  });
}

const FIG2_COLUMNS = [
  "p3_over_mc",
  "prob_numeric",
  "prob_perturbative",
  "prob_lowp3",
];

function buildFig2(spec: FigureSpec): RenderResult {
  const table = readTable(spec.inputs[0]!);
  const secondary = spec.secondaryColumn ?? "p1sq_classical";
  requireColumns(table, [...FIG2_COLUMNS, secondary]);
  const x = column(table, "p3_over_mc");
  const series: Series[] = [
    {
      label: "prob_perturbative",
      x,
      y: column(table, "prob_perturbative"),
      color: "#222222",
    },
    {
      label: "prob_lowp3",
      x,
      y: column(table, "prob_lowp3"),
      color: "#1f4e8c",
      dash: "6 3",
    },
    {
      label: "prob_numeric",
      x,
      y: column(table, "prob_numeric"),
      color: "#c23128",
      markers: true,
    },
    {
      label: `${secondary} (right axis)`,
      x,
      y: column(table, secondary),
      color: "#2e7d32",
      dash: "2 4",
      right: true,
    },
  ];
  return draw(spec, series, {
    xLabel: "p3 / mc",
    yLabel: "diffraction probability",
    rightLabel: secondary,
  });
}

const FIG3_COLUMNS = [
  "p3_over_mc",
  "prob_total",
  "prob_pos_up",
  "prob_pos_down",
  "prob_neg_up",
  "prob_neg_down",
];

function buildFig3(spec: FigureSpec): RenderResult {
  const table = readTable(spec.inputs[0]!);
  requireColumns(table, FIG3_COLUMNS);
  const x = column(table, "p3_over_mc");
  const palette: Record<string, { color: string; dash?: string }> = {
    prob_total: { color: "#222222" },
    prob_pos_up: { color: "#c23128" },
    prob_pos_down: { color: "#c23128", dash: "6 3" },
    prob_neg_up: { color: "#1f4e8c" },
    prob_neg_down: { color: "#1f4e8c", dash: "6 3" },
  };
  const series: Series[] = FIG3_COLUMNS.slice(1).map((name) => ({
    label: name,
    x,
    y: column(table, name),
    ...palette[name]!,
  }));
  return draw(spec, series, {
    xLabel: "p3 / mc",
    yLabel: "channel probability",
  });
}

function sumColumns(table: Table, a: string, b: string): number[] {
  const left = column(table, a);
  const right = column(table, b);
  return left.map((value, i) => value + right[i]!);
}

function stem(path: string): string {
  return basename(path).replace(/\.[^.]*$/, "");
}

interface AxisLabels {
  xLabel: string;
  yLabel: string;
  rightLabel?: string;
}

function draw(
  spec: FigureSpec,
  series: Series[],
  labels: AxisLabels,
): RenderResult {
  const kind = spec.scale ?? DEFAULT_SCALE[spec.figure];
  const leftSeries = series.filter((s) => !s.right);
  const rightSeries = series.filter((s) => s.right);

  const xScale = linearScale(
    extent(series.flatMap((s) => s.x)),
    [PLOT.left, PLOT.right],
  );
  const yScale = makeYScale(kind, leftSeries);
  const rightScale =
    rightSeries.length > 0 ? makeYScale("linear", rightSeries) : undefined;

  const parts: string[] = [];
  parts.push(
    element("rect", {
      x: 0,
      y: 0,
      width: WIDTH,
      height: HEIGHT,
      fill: "#ffffff",
    }),
  );
  parts.push(...axes(xScale, yScale, rightScale, labels));
  for (const s of series) {
    parts.push(...drawSeries(s, xScale, s.right ? rightScale! : yScale));
  }
  parts.push(...legend(series));

  const svg = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
    ...parts,
    "</svg>",
  ].join("\n");
  return {
    svg,
    yDomain: yScale.domain,
    rightDomain: rightScale?.domain,
    seriesLabels: series.map((s) => s.label),
  };
}

function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const value of values) {
    if (!Number.isFinite(value)) continue;
    if (value < lo) lo = value;
    if (value > hi) hi = value;
  }
  if (lo > hi) {
    throw new Error("no finite values to plot");
  }
  return [lo, hi];
}

function makeYScale(kind: ScaleKind, series: Series[]): Scale {
  const values = series.flatMap((s) => s.y);
  if (kind === "log") {
    const positive = values.filter((v) => Number.isFinite(v) && v > 0);
    if (positive.length === 0) {
      throw new Error("log scale needs positive values");
    }
    // expand to whole decades so the axis always covers the data spread
    const lo = 10 ** Math.floor(Math.log10(Math.min(...positive)));
    const hi = 10 ** Math.ceil(Math.log10(Math.max(...positive)));
    return logScale([lo, hi], [PLOT.bottom, PLOT.top]);
  }
  const [lo, hi] = extent(values);
  const pad = (hi - lo || Math.abs(hi) || 1) * 0.05;
  return linearScale(
    [Math.min(0, lo), hi + pad],
    [PLOT.bottom, PLOT.top],
  );
}

function axes(
  xScale: Scale,
  yScale: Scale,
  rightScale: Scale | undefined,
  labels: AxisLabels,
): string[] {
  const parts: string[] = [];
  const axisColor = "#444444";
  const gridColor = "#dddddd";

  for (const tick of xScale.ticks()) {
    const px = round(xScale.map(tick));
    parts.push(
      element("line", {
        x1: px,
        y1: PLOT.top,
        x2: px,
        y2: PLOT.bottom,
        stroke: gridColor,
      }),
    );
    parts.push(
      text(formatTick(tick, "linear"), {
        x: px,
        y: PLOT.bottom + 18,
        "text-anchor": "middle",
        "font-size": 12,
        fill: axisColor,
      }),
    );
  }
  for (const tick of yScale.ticks()) {
    const py = round(yScale.map(tick));
    parts.push(
      element("line", {
        x1: PLOT.left,
        y1: py,
        x2: PLOT.right,
        y2: py,
        stroke: gridColor,
      }),
    );
    parts.push(
      text(formatTick(tick, yScale.kind), {
        x: PLOT.left - 8,
        y: py + 4,
        "text-anchor": "end",
        "font-size": 12,
        fill: axisColor,
      }),
    );
  }
  if (rightScale) {
    for (const tick of rightScale.ticks()) {
      const py = round(rightScale.map(tick));
      parts.push(
        text(formatTick(tick, rightScale.kind), {
          x: PLOT.right + 8,
          y: py + 4,
          "text-anchor": "start",
          "font-size": 12,
          fill: "#2e7d32",
        }),
      );
    }
  }

  parts.push(
    element("rect", {
      x: PLOT.left,
      y: PLOT.top,
      width: PLOT.right - PLOT.left,
      height: PLOT.bottom - PLOT.top,
      fill: "none",
      stroke: axisColor,
    }),
  );
  parts.push(
    text(labels.xLabel, {
      x: (PLOT.left + PLOT.right) / 2,
      y: HEIGHT - 16,
      "text-anchor": "middle",
      "font-size": 14,
      fill: axisColor,
    }),
  );
  parts.push(
    text(labels.yLabel, {
      x: 20,
      y: (PLOT.top + PLOT.bottom) / 2,
      "text-anchor": "middle",
      "font-size": 14,
      fill: axisColor,
      transform: `rotate(-90 20 ${(PLOT.top + PLOT.bottom) / 2})`,
    }),
  );
  if (rightScale && labels.rightLabel) {
    const x = WIDTH - 18;
    parts.push(
      text(labels.rightLabel, {
        x,
        y: (PLOT.top + PLOT.bottom) / 2,
        "text-anchor": "middle",
        "font-size": 14,
        fill: "#2e7d32",
        transform: `rotate(90 ${x} ${(PLOT.top + PLOT.bottom) / 2})`,
      }),
    );
  }
  return parts;
}

function drawSeries(s: Series, xScale: Scale, yScale: Scale): string[] {
  const plottable = (value: number) =>
    Number.isFinite(value) && (yScale.kind !== "log" || value > 0);
  const points = s.x.map((x, i) => {
    const y = s.y[i]!;
    return plottable(y)
      ? ([xScale.map(x), yScale.map(y)] as [number, number])
      : null;
  });
  const parts: string[] = [];
  const path = segmentedPath(points);
  if (path !== "") {
    parts.push(
      element("path", {
        d: path,
        fill: "none",
        stroke: s.color,
        "stroke-width": 1.6,
        ...(s.dash ? { "stroke-dasharray": s.dash } : {}),
      }),
    );
  }
  if (s.markers) {
    for (const point of points) {
      if (point === null) continue;
      parts.push(
        element("rect", {
          x: round(point[0] - 3),
          y: round(point[1] - 3),
          width: 6,
          height: 6,
          fill: "none",
          stroke: s.color,
          "stroke-width": 1.4,
        }),
      );
    }
  }
  return parts;
}

function legend(series: Series[]): string[] {
  const parts: string[] = [];
  const x0 = PLOT.left + 14;
  let y = PLOT.top + 18;
  for (const s of series) {
    parts.push(
      element("line", {
        x1: x0,
        y1: y - 4,
        x2: x0 + 26,
        y2: y - 4,
        stroke: s.color,
        "stroke-width": 2,
        ...(s.dash ? { "stroke-dasharray": s.dash } : {}),
      }),
    );
    parts.push(
      text(s.label, {
        x: x0 + 34,
        y,
        "font-size": 12,
        fill: "#333333",
      }),
    );
    y += 18;
  }
  return parts;
}
