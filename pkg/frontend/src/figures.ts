import type { EChartsOption, SeriesOption } from "echarts";

import { columnRange, numericColumn, SchemaError, Table } from "./csv";

export interface FigureOptions {
  /** decay_rate * t values at which fig4/fig7 draw PIP slices. */
  slices?: number[];
}

export interface FigureSpec {
  id: string;
  /** CLI command whose CSV this figure consumes. */
  source: string;
  required: string[];
  /** Columns whose min/max define the plotted data ranges (dry-run output). */
  rangeColumns: string[];
  title: string;
  build: (table: Table, options: FigureOptions) => EChartsOption;
}

const PALETTE = ["#c23531", "#e09030", "#2f6fa7", "#222222", "#5ab06a"];
const DEFAULT_SLICES = [0.03, 0.17, 0.35, 6.0];

function baseOption(title: string, subtitle?: string): EChartsOption {
  return {
    animation: false,
    color: PALETTE,
    title: { text: title, subtext: subtitle, left: "center" },
    backgroundColor: "#ffffff",
  };
}

function sortedUnique(values: number[]): number[] {
  return Array.from(new Set(values.filter((v) => !Number.isNaN(v)))).sort(
    (a, b) => a - b
  );
}

function nearest(values: number[], target: number): number {
  let best = values[0];
  for (const v of values) if (Math.abs(v - target) < Math.abs(best - target)) best = v;
  return best;
}

function buildDynamics(table: Table): EChartsOption {
  const gammaT = numericColumn(table, "gamma_t");
  const system = numericColumn(table, "system_excitation");
  const env = numericColumn(table, "environment_excitation");
  const total = numericColumn(table, "total_excitation");
  const meanTotal = total.reduce((a, b) => a + b, 0) / total.length;
  const line = (name: string, ys: number[], dashed: boolean): SeriesOption => ({
    type: "line",
    name,
    showSymbol: false,
    lineStyle: dashed ? { type: "dashed" } : {},
    data: gammaT.map((x, i) => [x, ys[i]]),
  });
  return {
    ...baseOption(
      "Excitation dynamics",
      `total excitation conserved at ${meanTotal.toPrecision(6)}`
    ),
    legend: { top: 56 },
    xAxis: { type: "value", name: "decay_rate * t" },
    yAxis: { type: "value", name: "excitations" },
    series: [
      line("system", system, false),
      line("environment", env, true),
      line("total", total, false),
    ],
  };
}

interface PipSlices {
  labels: string[];
  series: SeriesOption[];
}

function pipSlices(table: Table, targets: number[]): PipSlices {
  const gammaValues = sortedUnique(numericColumn(table, "gamma_t"));
  const picked = sortedUnique(targets.map((t) => nearest(gammaValues, t)));
  const labels: string[] = [];
  const series: SeriesOption[] = [];
  for (const gt of picked) {
    const rows = table.rows
      .filter((row) => Number(row.gamma_t) === gt)
      .sort((a, b) => Number(a.fraction) - Number(b.fraction));
    const last = Number(rows[rows.length - 1].mean_mi);
    const scale = Math.abs(last) > 1e-12 ? last : 1.0;
    const label = `Gt=${gt.toPrecision(3)}`;
    labels.push(label);
    series.push({
      type: "line",
      name: label,
      showSymbol: false,
      data: rows.map((row) => [Number(row.fraction), Number(row.mean_mi) / scale]),
    });
  }
  return { labels, series };
}

function buildPipSlices(table: Table, options: FigureOptions): EChartsOption {
  const { series } = pipSlices(table, options.slices ?? DEFAULT_SLICES);
  return {
    ...baseOption("Normalized partial information plots"),
    legend: { top: 34 },
    xAxis: { type: "value", name: "fraction f", min: 0, max: 1 },
    yAxis: { type: "value", name: "I(f) / I(1)", min: 0, max: 1 },
    series,
  };
}

function heatmapPieces(table: Table) {
  const xs = sortedUnique(numericColumn(table, "gamma_t"));
  const ys = sortedUnique(numericColumn(table, "fraction"));
  const xIndex = new Map(xs.map((v, i) => [v, i]));
  const yIndex = new Map(ys.map((v, i) => [v, i]));
  const cells = table.rows.map((row) => [
    xIndex.get(Number(row.gamma_t)),
    yIndex.get(Number(row.fraction)),
    Number(row.mean_mi),
  ]);
  const [lo, hi] = columnRange(table, "mean_mi");
  return { xs, ys, cells, lo, hi };
}

function buildPipHeatmap(table: Table): EChartsOption {
  const { xs, ys, cells, lo, hi } = heatmapPieces(table);
  return {
    ...baseOption("Averaged mutual information over time and fraction"),
    grid: { top: 60, right: 90 },
    xAxis: {
      type: "category",
      name: "decay_rate * t",
      data: xs.map((v) => v.toPrecision(4)),
    },
    yAxis: {
      type: "category",
      name: "fraction f",
      data: ys.map((v) => v.toPrecision(4)),
    },
    visualMap: {
      min: lo,
      max: hi,
      calculable: false,
      orient: "vertical",
      right: 10,
      top: "center",
      inRange: { color: ["#2f6fa7", "#e8e8e8", "#c23531"] },
    },
    series: [{ type: "heatmap", data: cells, progressive: 0 }],
  };
}

function panelOption(
  title: string,
  panels: { column: string; label: string; table: Table }[]
): EChartsOption {
  const count = panels.length;
  const option: EChartsOption = {
    ...baseOption(title),
    grid: [],
    xAxis: [],
    yAxis: [],
    series: [],
  };
  const top0 = 8;
  const height = (92 - top0) / count;
  panels.forEach((panel, index) => {
    const gammaT = numericColumn(panel.table, "gamma_t");
    const values = numericColumn(panel.table, panel.column);
    (option.grid as object[]).push({
      left: 70,
      right: 30,
      top: `${top0 + index * height + 4}%`,
      height: `${height - 7}%`,
    });
    (option.xAxis as object[]).push({
      type: "value",
      gridIndex: index,
      name: index === count - 1 ? "decay_rate * t" : "",
    });
    (option.yAxis as object[]).push({
      type: "value",
      gridIndex: index,
      name: panel.label,
    });
    (option.series as SeriesOption[]).push({
      type: "line",
      name: panel.label,
      xAxisIndex: index,
      yAxisIndex: index,
      showSymbol: false,
      connectNulls: false,
      data: gammaT.map((x, i) => [x, Number.isNaN(values[i]) ? null : values[i]]),
    });
  });
  return option;
}

function buildRedundancy(table: Table): EChartsOption {
  return panelOption("Redundancy metrics", [
    { column: "r_delta", label: "R_delta", table },
    { column: "f_delta", label: "f_delta", table },
    { column: "mi_full", label: "I(S:E)", table },
    { column: "r_rel", label: "R_r", table },
  ]);
}

function buildPipCombined(table: Table, options: FigureOptions): EChartsOption {
  const { series } = pipSlices(table, options.slices ?? DEFAULT_SLICES);
  const heat = heatmapPieces(table);
  return {
    ...baseOption("Partial information: slices and map"),
    legend: { top: 30 },
    grid: [
      { left: 70, right: 90, top: "12%", height: "32%" },
      { left: 70, right: 90, top: "58%", height: "34%" },
    ],
    xAxis: [
      { type: "value", gridIndex: 0, name: "fraction f", min: 0, max: 1 },
      {
        type: "category",
        gridIndex: 1,
        name: "decay_rate * t",
        data: heat.xs.map((v) => v.toPrecision(4)),
      },
    ],
    yAxis: [
      { type: "value", gridIndex: 0, name: "I(f) / I(1)", min: 0, max: 1 },
      {
        type: "category",
        gridIndex: 1,
        name: "fraction f",
        data: heat.ys.map((v) => v.toPrecision(4)),
      },
    ],
    visualMap: {
      min: heat.lo,
      max: heat.hi,
      orient: "vertical",
      right: 10,
      top: "70%",
      inRange: { color: ["#2f6fa7", "#e8e8e8", "#c23531"] },
    },
    series: [
      ...series.map((s) => ({ ...s, xAxisIndex: 0, yAxisIndex: 0 })),
      { type: "heatmap", xAxisIndex: 1, yAxisIndex: 1, data: heat.cells, progressive: 0 },
    ],
  };
}

function buildSweep(table: Table): EChartsOption {
  const panels = [
    { column: "nm_degree", label: "N" },
    { column: "nm_qd", label: "N_qD" },
    { column: "avg_relative_redundancy", label: "avg R_r" },
  ];
  const ratios = numericColumn(table, "gamma_bar_ratio");
  const option: EChartsOption = {
    ...baseOption("Backflow and redundancy versus resonant coupling"),
    grid: [],
    xAxis: [],
    yAxis: [],
    series: [],
  };
  panels.forEach((panel, index) => {
    const values = numericColumn(table, panel.column);
    (option.grid as object[]).push({
      left: 80,
      right: 30,
      top: `${10 + index * 29}%`,
      height: "22%",
    });
    (option.xAxis as object[]).push({
      type: "value",
      gridIndex: index,
      name: index === panels.length - 1 ? "gamma_bar / gamma" : "",
    });
    (option.yAxis as object[]).push({
      type: "value",
      gridIndex: index,
      name: panel.label,
      scale: true,
    });
    (option.series as SeriesOption[]).push({
      type: "line",
      name: panel.label,
      xAxisIndex: index,
      yAxisIndex: index,
      symbolSize: 7,
      data: ratios.map((x, i) => [x, values[i]]),
    });
  });
  return option;
}

export const FIGURES: Record<string, FigureSpec> = {
  fig2: {
    id: "fig2",
    source: "dynamics",
    required: [
      "t",
      "gamma_t",
      "system_excitation",
      "environment_excitation",
      "total_excitation",
    ],
    rangeColumns: [
      "gamma_t",
      "system_excitation",
      "environment_excitation",
      "total_excitation",
    ],
    title: "Excitation dynamics (uniform coupling)",
    build: (table) => buildDynamics(table),
  },
  fig3: {
    id: "fig3",
    source: "dynamics",
    required: [
      "t",
      "gamma_t",
      "system_excitation",
      "environment_excitation",
      "total_excitation",
    ],
    rangeColumns: [
      "gamma_t",
      "system_excitation",
      "environment_excitation",
      "total_excitation",
    ],
    title: "Excitation dynamics (resonant coupling)",
    build: (table) => buildDynamics(table),
  },
  fig4: {
    id: "fig4",
    source: "pip",
    required: ["t", "gamma_t", "fraction", "mean_mi"],
    rangeColumns: ["gamma_t", "fraction", "mean_mi"],
    title: "Normalized PIP slices",
    build: buildPipSlices,
  },
  fig5: {
    id: "fig5",
    source: "pip",
    required: ["t", "gamma_t", "fraction", "mean_mi"],
    rangeColumns: ["gamma_t", "fraction", "mean_mi"],
    title: "PIP heatmap",
    build: (table) => buildPipHeatmap(table),
  },
  fig6: {
    id: "fig6",
    source: "redundancy",
    required: ["t", "gamma_t", "h_system", "mi_full", "f_delta", "r_delta", "r_rel"],
    rangeColumns: ["gamma_t", "f_delta", "r_delta", "mi_full", "r_rel"],
    title: "Redundancy metrics",
    build: (table) => buildRedundancy(table),
  },
  fig7: {
    id: "fig7",
    source: "pip",
    required: ["t", "gamma_t", "fraction", "mean_mi"],
    rangeColumns: ["gamma_t", "fraction", "mean_mi"],
    title: "PIP slices and map (resonant coupling)",
    build: buildPipCombined,
  },
  fig8: {
    id: "fig8",
    source: "sweep",
    required: ["gamma_bar_ratio", "nm_degree", "nm_qd", "avg_relative_redundancy"],
    rangeColumns: ["gamma_bar_ratio", "nm_degree", "nm_qd", "avg_relative_redundancy"],
    title: "Backflow and redundancy panels",
    build: (table) => buildSweep(table),
  },
};

export function figureSpec(id: string): FigureSpec {
  const spec = FIGURES[id];
  if (!spec) throw new SchemaError(`unknown figure id: ${id}`);
  return spec;
}

/** Plotted data ranges: min/max of every input column the figure consumes. */
export function dataRanges(
  spec: FigureSpec,
  table: Table
): { column: string; min: number; max: number }[] {
  return spec.rangeColumns.map((column) => {
    const [min, max] = columnRange(table, column);
    return { column, min, max };
  });
}
