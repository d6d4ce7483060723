import * as fs from "node:fs";

import * as echarts from "echarts";

import { loadTable, readSidecarManifest } from "./csv";
import { dataRanges, FigureOptions, figureSpec } from "./figures";

export interface RenderRequest {
  figureId: string;
  inputPath: string;
  outputPath?: string;
  width?: number;
  height?: number;
  options?: FigureOptions;
}

/** Render one figure to an SVG string (pure; no file output). */
export function renderFigure(request: RenderRequest): string {
  const spec = figureSpec(request.figureId);
  const table = loadTable(request.inputPath, spec.required);
  const manifest = readSidecarManifest(request.inputPath, spec.source);
  const option = spec.build(table, request.options ?? {});
  if (manifest && option.title && !Array.isArray(option.title)) {
    const stamp = `seed ${manifest.master_seed ?? "?"} - v${manifest.version ?? "?"}`;
    option.title.subtext = option.title.subtext
      ? `${option.title.subtext} (${stamp})`
      : stamp;
  }
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: request.width ?? 860,
    height: request.height ?? 640,
  });
  try {
    chart.setOption(option);
    return canonicalizeSvg(chart.renderToSVGString());
  } finally {
    chart.dispose();
  }
}

/** Replace the renderer's process-global generated ids (classes, clip paths)
 * with stable sequential ones so repeated renders are byte-identical. */
function canonicalizeSvg(svg: string): string {
  const mapping = new Map<string, string>();
  return svg.replace(/zr\d+-[A-Za-z0-9_-]+/g, (token) => {
    if (!mapping.has(token)) mapping.set(token, `zrid-${mapping.size}`);
    return mapping.get(token)!;
  });
}

/** Render and write; returns the output path. */
export function renderToFile(request: RenderRequest): string {
  if (!request.outputPath) throw new Error("outputPath is required");
  const svg = renderFigure(request);
  fs.writeFileSync(request.outputPath, svg);
  return request.outputPath;
}

/** Dry run: the plotted data ranges as stable text lines, no file written. */
export function dryRunReport(figureId: string, inputPath: string): string[] {
  const spec = figureSpec(figureId);
  const table = loadTable(inputPath, spec.required);
  return dataRanges(spec, table).map(
    ({ column, min, max }) => `range ${column} ${min} ${max}`
  );
}
