import { SummaryRow } from "./csv.js";
import { PlotSpec, SchemeStyle, StyleMap } from "./spec.js";

export interface Series {
  scheme: string;
  style: SchemeStyle;
  x: number[];
  y: number[];
}

export interface Figure {
  xLabel: string;
  yLabel: string;
  title: string;
  yScale: "linear" | "log";
  series: Series[];
}

const FALLBACK_STYLE: SchemeStyle = { color: "#444444", marker: "circle" };

function pick(row: SummaryRow, field: string, source: string): number {
  if (!(field in row)) {
    throw new Error(`${source}: unknown field "${field}"`);
  }
  return row[field as keyof SummaryRow] as number;
}

/**
 * Collect one (x, y) series per scheme from the summary rows, sorted by x,
 * dropping non-finite points (failed sweep cells) and clamping y when the
 * spec asks for it.  Pure; never mutates its inputs.
 */
export function buildFigure(spec: PlotSpec, rows: SummaryRow[], styles: StyleMap): Figure {
  if (rows.length === 0) {
    throw new Error(`${spec.input}: no data rows`);
  }
  const schemes: string[] = [];
  for (const row of rows) {
    if (!schemes.includes(row.scheme)) schemes.push(row.scheme);
  }
  const clamp = spec.y.clamp;
  const series: Series[] = schemes.map((scheme) => {
    const points = rows
      .filter((r) => r.scheme === scheme)
      .map((r) => ({
        x: pick(r, spec.x.field, spec.input),
        y: pick(r, spec.y.field, spec.input),
      }))
      .filter((p) => Number.isFinite(p.x) && Number.isFinite(p.y))
      .sort((a, b) => a.x - b.x);
    const ys = points.map((p) =>
      clamp ? Math.min(clamp[1], Math.max(clamp[0], p.y)) : p.y
    );
    return {
      scheme,
      style: styles[scheme] ?? FALLBACK_STYLE,
      x: points.map((p) => p.x),
      y: ys,
    };
  });
  const nonEmpty = series.filter((s) => s.x.length > 0);
  if (nonEmpty.length === 0) {
    throw new Error(`${spec.input}: every series is empty after filtering`);
  }
  return {
    xLabel: spec.x.label,
    yLabel: spec.y.label,
    title: spec.title ?? "",
    yScale: spec.y.scale ?? "linear",
    series: nonEmpty,
  };
}
