import { mkdirSync, writeFileSync } from "fs";
import { dirname } from "path";

import { loadSummary } from "./csv.js";
import { buildFigure, Figure } from "./figure.js";
import { loadSpec, loadStyles } from "./spec.js";
import { renderSvg } from "./svg.js";

/**
 * Render one plot spec: read the summary CSV, build the per-scheme series,
 * and write the SVG next to wherever the spec points.  Returns the figure
 * data so callers (and tests) can inspect exactly what was drawn.  Never
 * mutates the input CSV; rendering the same spec twice writes identical
 * bytes.
 */
export function render(specPath: string): Figure {
  const spec = loadSpec(specPath);
  const rows = loadSummary(spec.input);
  const styles = loadStyles(spec.styles);
  const figure = buildFigure(spec, rows, styles);
  mkdirSync(dirname(spec.output), { recursive: true });
  writeFileSync(spec.output, renderSvg(figure), "utf8");
  return figure;
}
