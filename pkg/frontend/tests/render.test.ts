import { mkdtempSync, readFileSync, statSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { render } from "../src/render.js";
import { renderSvg } from "../src/svg.js";
import { buildFigure } from "../src/figure.js";
import { StyleMap } from "../src/spec.js";

const HEADER = "sweep,value,scheme,n,power_dbm_mean,p_hat_mean,p_hat_std";

function setup(csv: string): { dir: string; specPath: string; csvPath: string } {
  const dir = mkdtempSync(join(tmpdir(), "risbeam-render-"));
  const csvPath = join(dir, "summary.csv");
  writeFileSync(csvPath, csv, "utf8");
  writeFileSync(
    join(dir, "styles.json"),
    JSON.stringify({ Proposed: { color: "#c00", marker: "circle" } }),
    "utf8"
  );
  const specPath = join(dir, "spec.json");
  writeFileSync(
    specPath,
    JSON.stringify({
      input: "summary.csv",
      x: { field: "value", label: "x" },
      y: { field: "p_hat_mean", label: "outage", clamp: [0, 1] },
      styles: "styles.json",
      output: "fig.svg",
      title: "test",
    }),
    "utf8"
  );
  return { dir, specPath, csvPath };
}

describe("render", () => {
  it("renders a single-scheme single-point CSV to an SVG file", () => {
    const { dir, specPath } = setup(`${HEADER}\ndelta_c,0.01,Proposed,10,-16,0.002,0.001\n`);
    const fig = render(specPath);
    expect(fig.series).toHaveLength(1);
    const svg = readFileSync(join(dir, "fig.svg"), "utf8");
    expect(svg).toContain("<svg");
    expect(svg).toContain("polyline");
    expect(svg).toContain("outage");
  });

  it("is idempotent and never touches the input CSV", () => {
    const { dir, specPath, csvPath } = setup(
      `${HEADER}\ndelta_c,0.01,Proposed,10,-16,0.0,0\ndelta_c,0.02,Proposed,10,-15,0.5,0\n`
    );
    const before = readFileSync(csvPath, "utf8");
    const mtime = statSync(csvPath).mtimeMs;
    render(specPath);
    const first = readFileSync(join(dir, "fig.svg"));
    render(specPath);
    const second = readFileSync(join(dir, "fig.svg"));
    expect(second.equals(first)).toBe(true);
    expect(readFileSync(csvPath, "utf8")).toBe(before);
    expect(statSync(csvPath).mtimeMs).toBe(mtime);
  });

  it("fails with context when the CSV is empty", () => {
    const { specPath } = setup(`${HEADER}\n`);
    expect(() => render(specPath)).toThrow(/no data rows/);
  });
});

describe("renderSvg", () => {
  it("draws one polyline and marker set per scheme and a legend", () => {
    const styles: StyleMap = {
      A: { color: "#111111", marker: "circle" },
      B: { color: "#222222", marker: "square" },
    };
    const rows = [
      { sweep: "L", value: 8, scheme: "A", n: 1, power_dbm_mean: -10, p_hat_mean: 0.1, p_hat_std: 0 },
      { sweep: "L", value: 16, scheme: "A", n: 1, power_dbm_mean: -12, p_hat_mean: 0.2, p_hat_std: 0 },
      { sweep: "L", value: 8, scheme: "B", n: 1, power_dbm_mean: -11, p_hat_mean: 0.3, p_hat_std: 0 },
      { sweep: "L", value: 16, scheme: "B", n: 1, power_dbm_mean: -13, p_hat_mean: 0.4, p_hat_std: 0 },
    ];
    const fig = buildFigure(
      {
        input: "mem",
        x: { field: "value", label: "L" },
        y: { field: "power_dbm_mean", label: "dBm" },
        styles: "s",
        output: "o",
      },
      rows,
      styles
    );
    const svg = renderSvg(fig);
    expect(svg.match(/<polyline/g)).toHaveLength(2);
    expect(svg).toContain("#111111");
    expect(svg).toContain("#222222");
    expect(svg).toContain(">A</text>");
    expect(svg).toContain(">B</text>");
  });
});
