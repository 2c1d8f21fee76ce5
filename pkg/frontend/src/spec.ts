import { readFileSync } from "fs";
import { dirname, resolve } from "path";

export interface AxisSpec {
  field: string;
  label: string;
}

export interface YAxisSpec extends AxisSpec {
  scale?: "linear" | "log";
  clamp?: [number, number];
}

export interface PlotSpec {
  input: string;
  x: AxisSpec;
  y: YAxisSpec;
  styles: string;
  output: string;
  title?: string;
}

export interface SchemeStyle {
  color: string;
  marker: "circle" | "square" | "diamond" | "triangle" | "cross";
}

export type StyleMap = Record<string, SchemeStyle>;

const REQUIRED = ["input", "x", "y", "styles", "output"] as const;

/** Load and validate a plot spec; relative paths resolve against the spec file. */
export function loadSpec(path: string): PlotSpec {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read plot spec ${path}: ${(err as Error).message}`);
  }
  let parsed: Record<string, unknown>;
  try {
    parsed = JSON.parse(raw);
  } catch (err) {
    throw new Error(`${path}: invalid JSON: ${(err as Error).message}`);
  }
  for (const key of REQUIRED) {
    if (!(key in parsed)) {
      throw new Error(`${path}: missing required field "${key}"`);
    }
  }
  const spec = parsed as unknown as PlotSpec;
  if (!spec.x.field || !spec.y.field) {
    throw new Error(`${path}: x.field and y.field are required`);
  }
  if (spec.y.scale && spec.y.scale !== "linear" && spec.y.scale !== "log") {
    throw new Error(`${path}: y.scale must be "linear" or "log"`);
  }
  const base = dirname(resolve(path));
  return {
    ...spec,
    input: resolve(base, spec.input),
    styles: resolve(base, spec.styles),
    output: resolve(base, spec.output),
  };
}

export function loadStyles(path: string): StyleMap {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read style file ${path}: ${(err as Error).message}`);
  }
  return JSON.parse(raw) as StyleMap;
}
