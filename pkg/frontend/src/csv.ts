import { readFileSync } from "fs";
import { parse } from "papaparse";

/** One aggregated sweep point as published by the experiment runner. */
export interface SummaryRow {
  sweep: string;
  value: number;
  scheme: string;
  n: number;
  power_dbm_mean: number;
  p_hat_mean: number;
  p_hat_std: number;
}

export const SUMMARY_COLUMNS = [
  "sweep",
  "value",
  "scheme",
  "n",
  "power_dbm_mean",
  "p_hat_mean",
  "p_hat_std",
] as const;

/** Parse a summary CSV, validating the exact column set the runner writes. */
export function loadSummary(path: string): SummaryRow[] {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read summary CSV ${path}: ${(err as Error).message}`);
  }
  // tolerate an optional leading "# generated ..." timestamp line
  const body = raw
    .split("\n")
    .filter((line) => !line.startsWith("#"))
    .join("\n");
  const parsed = parse<Record<string, string>>(body.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`${path}: CSV parse error at row ${first.row}: ${first.message}`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of SUMMARY_COLUMNS) {
    if (!fields.includes(col)) {
      throw new Error(`${path}: missing column "${col}" (found: ${fields.join(", ")})`);
    }
  }
  return parsed.data.map((row, i) => {
    const lineno = i + 2;
    const num = (col: string): number => {
      const v = Number(row[col]);
      if (row[col] === undefined || row[col] === "") {
        throw new Error(`${path}: line ${lineno}: empty field "${col}"`);
      }
      return v;
    };
    return {
      sweep: row.sweep,
      value: num("value"),
      scheme: row.scheme,
      n: num("n"),
      power_dbm_mean: num("power_dbm_mean"),
      p_hat_mean: num("p_hat_mean"),
      p_hat_std: num("p_hat_std"),
    };
  });
}
