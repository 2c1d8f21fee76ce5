import { Figure, Series } from "./figure.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 78, right: 24, top: 40, bottom: 58 };

interface Scale {
  (value: number): number;
}

function niceTicks(lo: number, hi: number, count = 6): number[] {
  if (!(hi > lo)) {
    const pad = Math.abs(lo) > 0 ? Math.abs(lo) * 0.5 : 1;
    return [lo - pad, lo, lo + pad];
  }
  const span = hi - lo;
  const step0 = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = span / count / step0;
  const step = step0 * (err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1);
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + step * 1e-9; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let d = Math.floor(Math.log10(lo)); d <= Math.ceil(Math.log10(hi)); d++) {
    const v = Math.pow(10, d);
    if (v >= lo / 1.001 && v <= hi * 1.001) ticks.push(v);
  }
  return ticks.length >= 2 ? ticks : [lo, hi];
}

function fmt(value: number): string {
  if (value === 0) return "0";
  const a = Math.abs(value);
  if (a >= 1e4 || a < 1e-3) return value.toExponential(0);
  return String(Number(value.toPrecision(6)));
}

function marker(shape: string, x: number, y: number, color: string): string {
  const r = 4.5;
  switch (shape) {
    case "square":
      return `<rect x="${x - r}" y="${y - r}" width="${2 * r}" height="${2 * r}" fill="${color}"/>`;
    case "diamond":
      return `<polygon points="${x},${y - r * 1.2} ${x + r * 1.2},${y} ${x},${y + r * 1.2} ${x - r * 1.2},${y}" fill="${color}"/>`;
    case "triangle":
      return `<polygon points="${x},${y - r * 1.2} ${x + r * 1.1},${y + r} ${x - r * 1.1},${y + r}" fill="${color}"/>`;
    case "cross":
      return (
        `<line x1="${x - r}" y1="${y - r}" x2="${x + r}" y2="${y + r}" stroke="${color}" stroke-width="2"/>` +
        `<line x1="${x - r}" y1="${y + r}" x2="${x + r}" y2="${y - r}" stroke="${color}" stroke-width="2"/>`
      );
    default:
      return `<circle cx="${x}" cy="${y}" r="${r}" fill="${color}"/>`;
  }
}

function extent(series: Series[], axis: "x" | "y"): [number, number] {
  const values = series.flatMap((s) => s[axis]);
  return [Math.min(...values), Math.max(...values)];
}

/** Render a figure to a standalone SVG document string. */
export function renderSvg(figure: Figure): string {
  const [x0, x1] = extent(figure.series, "x");
  let [y0, y1] = extent(figure.series, "y");
  if (figure.yScale === "log") {
    y0 = Math.max(y0, 1e-12);
    y1 = Math.max(y1, y0 * 10);
  } else if (y0 === y1) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const xPad = x1 > x0 ? 0.04 * (x1 - x0) : Math.max(1e-12, Math.abs(x0) * 0.5 + 0.5);
  const sx: Scale = (v) => MARGIN.left + ((v - (x0 - xPad)) / (x1 + xPad - (x0 - xPad))) * plotW;
  const yPadLin = 0.06 * (y1 - y0);
  const sy: Scale =
    figure.yScale === "log"
      ? (v) =>
          MARGIN.top +
          plotH -
          ((Math.log10(Math.max(v, 1e-12)) - Math.log10(y0)) /
            (Math.log10(y1) - Math.log10(y0))) *
            plotH
      : (v) => MARGIN.top + plotH - ((v - (y0 - yPadLin)) / (y1 + yPadLin - (y0 - yPadLin))) * plotH;

  const xTicks = niceTicks(x0, x1).filter((t) => t >= x0 - xPad && t <= x1 + xPad);
  const yTicks = figure.yScale === "log" ? logTicks(y0, y1) : niceTicks(y0 - yPadLin, y1 + yPadLin);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  if (figure.title) {
    parts.push(
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">${figure.title}</text>`
    );
  }
  // frame and grid
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#222"/>`
  );
  for (const t of yTicks) {
    const y = sy(t);
    if (y < MARGIN.top - 1 || y > MARGIN.top + plotH + 1) continue;
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-size="12">${fmt(t)}</text>`
    );
  }
  for (const t of xTicks) {
    const x = sx(t);
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top + plotH}" x2="${x}" y2="${MARGIN.top + plotH + 5}" stroke="#222"/>`,
      `<text x="${x}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" font-size="12">${fmt(t)}</text>`
    );
  }
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-size="14">${figure.xLabel}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${figure.yLabel}</text>`
  );
  // one line-with-markers per scheme
  for (const s of figure.series) {
    const pts = s.x.map((x, i) => `${sx(x)},${sy(s.y[i])}`).join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${s.style.color}" stroke-width="2"/>`
    );
    s.x.forEach((x, i) => parts.push(marker(s.style.marker, sx(x), sy(s.y[i]), s.style.color)));
  }
  // legend
  const legendX = MARGIN.left + 12;
  let legendY = MARGIN.top + 16;
  for (const s of figure.series) {
    parts.push(
      `<line x1="${legendX}" y1="${legendY - 4}" x2="${legendX + 26}" y2="${legendY - 4}" stroke="${s.style.color}" stroke-width="2"/>`,
      marker(s.style.marker, legendX + 13, legendY - 4, s.style.color),
      `<text x="${legendX + 34}" y="${legendY}" font-size="12">${s.scheme}</text>`
    );
    legendY += 18;
  }
  parts.push("</svg>");
  return parts.join("\n");
}
