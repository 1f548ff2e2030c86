/**
 * Deterministic SVG rendering: hand-rolled scales, axes, error bars.
 *
 * The full data layer is embedded verbatim in a <metadata> element, so a
 * figure can always be checked against the CSV it came from byte for byte.
 */

import { FigureData, Series, SeriesPoint } from "./figures.js";

const WIDTH = 640;
const HEIGHT = 460;
const MARGIN = { left: 72, right: 24, top: 28, bottom: 52 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

interface Scale {
  (v: number): number;
  ticks: number[];
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  if (!(hi > lo)) return [lo];
  const raw = (hi - lo) / n;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= n)!;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  if (hi === lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const pad = 0.04 * (hi - lo);
  const a = lo - pad;
  const b = hi + pad;
  const f = ((v: number) => outLo + ((v - a) / (b - a)) * (outHi - outLo)) as Scale;
  f.ticks = niceTicks(lo, hi);
  return f;
}

function logScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const a = Math.log10(lo) - 0.1;
  const b = Math.log10(hi) + 0.1;
  const f = ((v: number) => outLo + ((Math.log10(v) - a) / (b - a)) * (outHi - outLo)) as Scale;
  const ticks: number[] = [];
  for (let k = Math.ceil(a); k <= Math.floor(b); k += 1) ticks.push(Math.pow(10, k));
  f.ticks = ticks.length >= 2 ? ticks : [lo, hi];
  return f;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 0.001 && abs < 10000) return String(Number(v.toPrecision(6)));
  return v.toExponential(1);
}

function collectFinite(series: Series[], pick: (p: SeriesPoint) => number): number[] {
  return series.flatMap((s) => s.points.map(pick)).filter((v) => Number.isFinite(v));
}

export function renderSvg(fig: FigureData): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const xs = collectFinite(fig.series, (p) => p.x).concat(fig.vLines);
  let ys = collectFinite(fig.series, (p) => p.y).concat(fig.hLines);
  if (fig.logY) ys = ys.filter((v) => v > 0);
  if (xs.length === 0 || ys.length === 0) {
    throw new Error("nothing to plot: no finite data points");
  }
  const x = linearScale(Math.min(...xs), Math.max(...xs), MARGIN.left, MARGIN.left + plotW);
  const y = fig.logY
    ? logScale(Math.min(...ys), Math.max(...ys), MARGIN.top + plotH, MARGIN.top)
    : linearScale(Math.min(...ys), Math.max(...ys), MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
  );
  // the data layer: everything plotted, before any geometry
  parts.push(`<metadata id="data-layer">${serializeDataLayer(fig)}</metadata>`);
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(`<g stroke="black" fill="none">`);
  parts.push(`<path d="M ${x0} ${MARGIN.top} V ${y0} H ${x0 + plotW}"/>`);
  parts.push(`</g>`);
  for (const t of x.ticks) {
    const px = x(t);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(
      `<text x="${px}" y="${y0 + 18}" text-anchor="middle">${fmt(t)}</text>`,
    );
  }
  for (const t of y.ticks) {
    const py = y(t);
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${py + 4}" text-anchor="end">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle">${fig.xLabel}</text>`,
  );
  parts.push(
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">${fig.yLabel}</text>`,
  );

  // overlays
  for (const v of fig.hLines) {
    if (fig.logY && v <= 0) continue;
    parts.push(
      `<line x1="${x0}" y1="${y(v)}" x2="${x0 + plotW}" y2="${y(v)}" ` +
        `stroke="gray" stroke-dasharray="6 3"/>`,
    );
  }
  for (const v of fig.vLines) {
    parts.push(
      `<line x1="${x(v)}" y1="${MARGIN.top}" x2="${x(v)}" y2="${y0}" ` +
        `stroke="gray" stroke-dasharray="6 3"/>`,
    );
  }

  // series
  fig.series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const finite = s.points.filter(
      (p) => Number.isFinite(p.x) && Number.isFinite(p.y) && (!fig.logY || p.y > 0),
    );
    const path = finite
      .map((p, k) => `${k === 0 ? "M" : "L"} ${x(p.x).toFixed(2)} ${y(p.y).toFixed(2)}`)
      .join(" ");
    const dash = s.dashed ? ` stroke-dasharray="5 4"` : "";
    parts.push(`<path d="${path}" fill="none" stroke="${color}"${dash}/>`);
    for (const p of finite) {
      parts.push(
        `<circle cx="${x(p.x).toFixed(2)}" cy="${y(p.y).toFixed(2)}" r="2.5" fill="${color}"/>`,
      );
      if (p.err !== undefined && Number.isFinite(p.err) && p.err > 0) {
        const yLo = fig.logY && p.y - p.err <= 0 ? p.y : p.y - p.err;
        parts.push(
          `<line x1="${x(p.x).toFixed(2)}" y1="${y(yLo).toFixed(2)}" ` +
            `x2="${x(p.x).toFixed(2)}" y2="${y(p.y + p.err).toFixed(2)}" stroke="${color}"/>`,
        );
      }
    }
    // legend entry
    const ly = MARGIN.top + 14 + 16 * i;
    parts.push(
      `<line x1="${x0 + plotW - 110}" y1="${ly}" x2="${x0 + plotW - 86}" y2="${ly}" ` +
        `stroke="${color}"${dash}/>`,
    );
    parts.push(`<text x="${x0 + plotW - 80}" y="${ly + 4}">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n");
}

/** Canonical JSON of exactly what is plotted (stable key order). */
export function serializeDataLayer(fig: FigureData): string {
  return JSON.stringify({
    kind: fig.kind,
    xLabel: fig.xLabel,
    yLabel: fig.yLabel,
    logY: fig.logY,
    hLines: fig.hLines,
    vLines: fig.vLines,
    series: fig.series.map((s) => ({
      label: s.label,
      dashed: s.dashed ?? false,
      points: s.points.map((p) => ({
        x: p.x,
        y: p.y,
        ...(p.err !== undefined ? { err: p.err } : {}),
      })),
    })),
  });
}

export function extractDataLayer(svg: string): string {
  const match = svg.match(/<metadata id="data-layer">([\s\S]*?)<\/metadata>/);
  if (!match) throw new Error("no data layer found in SVG");
  return match[1];
}
