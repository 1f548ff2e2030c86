/**
 * Turn validated CSV rows into plottable series, one builder per figure kind.
 *
 * The only arithmetic allowed here is the 1/2 - value transform of the
 * saturation inset; every other number is passed through unchanged so the
 * embedded data layer stays a faithful copy of the simulation output.
 */

import {
  DNDT_COLUMNS,
  Row,
  SWEEP_COLUMNS,
  THRESHOLD_COLUMNS,
  loadCsv,
  num,
} from "./schema.js";

export type FigureKind =
  | "negativity-vs-t"
  | "saturation-inset"
  | "dndt-scan"
  | "threshold-scan"
  | "fidelity-vs-l";

export interface SeriesPoint {
  x: number;
  y: number;
  err?: number;
}

export interface Series {
  label: string;
  points: SeriesPoint[];
  dashed?: boolean;
}

export interface FigureData {
  kind: FigureKind;
  xLabel: string;
  yLabel: string;
  logY: boolean;
  series: Series[];
  hLines: number[];
  vLines: number[];
}

/** Onsager critical temperature of the square-lattice model (d = 2 only). */
export const T_CRIT_2D = 2 / Math.log(1 + Math.SQRT2);

function groupBy(rows: Row[], column: string): Map<string, Row[]> {
  const out = new Map<string, Row[]>();
  for (const row of rows) {
    const key = row[column];
    const bucket = out.get(key);
    if (bucket) bucket.push(row);
    else out.set(key, [row]);
  }
  return out;
}

function sortedKeys(groups: Map<string, Row[]>): string[] {
  return [...groups.keys()].sort((a, b) => Number(a) - Number(b));
}

function points(rows: Row[], x: string, y: string, err?: string): SeriesPoint[] {
  const pts = rows.map((r) => ({
    x: num(r, x),
    y: num(r, y),
    ...(err ? { err: num(r, err) } : {}),
  }));
  pts.sort((a, b) => a.x - b.x);
  return pts;
}

function loadMany(paths: string[], columns: readonly string[]): Row[] {
  return paths.flatMap((p) => loadCsv(p, columns));
}

export function negativityVsT(paths: string[], tcLine = true): FigureData {
  const rows = loadMany(paths, SWEEP_COLUMNS);
  const groups = groupBy(rows, "L");
  const series = sortedKeys(groups).map((L) => ({
    label: `L=${L}`,
    points: points(groups.get(L)!, "T", "value", "stderr"),
  }));
  const all2d = rows.every((r) => r.d === "2");
  return {
    kind: "negativity-vs-t",
    xLabel: "T",
    yLabel: "negativity",
    logY: false,
    series,
    hLines: [0.5],
    vLines: tcLine && all2d ? [T_CRIT_2D] : [],
  };
}

export function saturationInset(paths: string[]): FigureData {
  const rows = loadMany(paths, SWEEP_COLUMNS);
  const groups = groupBy(rows, "T");
  const series = sortedKeys(groups).map((T) => ({
    label: `T=${T}`,
    points: groups
      .get(T)!
      .map((r) => ({ x: num(r, "L"), y: 0.5 - num(r, "value"), err: num(r, "stderr") }))
      .sort((a, b) => a.x - b.x),
  }));
  return {
    kind: "saturation-inset",
    xLabel: "L",
    yLabel: "1/2 - negativity",
    logY: true,
    series,
    hLines: [],
    vLines: [],
  };
}

export function dndtScan(paths: string[], tcLine = true): FigureData {
  const rows = loadMany(paths, DNDT_COLUMNS);
  const groups = groupBy(rows, "L");
  const series = sortedKeys(groups).map((L) => ({
    label: `L=${L}`,
    points: points(groups.get(L)!, "T", "value", "stderr"),
  }));
  const all2d = rows.every((r) => r.d === "2");
  return {
    kind: "dndt-scan",
    xLabel: "T",
    yLabel: "dN/dT (single site)",
    logY: false,
    series,
    hLines: [],
    vLines: tcLine && all2d ? [T_CRIT_2D] : [],
  };
}

export function thresholdScan(paths: string[]): FigureData {
  const rows = loadMany(paths, THRESHOLD_COLUMNS);
  const groups = groupBy(rows, "n_bits");
  const series: Series[] = [];
  for (const n of sortedKeys(groups)) {
    const bucket = groups.get(n)!;
    series.push({
      label: `n=${n}`,
      points: points(bucket, "p", "success_rate", "stderr"),
    });
    series.push({
      label: `n=${n} bound`,
      points: points(bucket, "p", "lower_bound"),
      dashed: true,
    });
  }
  return {
    kind: "threshold-scan",
    xLabel: "flip probability p",
    yLabel: "decoding success rate",
    logY: false,
    series,
    hLines: [0.5],
    vLines: [0.5],
  };
}

export function fidelityVsL(paths: string[]): FigureData {
  const rows = loadMany(paths, SWEEP_COLUMNS);
  const groups = groupBy(rows, "beta");
  const series = sortedKeys(groups).map((beta) => ({
    label: `beta=${beta}`,
    points: points(groups.get(beta)!, "L", "value", "stderr"),
  }));
  return {
    kind: "fidelity-vs-l",
    xLabel: "L",
    yLabel: "recovery fidelity",
    logY: false,
    series,
    hLines: [1.0],
    vLines: [],
  };
}

export function buildFigure(kind: FigureKind, paths: string[], tcLine = true): FigureData {
  switch (kind) {
    case "negativity-vs-t":
      return negativityVsT(paths, tcLine);
    case "saturation-inset":
      return saturationInset(paths);
    case "dndt-scan":
      return dndtScan(paths, tcLine);
    case "threshold-scan":
      return thresholdScan(paths);
    case "fidelity-vs-l":
      return fidelityVsL(paths);
  }
}
