/**
 * CSV schemas for the simulation sweep outputs and strict parsing.
 *
 * The renderer is a pure view: it never recomputes physics, it only checks
 * that the columns match the documented schema and turns rows into numbers.
 */

import Papa from "papaparse";
import { readFileSync } from "node:fs";

export type Row = Record<string, string>;

export class SchemaError extends Error {
  constructor(
    message: string,
    public readonly missing: string[] = [],
    public readonly unexpected: string[] = [],
  ) {
    super(message);
    this.name = "SchemaError";
  }
}

export class EmptyInputError extends Error {
  constructor(path: string) {
    super(`no data rows in ${path}`);
    this.name = "EmptyInputError";
  }
}

export const SWEEP_COLUMNS = [
  "kind", "d", "L", "beta", "T", "partition", "value", "stderr",
  "tau_int", "n_eff", "seed", "warn",
] as const;

export const DNDT_COLUMNS = [
  "kind", "d", "L", "T", "h", "value", "stderr", "below_resolution", "seed",
] as const;

export const THRESHOLD_COLUMNS = [
  "n_bits", "p", "n_trials", "success_rate", "stderr", "lower_bound",
] as const;

export function checkColumns(header: string[], expected: readonly string[], path: string): void {
  const missing = expected.filter((c) => !header.includes(c));
  const unexpected = header.filter((c) => !expected.includes(c));
  if (missing.length > 0 || unexpected.length > 0) {
    const parts = [`schema mismatch in ${path}`];
    if (missing.length > 0) parts.push(`missing columns: ${missing.join(", ")}`);
    if (unexpected.length > 0) parts.push(`unexpected columns: ${unexpected.join(", ")}`);
    throw new SchemaError(parts.join("; "), missing, unexpected);
  }
}

export function loadCsv(path: string, expected: readonly string[]): Row[] {
  const text = readFileSync(path, "utf8");
  const parsed = Papa.parse<Row>(text.trim(), { header: true, skipEmptyLines: true });
  const header = parsed.meta.fields ?? [];
  if (header.length === 0 || (header.length === 1 && header[0] === "")) {
    throw new EmptyInputError(path);
  }
  checkColumns(header, expected, path);
  if (parsed.data.length === 0) {
    throw new EmptyInputError(path);
  }
  return parsed.data;
}

/** Parse a numeric cell; sweep rows may carry inf/nan from failed points. */
export function num(row: Row, column: string): number {
  const raw = row[column];
  if (raw === undefined) throw new SchemaError(`row missing column ${column}`);
  const value = Number(raw);
  if (Number.isNaN(value) && raw !== "nan") {
    throw new SchemaError(`non-numeric value ${JSON.stringify(raw)} in column ${column}`);
  }
  return value;
}
