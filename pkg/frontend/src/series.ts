/**
 * Readers for the simulator's CSV artifacts.
 *
 * Both readers enforce the exact column schema (order included); a header
 * that deviates raises a SchemaError naming the offending columns instead of
 * guessing. Numeric cells parse "nan" as NaN (used where phi is undefined).
 */

export const SERIES_COLUMNS = [
  "t", "mean", "l1", "l2", "linf", "min", "l2_meanfree", "neg_sobolev",
  "phi", "low_mode_fraction", "tail_fraction", "grad_sup",
] as const;

export const SWEEP_COLUMNS = [
  "A", "classification", "peak_linf", "mean_phi", "flagged_time_fraction",
] as const;

export class SchemaError extends Error {
  readonly missing: string[];
  readonly unexpected: string[];

  constructor(message: string, missing: string[], unexpected: string[]) {
    super(message);
    this.name = "SchemaError";
    this.missing = missing;
    this.unexpected = unexpected;
  }
}

export class EmptyInputError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "EmptyInputError";
  }
}

export interface SeriesTable {
  t: number[];
  mean: number[];
  l1: number[];
  l2: number[];
  linf: number[];
  min: number[];
  l2_meanfree: number[];
  neg_sobolev: number[];
  phi: number[];
  low_mode_fraction: number[];
  tail_fraction: number[];
  grad_sup: number[];
}

export interface SweepRow {
  A: number;
  classification: string;
  peak_linf: number;
  mean_phi: number;
  flagged_time_fraction: number;
}

function splitLines(text: string): string[] {
  return text.split(/\r?\n/).filter((line) => line.trim().length > 0);
}

function checkHeader(header: string[], expected: readonly string[]): void {
  const same =
    header.length === expected.length &&
    header.every((name, i) => name === expected[i]);
  if (same) return;
  const missing = expected.filter((name) => !header.includes(name));
  const unexpected = header.filter((name) => !(expected as readonly string[]).includes(name));
  const parts = [];
  if (missing.length) parts.push(`missing columns: ${missing.join(", ")}`);
  if (unexpected.length) parts.push(`unexpected columns: ${unexpected.join(", ")}`);
  if (!parts.length) parts.push(`column order must be: ${expected.join(",")}`);
  throw new SchemaError(`bad CSV header (${parts.join("; ")})`, missing, unexpected);
}

function parseNumber(cell: string, column: string, line: number): number {
  if (cell === "nan") return NaN;
  const value = Number(cell);
  if (cell.trim() === "" || Number.isNaN(value)) {
    throw new Error(`line ${line}: cannot parse ${column}=${JSON.stringify(cell)}`);
  }
  return value;
}

export function parseSeries(text: string, source = "series.csv"): SeriesTable {
  const lines = splitLines(text);
  if (lines.length === 0) throw new EmptyInputError(`${source}: empty input`);
  checkHeader(lines[0].split(","), SERIES_COLUMNS);
  if (lines.length === 1) {
    throw new EmptyInputError(`${source}: header only, no records`);
  }
  const table: SeriesTable = {
    t: [], mean: [], l1: [], l2: [], linf: [], min: [], l2_meanfree: [],
    neg_sobolev: [], phi: [], low_mode_fraction: [], tail_fraction: [],
    grad_sup: [],
  };
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== SERIES_COLUMNS.length) {
      throw new Error(`${source} line ${i + 1}: expected ${SERIES_COLUMNS.length} cells`);
    }
    SERIES_COLUMNS.forEach((name, j) => {
      table[name].push(parseNumber(cells[j], name, i + 1));
    });
  }
  for (let i = 1; i < table.t.length; i++) {
    if (!(table.t[i] > table.t[i - 1])) {
      throw new Error(`${source}: t must be strictly increasing (row ${i + 1})`);
    }
  }
  return table;
}

export function parseSweep(text: string, source = "sweep.csv"): SweepRow[] {
  const lines = splitLines(text);
  if (lines.length === 0) throw new EmptyInputError(`${source}: empty input`);
  checkHeader(lines[0].split(","), SWEEP_COLUMNS);
  if (lines.length === 1) {
    throw new EmptyInputError(`${source}: header only, no rows`);
  }
  const rows: SweepRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(",");
    if (cells.length !== SWEEP_COLUMNS.length) {
      throw new Error(`${source} line ${i + 1}: expected ${SWEEP_COLUMNS.length} cells`);
    }
    rows.push({
      A: parseNumber(cells[0], "A", i + 1),
      classification: cells[1],
      peak_linf: parseNumber(cells[2], "peak_linf", i + 1),
      mean_phi: parseNumber(cells[3], "mean_phi", i + 1),
      flagged_time_fraction: parseNumber(cells[4], "flagged_time_fraction", i + 1),
    });
  }
  return rows;
}
