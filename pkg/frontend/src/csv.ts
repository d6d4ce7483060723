import * as fs from "node:fs";
import * as path from "node:path";
import Papa from "papaparse";

export type Cell = number | string;

export interface Table {
  columns: string[];
  rows: Record<string, Cell>[];
}

/** Error class for schema problems: missing columns, empty tables, wrong source. */
export class SchemaError extends Error {}

function coerce(value: unknown): Cell {
  if (value === "nan") return NaN;
  if (value === "inf") return Infinity;
  if (value === "-inf") return -Infinity;
  if (typeof value === "number" || typeof value === "string") return value;
  if (value === null || value === undefined) return NaN;
  return String(value);
}

/** Load a CSV table, checking that every required column is present and the body is nonempty. */
export function loadTable(filePath: string, required: string[]): Table {
  const text = fs.readFileSync(filePath, "utf8");
  const parsed = Papa.parse<Record<string, unknown>>(text.trim(), {
    header: true,
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`${filePath}: ${parsed.errors[0].message}`);
  }
  const columns = parsed.meta.fields ?? [];
  const missing = required.filter((c) => !columns.includes(c));
  if (missing.length > 0) {
    throw new SchemaError(`${filePath}: missing columns: ${missing.join(", ")}`);
  }
  if (parsed.data.length === 0) {
    throw new SchemaError(`${filePath}: empty input table`);
  }
  const rows = parsed.data.map((raw) => {
    const row: Record<string, Cell> = {};
    for (const column of columns) row[column] = coerce(raw[column]);
    return row;
  });
  return { columns, rows };
}

export function numericColumn(table: Table, column: string): number[] {
  return table.rows.map((row) => Number(row[column]));
}

/** Min/max of a column, ignoring NaN entries (undefined markers). */
export function columnRange(table: Table, column: string): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of table.rows) {
    const value = Number(row[column]);
    if (Number.isNaN(value)) continue;
    if (value < lo) lo = value;
    if (value > hi) hi = value;
  }
  if (lo > hi) throw new SchemaError(`column ${column} holds no finite values`);
  return [lo, hi];
}

export interface ManifestInfo {
  command: string;
  version?: string;
  master_seed?: number;
}

/**
 * Locate the sidecar manifest of a CSV (``<command>_manifest.json`` in the
 * same directory) and check it was produced by the expected command.
 * Returns null when no manifest sits next to the table.
 */
export function readSidecarManifest(
  csvPath: string,
  expectedCommand: string
): ManifestInfo | null {
  const manifestPath = path.join(
    path.dirname(csvPath),
    `${expectedCommand}_manifest.json`
  );
  if (!fs.existsSync(manifestPath)) return null;
  const manifest = JSON.parse(fs.readFileSync(manifestPath, "utf8"));
  if (manifest.command !== expectedCommand) {
    throw new SchemaError(
      `${manifestPath}: produced by '${manifest.command}', expected '${expectedCommand}'`
    );
  }
  return {
    command: manifest.command,
    version: manifest.version,
    master_seed: manifest.master_seed,
  };
}
