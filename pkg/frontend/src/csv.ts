/**
 * Experiment CSV + manifest loading.
 *
 * The primary toolchain emits `<name>.csv` with the fixed header
 * `sample,N,t,quantity,value` and a `<name>.manifest.json` sidecar carrying
 * the ensemble parameters, fits and declared checks.  The schema is validated
 * against the manifest before any figure is drawn.
 */

import { readFileSync } from "fs";

export interface Row {
  sample: number;
  n: number;
  t: number;
  quantity: string;
  value: number;
}

export interface Manifest {
  name: string;
  csv_schema: string;
  spec: {
    seed: number;
    sample_count: number;
    s: number;
    cutoffs: number[];
    times: number[];
    galerkin_factor: number;
  };
  params: Record<string, unknown>;
  fits: { quantity: string; exponent: number; ci: number[]; reference?: number }[];
  checks: { name: string; passed: boolean; observed: number; threshold: number }[];
  phi_hash: string;
}

export const SCHEMA = "sample,N,t,quantity,value";

export class DataError extends Error {}

export function parseCsv(text: string): Row[] {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0) {
    throw new DataError("empty CSV: no header");
  }
  const header = lines[0];
  if (header !== SCHEMA) {
    const missing = SCHEMA.split(",").filter(
      (c) => !header.split(",").includes(c),
    );
    throw new DataError(
      missing.length > 0
        ? `CSV missing column(s): ${missing.join(", ")}`
        : `unexpected CSV header: ${header}`,
    );
  }
  if (lines.length === 1) {
    throw new DataError("no data: CSV has a header but no rows");
  }
  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 5) {
      throw new DataError(`row ${i}: expected 5 fields, got ${parts.length}`);
    }
    const [sample, n, t, quantity, value] = parts;
    const row = {
      sample: Number(sample),
      n: Number(n),
      t: Number(t),
      quantity,
      value: Number(value),
    };
    if (
      !Number.isFinite(row.sample) ||
      !Number.isFinite(row.n) ||
      !Number.isFinite(row.t) ||
      !Number.isFinite(row.value)
    ) {
      throw new DataError(`row ${i}: non-numeric field in ${lines[i]}`);
    }
    rows.push(row);
  }
  return rows;
}

export function loadRun(csvPath: string): { rows: Row[]; manifest: Manifest } {
  const rows = parseCsv(readFileSync(csvPath, "utf-8"));
  const manifestPath = csvPath.replace(/\.csv$/, ".manifest.json");
  let manifest: Manifest;
  try {
    manifest = JSON.parse(readFileSync(manifestPath, "utf-8")) as Manifest;
  } catch (err) {
    throw new DataError(`cannot read manifest ${manifestPath}: ${err}`);
  }
  if (manifest.csv_schema !== SCHEMA) {
    throw new DataError(
      `manifest schema ${manifest.csv_schema} != expected ${SCHEMA}`,
    );
  }
  return { rows, manifest };
}

export function byQuantity(rows: Row[], quantity: string): Row[] {
  return rows.filter((r) => r.quantity === quantity);
}

export function quantities(rows: Row[]): string[] {
  return [...new Set(rows.map((r) => r.quantity))].sort();
}
