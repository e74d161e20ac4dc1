/** Reading the simulator's sweep CSV (schema produced by `rateless-sim sweep`). */
import { readFileSync } from 'node:fs';
import Papa from 'papaparse';

export interface SweepRow {
  strategy: string;
  seed: number;
  axis: string;
  axis_value: number;
  /** every other column, numeric where parseable */
  [column: string]: string | number;
}

export interface SweepTable {
  rows: SweepRow[];
  columns: string[];
  /** the swept parameter named by the CSV itself (constant per file) */
  axis: string;
}

export function loadSweepCsv(path: string): SweepTable {
  const text = readFileSync(path, 'utf8');
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new Error(`${path}: CSV parse error at row ${e.row}: ${e.message}`);
  }
  const columns = parsed.meta.fields ?? [];
  for (const required of ['strategy', 'seed', 'axis', 'axis_value']) {
    if (!columns.includes(required)) {
      throw new Error(`${path}: missing required column '${required}'`);
    }
  }
  const rows: SweepRow[] = parsed.data.map((raw) => {
    const row: Record<string, string | number> = {};
    for (const col of columns) {
      const value = raw[col];
      const num = value === '' || value === undefined ? NaN : Number(value);
      row[col] = Number.isNaN(num) ? (value ?? '') : num;
    }
    return row as SweepRow;
  });
  const axes = new Set(rows.map((r) => r.axis));
  if (axes.size !== 1) {
    throw new Error(`${path}: expected one swept axis, found [${[...axes]}]`);
  }
  const axis = rows[0].axis;
  const strategies = new Set(rows.map((r) => r.strategy));
  if (strategies.size < 1) {
    throw new Error(`${path}: no strategies present`);
  }
  return { rows, columns, axis };
}
