/** Seed aggregation: one series per strategy over the swept axis. */
import type { SweepTable } from './schema.js';

export type Aggregation = 'mean' | 'mean_stderr';

export interface SeriesPoint {
  x: number;
  y: number;
  /** standard error of the seed mean; 0 with a single seed or agg='mean' */
  stderr: number;
  nSeeds: number;
}

export interface Series {
  strategy: string;
  points: SeriesPoint[];
}

function mean(values: number[]): number {
  let acc = 0;
  for (const v of values) acc += v;
  return acc / values.length;
}

function stderrOfMean(values: number[]): number {
  if (values.length < 2) return 0;
  const m = mean(values);
  let ss = 0;
  for (const v of values) ss += (v - m) * (v - m);
  return Math.sqrt(ss / (values.length - 1) / values.length);
}

export function buildSeries(
  table: SweepTable,
  yColumn: string,
  aggregation: Aggregation,
): Series[] {
  if (!table.columns.includes(yColumn)) {
    throw new Error(
      `y column '${yColumn}' not in CSV (have: ${table.columns.join(', ')})`,
    );
  }
  const byStrategy = new Map<string, Map<number, number[]>>();
  for (const row of table.rows) {
    const y = row[yColumn];
    if (typeof y !== 'number' || Number.isNaN(y)) {
      throw new Error(`non-numeric '${yColumn}' for strategy ${row.strategy}`);
    }
    let perValue = byStrategy.get(row.strategy);
    if (!perValue) {
      perValue = new Map();
      byStrategy.set(row.strategy, perValue);
    }
    const bucket = perValue.get(row.axis_value);
    if (bucket) bucket.push(y);
    else perValue.set(row.axis_value, [y]);
  }
  const series: Series[] = [];
  for (const [strategy, perValue] of byStrategy) {
    const xs = [...perValue.keys()].sort((a, b) => a - b);
    series.push({
      strategy,
      points: xs.map((x) => {
        const ys = perValue.get(x)!;
        return {
          x,
          y: mean(ys),
          stderr: aggregation === 'mean_stderr' ? stderrOfMean(ys) : 0,
          nSeeds: ys.length,
        };
      }),
    });
  }
  series.sort((a, b) => a.strategy.localeCompare(b.strategy));
  return series;
}
