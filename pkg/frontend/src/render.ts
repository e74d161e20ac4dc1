/** FigureSpec -> SVG + PNG files from one sweep CSV. */
import { writeFileSync } from 'node:fs';
import { Resvg } from '@resvg/resvg-js';
import { buildSeries, type Aggregation, type Series } from './aggregate.js';
import { loadSweepCsv } from './schema.js';
import { renderChartSvg, type ChartGeometry } from './svg.js';

export interface FigureSpec {
  csvPath: string;
  /** swept-axis column; defaults to the axis the CSV names itself */
  axisColumn?: string;
  yColumn?: string;
  aggregation?: Aggregation;
  outputBase: string; // writes <outputBase>.svg and <outputBase>.png
  width?: number;
  height?: number;
}

export interface RenderResult {
  svgPath: string;
  pngPath: string;
  series: Series[];
  geometry: ChartGeometry;
}

export function render(spec: FigureSpec): RenderResult {
  const table = loadSweepCsv(spec.csvPath);
  const axis = spec.axisColumn ?? table.axis;
  if (axis !== table.axis) {
    throw new Error(
      `axis column '${axis}' does not match the CSV's swept axis '${table.axis}'`,
    );
  }
  const yColumn = spec.yColumn ?? 'total_utility';
  const aggregation = spec.aggregation ?? 'mean_stderr';
  const series = buildSeries(table, yColumn, aggregation);
  const geometry = renderChartSvg(series, {
    xLabel: axis,
    yLabel: yColumn,
    logX: axis === 'v',
    width: spec.width ?? 720,
    height: spec.height ?? 480,
  });
  const svgPath = `${spec.outputBase}.svg`;
  const pngPath = `${spec.outputBase}.png`;
  writeFileSync(svgPath, geometry.svg);
  const png = new Resvg(geometry.svg, {}).render().asPng();
  writeFileSync(pngPath, png);
  return { svgPath, pngPath, series, geometry };
}
