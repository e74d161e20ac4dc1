/** Line-chart SVG builder.  The aggregated series are embedded verbatim in a
 * <metadata> element so downstream checks can recover the plotted data
 * without touching pixels. */
import type { Series } from './aggregate.js';
import { linearScale, logScale, type Scale } from './scale.js';

export interface ChartOptions {
  width: number;
  height: number;
  xLabel: string;
  yLabel: string;
  logX: boolean;
  markerRadius: number;
}

export const DEFAULT_OPTIONS: ChartOptions = {
  width: 720,
  height: 480,
  xLabel: 'x',
  yLabel: 'y',
  logX: false,
  markerRadius: 4,
};

const COLORS = ['#1f6fb4', '#d95f02', '#1b9e77', '#7570b3', '#e7298a'];
const MARGIN = { left: 72, right: 24, top: 28, bottom: 56 };

function esc(s: string): string {
  return s.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export interface ChartGeometry {
  svg: string;
  /** pixel position of every plotted point, per series (for layout checks) */
  pixelPoints: { strategy: string; px: number; py: number }[];
}

export function renderChartSvg(
  series: Series[],
  options: Partial<ChartOptions> = {},
): ChartGeometry {
  const opt = { ...DEFAULT_OPTIONS, ...options };
  if (series.length === 0) throw new Error('nothing to plot');
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  const ysLo = series.flatMap((s) => s.points.map((p) => p.y - p.stderr));
  const ysHi = series.flatMap((s) => s.points.map((p) => p.y + p.stderr));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ysLo);
  let yMax = Math.max(...ysHi);
  const pad = (yMax - yMin || Math.abs(yMax) || 1) * 0.06;
  yMin -= pad;
  yMax += pad;

  const plotL = MARGIN.left;
  const plotR = opt.width - MARGIN.right;
  const plotT = MARGIN.top;
  const plotB = opt.height - MARGIN.bottom;

  const xScale: Scale = opt.logX
    ? logScale(xMin, xMax, plotL, plotR)
    : linearScale(xMin, xMax, plotL, plotR);
  const yScale = linearScale(yMin, yMax, plotB, plotT);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${opt.width}" ` +
      `height="${opt.height}" viewBox="0 0 ${opt.width} ${opt.height}">`,
  );
  parts.push(
    `<metadata id="series-data">${esc(JSON.stringify(series))}</metadata>`,
  );
  parts.push(
    `<rect width="${opt.width}" height="${opt.height}" fill="white"/>`,
  );

  // grid and ticks
  const tickStyle = 'font-family="DejaVu Sans, Helvetica, sans-serif" font-size="12" fill="#333"';
  for (const t of xScale.ticks()) {
    const px = xScale.toPixel(t.value);
    if (px < plotL - 0.5 || px > plotR + 0.5) continue;
    parts.push(
      `<line x1="${px.toFixed(2)}" y1="${plotT}" x2="${px.toFixed(2)}" ` +
        `y2="${plotB}" stroke="#ddd" stroke-width="1"/>`,
      `<text x="${px.toFixed(2)}" y="${plotB + 18}" text-anchor="middle" ` +
        `${tickStyle}>${esc(t.label)}</text>`,
    );
  }
  for (const t of yScale.ticks()) {
    const py = yScale.toPixel(t.value);
    if (py < plotT - 0.5 || py > plotB + 0.5) continue;
    parts.push(
      `<line x1="${plotL}" y1="${py.toFixed(2)}" x2="${plotR}" ` +
        `y2="${py.toFixed(2)}" stroke="#ddd" stroke-width="1"/>`,
      `<text x="${plotL - 8}" y="${(py + 4).toFixed(2)}" text-anchor="end" ` +
        `${tickStyle}>${esc(t.label)}</text>`,
    );
  }
  parts.push(
    `<rect x="${plotL}" y="${plotT}" width="${plotR - plotL}" ` +
      `height="${plotB - plotT}" fill="none" stroke="#333" stroke-width="1"/>`,
  );

  // series
  const pixelPoints: ChartGeometry['pixelPoints'] = [];
  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const pts = s.points.map((p) => ({
      px: xScale.toPixel(p.x),
      py: yScale.toPixel(p.y),
      p,
    }));
    if (pts.length > 1) {
      const d = pts
        .map((q, j) => `${j ? 'L' : 'M'}${q.px.toFixed(2)},${q.py.toFixed(2)}`)
        .join(' ');
      parts.push(
        `<path d="${d}" fill="none" stroke="${color}" stroke-width="2"/>`,
      );
    }
    for (const q of pts) {
      if (q.p.stderr > 0) {
        const yLo = yScale.toPixel(q.p.y - q.p.stderr);
        const yHi = yScale.toPixel(q.p.y + q.p.stderr);
        parts.push(
          `<line x1="${q.px.toFixed(2)}" y1="${yLo.toFixed(2)}" ` +
            `x2="${q.px.toFixed(2)}" y2="${yHi.toFixed(2)}" ` +
            `stroke="${color}" stroke-width="1.5"/>`,
          `<line x1="${(q.px - 4).toFixed(2)}" y1="${yLo.toFixed(2)}" ` +
            `x2="${(q.px + 4).toFixed(2)}" y2="${yLo.toFixed(2)}" ` +
            `stroke="${color}" stroke-width="1.5"/>`,
          `<line x1="${(q.px - 4).toFixed(2)}" y1="${yHi.toFixed(2)}" ` +
            `x2="${(q.px + 4).toFixed(2)}" y2="${yHi.toFixed(2)}" ` +
            `stroke="${color}" stroke-width="1.5"/>`,
        );
      }
      parts.push(
        `<circle cx="${q.px.toFixed(2)}" cy="${q.py.toFixed(2)}" ` +
          `r="${opt.markerRadius}" fill="${color}"/>`,
      );
      pixelPoints.push({ strategy: s.strategy, px: q.px, py: q.py });
    }
  });

  // legend
  series.forEach((s, i) => {
    const color = COLORS[i % COLORS.length];
    const lx = plotL + 14;
    const ly = plotT + 18 + i * 20;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 26}" y2="${ly - 4}" ` +
        `stroke="${color}" stroke-width="2"/>`,
      `<circle cx="${lx + 13}" cy="${ly - 4}" r="${opt.markerRadius}" fill="${color}"/>`,
      `<text x="${lx + 32}" y="${ly}" ${tickStyle}>${esc(s.strategy)}</text>`,
    );
  });

  // axis labels
  parts.push(
    `<text x="${(plotL + plotR) / 2}" y="${opt.height - 12}" ` +
      `text-anchor="middle" ${tickStyle}>${esc(opt.xLabel)}</text>`,
    `<text x="18" y="${(plotT + plotB) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${(plotT + plotB) / 2})" ${tickStyle}>` +
      `${esc(opt.yLabel)}</text>`,
  );
  parts.push('</svg>');
  return { svg: parts.join('\n'), pixelPoints };
}

/** Recover the series JSON embedded by renderChartSvg. */
export function extractEmbeddedSeries(svg: string): Series[] {
  const match = svg.match(/<metadata id="series-data">([\s\S]*?)<\/metadata>/);
  if (!match) throw new Error('no embedded series data found');
  const json = match[1]
    .replace(/&lt;/g, '<')
    .replace(/&gt;/g, '>')
    .replace(/&amp;/g, '&');
  return JSON.parse(json) as Series[];
}
