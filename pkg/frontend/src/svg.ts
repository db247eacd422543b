/**
 * Minimal deterministic SVG line charts: a bold median line per series with
 * a translucent quartile band, shared axes, ticks and a legend.  Output is a
 * pure function of the input numbers (fixed canvas, fixed palette, fixed
 * number formatting), so regenerating a chart yields identical bytes.
 */

import { BandSeries } from "./series.js";

export interface ChartSeries {
  label: string;
  band: BandSeries;
}

const WIDTH = 720;
const HEIGHT = 440;
const MARGIN = { left: 64, right: 16, top: 40, bottom: 44 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
];

function fmt(x: number): string {
  return x.toFixed(2);
}

function tickLabel(x: number): string {
  if (x !== 0 && (Math.abs(x) >= 10000 || Math.abs(x) < 0.01)) {
    return x.toExponential(1);
  }
  const rounded = Math.round(x * 1000) / 1000;
  return String(rounded);
}

/** Round a span to a 1/2/5 ladder step, for readable axis ticks. */
function niceStep(span: number, target: number): number {
  const raw = span / target;
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (m * power >= raw) return m * power;
  }
  return 10 * power;
}

function ticks(lo: number, hi: number, target = 5): number[] {
  if (lo === hi) {
    hi = lo + 1;
    lo = lo - 1;
  }
  const step = niceStep(hi - lo, target);
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    out.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return out;
}

export function renderChart(
  title: string,
  xLabel: string,
  yLabel: string,
  series: ChartSeries[]
): string {
  if (series.length === 0) throw new Error("chart needs at least one series");
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const s of series) {
    for (const x of s.band.iters) {
      xMin = Math.min(xMin, x);
      xMax = Math.max(xMax, x);
    }
    for (const v of [...s.band.q1, ...s.band.q3, ...s.band.median]) {
      yMin = Math.min(yMin, v);
      yMax = Math.max(yMax, v);
    }
  }
  if (xMin === xMax) {
    xMin -= 1;
    xMax += 1;
  }
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }
  const pad = (yMax - yMin) * 0.05;
  yMin -= pad;
  yMax += pad;

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number) => MARGIN.left + ((x - xMin) / (xMax - xMin)) * plotW;
  const sy = (y: number) => MARGIN.top + (1 - (y - yMin) / (yMax - yMin)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica,Arial,sans-serif">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${fmt(WIDTH / 2)}" y="22" text-anchor="middle" font-size="15">${title}</text>`
  );

  // axes and grid
  for (const t of ticks(xMin, xMax)) {
    const x = fmt(sx(t));
    parts.push(
      `<line x1="${x}" y1="${fmt(MARGIN.top)}" x2="${x}" y2="${fmt(
        HEIGHT - MARGIN.bottom
      )}" stroke="#dddddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${x}" y="${fmt(HEIGHT - MARGIN.bottom + 18)}" text-anchor="middle" ` +
        `font-size="11">${tickLabel(t)}</text>`
    );
  }
  for (const t of ticks(yMin, yMax)) {
    const y = fmt(sy(t));
    parts.push(
      `<line x1="${fmt(MARGIN.left)}" y1="${y}" x2="${fmt(
        WIDTH - MARGIN.right
      )}" y2="${y}" stroke="#dddddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${fmt(MARGIN.left - 6)}" y="${y}" text-anchor="end" ` +
        `dominant-baseline="middle" font-size="11">${tickLabel(t)}</text>`
    );
  }
  parts.push(
    `<rect x="${fmt(MARGIN.left)}" y="${fmt(MARGIN.top)}" width="${fmt(plotW)}" ` +
      `height="${fmt(plotH)}" fill="none" stroke="#333333" stroke-width="1"/>`
  );
  parts.push(
    `<text x="${fmt(MARGIN.left + plotW / 2)}" y="${fmt(
      HEIGHT - 8
    )}" text-anchor="middle" font-size="12">${xLabel}</text>`
  );
  parts.push(
    `<text x="16" y="${fmt(MARGIN.top + plotH / 2)}" text-anchor="middle" ` +
      `font-size="12" transform="rotate(-90 16 ${fmt(MARGIN.top + plotH / 2)})">${yLabel}</text>`
  );

  // bands then lines, so every median stays visible
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const upper = s.band.iters.map((x, j) => `${fmt(sx(x))},${fmt(sy(s.band.q3[j]))}`);
    const lower = [...s.band.iters.keys()]
      .reverse()
      .map((j) => `${fmt(sx(s.band.iters[j]))},${fmt(sy(s.band.q1[j]))}`);
    parts.push(
      `<polygon points="${[...upper, ...lower].join(" ")}" fill="${color}" ` +
        `fill-opacity="0.18" stroke="none"/>`
    );
  });
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const points = s.band.iters
      .map((x, j) => `${fmt(sx(x))},${fmt(sy(s.band.median[j]))}`)
      .join(" ");
    parts.push(
      `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="2.5"/>`
    );
  });

  // legend
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = MARGIN.top + 14 + i * 16;
    const x = WIDTH - MARGIN.right - 150;
    parts.push(
      `<line x1="${fmt(x)}" y1="${fmt(y - 4)}" x2="${fmt(x + 22)}" y2="${fmt(
        y - 4
      )}" stroke="${color}" stroke-width="2.5"/>`
    );
    parts.push(`<text x="${fmt(x + 28)}" y="${fmt(y)}" font-size="11">${s.label}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
