// Two-panel figure renderer: optimal objective on the left, benefit of the
// trade on the right, one polyline per dependence regime.
//
// Output is a pure function of (data, panel): fixed canvas, no timestamps,
// coordinates rounded to a fixed number of decimals.  Rendering the same
// CSV twice must produce byte-identical SVG.

import { FigureData, FigureRow } from "./csv.js";
import { Extent, extentOf, formatTick, linearScale, polylinePoints, ticks } from "./chart.js";

export type Panel = "objective" | "benefit" | "both";

export const PANEL_CHOICES: Panel[] = ["objective", "benefit", "both"];

const PANEL_W = 440;
const PANEL_H = 330;
const PANEL_GAP = 28;
const PAD = 12;
const LEGEND_H = 30;

const PLOT = { left: 58, right: PANEL_W - 14, top: 30, bottom: PANEL_H - 44 };

const REGIME_COLORS: Record<string, string> = {
  WorstCase: "#c44e52",
  Comonotonic: "#dd8452",
  IID: "#4c72b0",
};
const EXTRA_COLORS = ["#55a868", "#8172b3", "#937860", "#64b5cd"];

const PANEL_TITLES: Record<Exclude<Panel, "both">, string> = {
  objective: "Optimal objective",
  benefit: "Benefit of reinsurance",
};

function colorFor(regime: string, index: number): string {
  return REGIME_COLORS[regime] ?? EXTRA_COLORS[index % EXTRA_COLORS.length]!;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function pad(extent: Extent): Extent {
  const span = extent.max - extent.min;
  return { min: extent.min - 0.04 * span, max: extent.max + 0.04 * span };
}

function seriesOf(data: FigureData, regime: string): FigureRow[] {
  return data.rows
    .filter((row) => row.regime === regime)
    .sort((a, b) => a.sweep - b.sweep);
}

function renderPanel(
  data: FigureData,
  metric: Exclude<Panel, "both">,
  xOffset: number,
): string {
  const rows = data.rows;
  const x = linearScale(pad(extentOf(rows.map((r) => r.sweep))), PLOT.left, PLOT.right);
  const y = linearScale(pad(extentOf(rows.map((r) => r[metric]))), PLOT.bottom, PLOT.top);

  const parts: string[] = [];
  parts.push(`<g class="panel" data-metric="${metric}" transform="translate(${xOffset},0)">`);
  parts.push(
    `<text x="${PLOT.left}" y="18" font-size="13" font-weight="bold" fill="#222">` +
      `${PANEL_TITLES[metric]}</text>`,
  );

  for (const tick of ticks(y.domain, 5)) {
    const ty = y(tick).toFixed(2);
    parts.push(
      `<line class="grid" x1="${PLOT.left}" y1="${ty}" x2="${PLOT.right}" y2="${ty}" ` +
        `stroke="#e3e3e3" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${PLOT.left - 6}" y="${ty}" font-size="11" fill="#444" ` +
        `text-anchor="end" dominant-baseline="middle">${formatTick(tick)}</text>`,
    );
  }
  for (const tick of ticks(x.domain, 6)) {
    const tx = x(tick).toFixed(2);
    parts.push(
      `<line x1="${tx}" y1="${PLOT.bottom}" x2="${tx}" y2="${PLOT.bottom + 4}" ` +
        `stroke="#333" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${tx}" y="${PLOT.bottom + 16}" font-size="11" fill="#444" ` +
        `text-anchor="middle">${formatTick(tick)}</text>`,
    );
  }

  parts.push(
    `<rect x="${PLOT.left}" y="${PLOT.top}" width="${PLOT.right - PLOT.left}" ` +
      `height="${PLOT.bottom - PLOT.top}" fill="none" stroke="#333" stroke-width="1"/>`,
  );
  parts.push(
    `<text x="${(PLOT.left + PLOT.right) / 2}" y="${PANEL_H - 8}" font-size="12" ` +
      `fill="#222" text-anchor="middle">level</text>`,
  );

  data.regimes.forEach((regime, i) => {
    const series = seriesOf(data, regime);
    if (series.length === 0) {
      return;
    }
    const points = polylinePoints(
      series.map((r) => x(r.sweep)),
      series.map((r) => y(r[metric])),
    );
    parts.push(
      `<polyline class="series" data-regime="${escapeXml(regime)}" points="${points}" ` +
        `fill="none" stroke="${colorFor(regime, i)}" stroke-width="1.8"/>`,
    );
  });

  parts.push("</g>");
  return parts.join("\n");
}

function renderLegend(data: FigureData, width: number): string {
  if (data.regimes.length === 0) {
    return "";
  }
  const itemWidth = 120;
  const total = data.regimes.length * itemWidth;
  const start = Math.max(PAD, (width - total) / 2);
  const parts: string[] = [`<g class="legend" transform="translate(${start},${PAD})">`];
  data.regimes.forEach((regime, i) => {
    const x0 = i * itemWidth;
    parts.push(
      `<line x1="${x0}" y1="8" x2="${x0 + 22}" y2="8" ` +
        `stroke="${colorFor(regime, i)}" stroke-width="2.5"/>`,
    );
    parts.push(
      `<text x="${x0 + 28}" y="12" font-size="12" fill="#222">${escapeXml(regime)}</text>`,
    );
  });
  parts.push("</g>");
  return parts.join("\n");
}

export function renderFigure(data: FigureData, panel: Panel): string {
  const metrics: Exclude<Panel, "both">[] =
    panel === "both" ? ["objective", "benefit"] : [panel];
  const width = 2 * PAD + metrics.length * PANEL_W + (metrics.length - 1) * PANEL_GAP;
  const height = PAD + LEGEND_H + PANEL_H + PAD;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif">`,
  );
  parts.push(`<rect x="0" y="0" width="${width}" height="${height}" fill="#ffffff"/>`);
  parts.push(renderLegend(data, width));
  metrics.forEach((metric, i) => {
    parts.push(`<g transform="translate(0,${PAD + LEGEND_H})">`);
    parts.push(renderPanel(data, metric, PAD + i * (PANEL_W + PANEL_GAP)));
    parts.push("</g>");
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
