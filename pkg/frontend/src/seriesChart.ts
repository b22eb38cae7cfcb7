/** Demand-supply chart view: four series per site, with red background
 * shading on any week where either inventory path is negative.  The UI does
 * no KPI math: every number plotted comes straight off the API payload.
 */

import type { SeriesPayload } from "./api.js";

export interface SeriesChartView {
  site: string;
  weeks: Array<number | string>;
  demand: number[];
  receipts: number[];
  inventory: number[];
  simInv: number[];
  shadedWeeks: Array<number | string>;
}

export function seriesChartView(payload: SeriesPayload): SeriesChartView {
  const shaded = payload.weeks.filter(
    (_, t) => payload.inventory[t] < 0 || payload.sim_inv[t] < 0,
  );
  return {
    site: payload.site,
    weeks: [...payload.weeks],
    demand: [...payload.demand],
    receipts: [...payload.receipts],
    inventory: [...payload.inventory],
    simInv: [...payload.sim_inv],
    shadedWeeks: shaded,
  };
}

const WIDTH = 640;
const HEIGHT = 320;
const PAD = 40;

const SERIES_COLORS: Array<[keyof SeriesChartView, string]> = [
  ["demand", "#c62828"],     // red
  ["receipts", "#2e7d32"],   // green
  ["inventory", "#1565c0"],  // blue
  ["simInv", "#ef6c00"],     // orange
];

export function seriesSvg(view: SeriesChartView): string {
  const all = [...view.demand, ...view.receipts, ...view.inventory,
               ...view.simInv, 0];
  const lo = Math.min(...all);
  const hi = Math.max(...all);
  const span = hi - lo || 1;
  const n = view.weeks.length;
  const xAt = (t: number) =>
    PAD + (n > 1 ? (t * (WIDTH - 2 * PAD)) / (n - 1) : 0);
  const yAt = (v: number) => HEIGHT - PAD - ((v - lo) / span) * (HEIGHT - 2 * PAD);

  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  ];
  const slot = n > 1 ? (WIDTH - 2 * PAD) / (n - 1) : WIDTH - 2 * PAD;
  view.weeks.forEach((week, t) => {
    if (view.shadedWeeks.includes(week)) {
      parts.push(
        `<rect class="stockout-shading" x="${(xAt(t) - slot / 2).toFixed(1)}" ` +
          `y="${PAD}" width="${slot.toFixed(1)}" height="${HEIGHT - 2 * PAD}" ` +
          `fill="rgba(220, 40, 40, 0.15)"/>`,
      );
    }
  });
  parts.push(
    `<line x1="${PAD}" y1="${yAt(0)}" x2="${WIDTH - PAD}" y2="${yAt(0)}" ` +
      `stroke="#999" stroke-dasharray="4 3"/>`,
  );
  for (const [key, color] of SERIES_COLORS) {
    const values = view[key] as number[];
    const points = values
      .map((v, t) => `${xAt(t).toFixed(1)},${yAt(v).toFixed(1)}`)
      .join(" ");
    parts.push(
      `<polyline class="series-${key}" fill="none" stroke="${color}" ` +
        `stroke-width="2" points="${points}"/>`,
    );
  }
  view.weeks.forEach((week, t) => {
    parts.push(
      `<text x="${xAt(t).toFixed(1)}" y="${HEIGHT - PAD + 16}" font-size="10" ` +
        `text-anchor="middle">${week}</text>`,
    );
  });
  parts.push(`<text x="${PAD}" y="18" font-size="13">${view.site}</text>`);
  parts.push("</svg>");
  return parts.join("\n");
}
