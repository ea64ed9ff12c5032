/** Cactus plot: per tool, sorted solved-run times against solved count. */

import { CactusRow } from "./csv.js";

export interface CactusSeries {
  tool: string;
  /** Seconds at rank 1..n, nondecreasing. */
  times: number[];
}

/** Group rows into one series per tool, in first-appearance order. */
export function buildSeries(rows: CactusRow[]): CactusSeries[] {
  const byTool = new Map<string, number[]>();
  for (const row of rows) {
    let times = byTool.get(row.tool);
    if (times === undefined) {
      times = [];
      byTool.set(row.tool, times);
    }
    times.push(row.time);
  }
  return [...byTool.entries()].map(([tool, times]) => ({ tool, times }));
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 20, right: 16, bottom: 44, left: 60 };
const PALETTE = [
  "#4361ee",
  "#d62828",
  "#2d6a4f",
  "#f77f00",
  "#7209b7",
  "#0096c7",
  "#9d4edd",
  "#660708",
];

/** Largest 1/2/5 * 10^k step that fits about five ticks into the span. */
function tickStep(span: number): number {
  const raw = span / 5;
  const power = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5]) {
    if (m * power >= raw) return m * power;
  }
  return 10 * power;
}

function ticks(max: number): number[] {
  if (max <= 0) return [0, 1];
  const step = tickStep(max);
  const out = [];
  for (let v = 0; v <= max + step / 2; v += step) out.push(v);
  return out;
}

function fmt(v: number): string {
  return Number.isInteger(v) ? String(v) : String(Math.round(v * 100) / 100);
}

/** Build the SVG text for the given series; pure in its input. */
export function renderCactus(series: CactusSeries[]): string {
  const allTimes = series.flatMap((s) => s.times);
  const maxRank = Math.max(1, ...series.map((s) => s.times.length));
  const maxTime = Math.max(1, ...allTimes);
  const xTicks = ticks(maxRank).filter(Number.isInteger);
  const yTicks = ticks(maxTime);
  const xMax = Math.max(maxRank, xTicks[xTicks.length - 1]);
  const yMax = Math.max(maxTime, yTicks[yTicks.length - 1]);

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (rank: number) => MARGIN.left + (rank / xMax) * plotW;
  const sy = (time: number) => MARGIN.top + plotH - (time / yMax) * plotH;
  const px = (v: number) => v.toFixed(2);

  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
  ];

  for (const v of xTicks) {
    const x = px(sx(v));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#e5e5e5"/>`,
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle">${fmt(v)}</text>`,
    );
  }
  for (const v of yTicks) {
    const y = px(sy(v));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#e5e5e5"/>`,
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle">${fmt(v)}</text>`,
    );
  }

  const axisBottom = px(MARGIN.top + plotH);
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisBottom}" stroke="black"/>`,
    `<line x1="${MARGIN.left}" y1="${axisBottom}" x2="${MARGIN.left + plotW}" y2="${axisBottom}" stroke="black"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 8}" text-anchor="middle">solved instances</text>`,
    `<text x="14" y="${MARGIN.top + plotH / 2}" text-anchor="middle" transform="rotate(-90 14 ${MARGIN.top + plotH / 2})">seconds</text>`,
  );

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const points = s.times
      .map((t, k) => `${px(sx(k + 1))},${px(sy(t))}`)
      .join(" ");
    if (points !== "") {
      parts.push(
        `<polyline points="${points}" fill="none" stroke="${color}" stroke-width="1.6"/>`,
      );
      for (const [k, t] of s.times.entries()) {
        parts.push(
          `<circle cx="${px(sx(k + 1))}" cy="${px(sy(t))}" r="2.5" fill="${color}"/>`,
        );
      }
    }
    const ly = MARGIN.top + 10 + i * 16;
    parts.push(
      `<line x1="${MARGIN.left + 10}" y1="${ly}" x2="${MARGIN.left + 34}" y2="${ly}" stroke="${color}" stroke-width="1.6"/>`,
      `<text x="${MARGIN.left + 40}" y="${ly + 4}">${escapeXml(s.tool)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
