/**
 * Pie model for attainment distributions: the one place the client computes
 * numbers (segment percents). Counts and band order come from the API
 * untouched.
 *
 * Percents are count/total*100 rounded to 1 decimal; independent rounding
 * can drift the sum by up to 0.05 per segment, so a largest-remainder pass
 * nudges the segments with the biggest remainders until the legend sums to
 * exactly 100.0 (each percent stays within 0.1 of the exact value).
 */

import { DistributionDoc } from "./api.js";

export interface PieSegment {
  label: string;
  count: number;
  /** percent of total at 1 decimal; legend value */
  percent: number;
  /** index into the band order; stable color assignment */
  colorIndex: number;
}

export interface PieModel {
  segments: PieSegment[]; // band-scheme order, zero counts retained (legend)
  drawn: PieSegment[]; // zero-count bands omitted (chart)
  total: number;
  empty: boolean;
}

const SCALE = 10; // tenths of a percent

export function buildPieModel(distribution: DistributionDoc): PieModel {
  const bands = distribution.bands;
  const total = distribution.total;
  if (total === 0) {
    return {
      segments: bands.map((band, index) => ({
        label: band.label,
        count: 0,
        percent: 0.0,
        colorIndex: index,
      })),
      drawn: [],
      total: 0,
      empty: true,
    };
  }

  // exact tenths plus remainder, then round half-up per segment
  const exactTenths = bands.map((band) => (band.count * 100 * SCALE) / total);
  const rounded = exactTenths.map((tenths) => Math.round(tenths));
  let drift = rounded.reduce((sum, tenths) => sum + tenths, 0) - 100 * SCALE;

  // largest-remainder correction: walk segments by descending distance from
  // their exact value, stepping one tenth at a time; zero counts never move
  const order = bands
    .map((band, index) => ({ index, count: band.count }))
    .filter((entry) => entry.count > 0)
    .sort((a, b) => {
      const ra = Math.abs((rounded[a.index] ?? 0) - (exactTenths[a.index] ?? 0));
      const rb = Math.abs((rounded[b.index] ?? 0) - (exactTenths[b.index] ?? 0));
      return rb - ra || a.index - b.index;
    });
  for (let cursor = 0; drift !== 0 && order.length > 0; cursor = (cursor + 1) % order.length) {
    const slot = order[cursor];
    if (slot === undefined) break;
    const at = slot.index;
    const step = drift > 0 ? -1 : 1;
    const next = (rounded[at] ?? 0) + step;
    if (next < 0) continue;
    rounded[at] = next;
    drift += step;
  }

  const segments = bands.map((band, index) => ({
    label: band.label,
    count: band.count,
    percent: (rounded[index] ?? 0) / SCALE,
    colorIndex: index,
  }));
  return {
    segments,
    drawn: segments.filter((segment) => segment.count > 0),
    total,
    empty: false,
  };
}

export const PIE_COLORS = ["#2f7d32", "#4c9add", "#e0a72f", "#c2503c",
  "#7e57c2", "#5d6d7e"];

/** SVG pie markup; zero-count bands appear only in the legend. */
export function renderPieSvg(model: PieModel, size = 220): string {
  if (model.empty) {
    return `<div class="pie-empty" role="status">no data</div>`;
  }
  const radius = size / 2;
  const center = radius;
  let angle = -Math.PI / 2;
  const paths: string[] = [];
  for (const segment of model.drawn) {
    const sweep = (segment.count / model.total) * Math.PI * 2;
    const color = PIE_COLORS[segment.colorIndex % PIE_COLORS.length];
    if (model.drawn.length === 1) {
      paths.push(`<circle cx="${center}" cy="${center}" r="${radius}" fill="${color}"><title>${segment.label}</title></circle>`);
      break;
    }
    const x1 = center + radius * Math.cos(angle);
    const y1 = center + radius * Math.sin(angle);
    angle += sweep;
    const x2 = center + radius * Math.cos(angle);
    const y2 = center + radius * Math.sin(angle);
    const large = sweep > Math.PI ? 1 : 0;
    paths.push(
      `<path d="M${center},${center} L${x1.toFixed(3)},${y1.toFixed(3)} ` +
        `A${radius},${radius} 0 ${large} 1 ${x2.toFixed(3)},${y2.toFixed(3)} Z" ` +
        `fill="${color}"><title>${segment.label}: ${segment.count}</title></path>`,
    );
  }
  return `<svg viewBox="0 0 ${size} ${size}" width="${size}" height="${size}" role="img">${paths.join("")}</svg>`;
}

export function renderPieLegend(model: PieModel): string {
  const rows = model.segments
    .map((segment) => {
      const color = PIE_COLORS[segment.colorIndex % PIE_COLORS.length];
      return (
        `<li class="legend-row"><span class="swatch" style="background:${color}"></span>` +
        `${segment.label}: ${segment.count} (${segment.percent.toFixed(1)}%)</li>`
      );
    })
    .join("");
  return `<ul class="pie-legend">${rows}</ul>`;
}
