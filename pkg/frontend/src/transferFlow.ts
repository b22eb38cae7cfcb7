/** Transfer flow graph: one node per site, one arrow per non-zero lane.
 *
 * Arrow thickness scales with the lane's cumulative quantity and every
 * arrow is labeled with its total plus the weekly breakdown (W33: 255, ...).
 * Sites sit on a circle in sorted order so layouts are stable across runs.
 */

import type { LanePayload, TransfersPayload } from "./api.js";

export interface FlowNode {
  id: string;
  x: number;
  y: number;
}

export interface FlowArrow {
  src: string;
  dst: string;
  total: number;
  weekly: Record<string, number>;
  width: number;
  label: string;
}

export interface FlowView {
  nodes: FlowNode[];
  arrows: FlowArrow[];
  size: number;
}

const MIN_WIDTH = 1.5;
const MAX_WIDTH = 9;

export function laneLabel(lane: LanePayload): string {
  const weeks = Object.keys(lane.weekly).sort((a, b) => Number(a) - Number(b));
  const parts = weeks.map((w) => `W${w}: ${lane.weekly[w]}`);
  return `${lane.total} (${parts.join(", ")})`;
}

export function transferFlowView(
  sites: string[],
  payload: TransfersPayload,
  size = 480,
): FlowView {
  const ordered = [...sites].sort();
  const cx = size / 2;
  const radius = size / 2 - 60;
  const nodes = ordered.map((id, k) => {
    const angle = (2 * Math.PI * k) / ordered.length - Math.PI / 2;
    return {
      id,
      x: Math.round(cx + radius * Math.cos(angle)),
      y: Math.round(cx + radius * Math.sin(angle)),
    };
  });

  const lanes = payload.lanes.filter((lane) => lane.total > 0);
  const maxTotal = lanes.reduce((m, lane) => Math.max(m, lane.total), 0);
  const arrows = lanes.map((lane) => ({
    src: lane.src,
    dst: lane.dst,
    total: lane.total,
    weekly: { ...lane.weekly },
    width: maxTotal > 0
      ? MIN_WIDTH + (MAX_WIDTH - MIN_WIDTH) * (lane.total / maxTotal)
      : MIN_WIDTH,
    label: laneLabel(lane),
  }));
  return { nodes, arrows, size };
}

export function flowSvg(view: FlowView): string {
  const byId = new Map(view.nodes.map((n) => [n.id, n]));
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${view.size} ${view.size}">`,
    `<defs><marker id="arrowhead" markerWidth="8" markerHeight="6" refX="8" refY="3" orient="auto">` +
      `<polygon points="0 0, 8 3, 0 6" fill="#2e7d32"/></marker></defs>`,
  ];
  for (const arrow of view.arrows) {
    const a = byId.get(arrow.src);
    const b = byId.get(arrow.dst);
    if (!a || !b) continue;
    const midX = (a.x + b.x) / 2;
    const midY = (a.y + b.y) / 2;
    parts.push(
      `<line class="lane" x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" ` +
        `stroke="#2e7d32" stroke-width="${arrow.width.toFixed(2)}" ` +
        `marker-end="url(#arrowhead)"/>`,
      `<text class="lane-label" x="${midX}" y="${midY - 6}" font-size="11" ` +
        `fill="#7a5c00" text-anchor="middle">${arrow.label}</text>`,
    );
  }
  for (const node of view.nodes) {
    parts.push(
      `<circle cx="${node.x}" cy="${node.y}" r="26" fill="#1565c0"/>`,
      `<text x="${node.x}" y="${node.y + 4}" font-size="13" fill="#fff" ` +
        `text-anchor="middle">${node.id}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n");
}
