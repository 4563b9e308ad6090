import type { ProjectedPoint } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export interface ScreenTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Fit the chart bounding box into the viewport, preserving aspect. */
export function fitTransform(points: ProjectedPoint[], view: Viewport): ScreenTransform {
  if (points.length === 0) return { scale: 1, offsetX: view.width / 2, offsetY: view.height / 2 };
  let minU = Infinity, maxU = -Infinity, minV = Infinity, maxV = -Infinity;
  for (const p of points) {
    if (p.u < minU) minU = p.u;
    if (p.u > maxU) maxU = p.u;
    if (p.v < minV) minV = p.v;
    if (p.v > maxV) maxV = p.v;
  }
  const spanU = Math.max(maxU - minU, 1e-9);
  const spanV = Math.max(maxV - minV, 1e-9);
  const usableW = view.width - 2 * view.margin;
  const usableH = view.height - 2 * view.margin;
  const scale = Math.min(usableW / spanU, usableH / spanV);
  // v grows upward in chart space, downward on canvas: flip via offset
  return {
    scale,
    offsetX: view.margin + (usableW - spanU * scale) / 2 - minU * scale,
    offsetY: view.height - view.margin - (usableH - spanV * scale) / 2 + minV * scale,
  };
}

export function toScreen(p: { u: number; v: number }, t: ScreenTransform): { x: number; y: number } {
  return { x: p.u * t.scale + t.offsetX, y: t.offsetY - p.v * t.scale };
}

/** Id of the closest point within `radius` css px of (x, y), or null. */
export function hitTest(
  points: ProjectedPoint[], t: ScreenTransform, x: number, y: number, radius = 8,
): string | null {
  let best: string | null = null;
  let bestD2 = radius * radius;
  for (const p of points) {
    const s = toScreen(p, t);
    const d2 = (s.x - x) ** 2 + (s.y - y) ** 2;
    if (d2 <= bestD2) {
      bestD2 = d2;
      best = p.id;
    }
  }
  return best;
}

/** Ids of all points inside a screen-space rectangle (any corner order). */
export function rectSelect(
  points: ProjectedPoint[], t: ScreenTransform,
  x0: number, y0: number, x1: number, y1: number,
): string[] {
  const [left, right] = x0 < x1 ? [x0, x1] : [x1, x0];
  const [top, bottom] = y0 < y1 ? [y0, y1] : [y1, y0];
  const out: string[] = [];
  for (const p of points) {
    const s = toScreen(p, t);
    if (s.x >= left && s.x <= right && s.y >= top && s.y <= bottom) out.push(p.id);
  }
  return out;
}
