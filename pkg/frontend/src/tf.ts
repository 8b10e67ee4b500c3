/**
 * Transfer-function editor model: a sorted list of control points on
 * the importance axis. Invalid edits are rejected before anything is
 * sent to the server.
 */
import type { TransferPoint } from "./protocol.js";
import { clamp } from "./camera.js";

export const DEFAULT_POINTS: TransferPoint[] = [
  { x: 0, rgb: [0, 0, 1], alpha: 0 },
  { x: 1, rgb: [1, 0, 0], alpha: 1 },
];

export function validate(points: TransferPoint[]): string | null {
  if (points.length < 2) return "need at least 2 control points";
  for (let i = 0; i < points.length; i++) {
    const p = points[i];
    if (p.x < 0 || p.x > 1) return `point ${i}: x out of [0, 1]`;
    if (p.alpha < 0 || p.alpha > 1) return `point ${i}: alpha out of [0, 1]`;
    if (p.rgb.some((c) => c < 0 || c > 1)) return `point ${i}: rgb out of [0, 1]`;
    if (i > 0 && p.x < points[i - 1].x) return `point ${i}: x not sorted`;
  }
  return null;
}

/** Move one control point; the edit is clamped between its neighbors. */
export function movePoint(
  points: TransferPoint[],
  index: number,
  x: number,
  alpha: number,
): TransferPoint[] {
  if (index < 0 || index >= points.length) return points;
  const lo = index === 0 ? 0 : points[index - 1].x;
  const hi = index === points.length - 1 ? 1 : points[index + 1].x;
  const next = points.map((p, i) =>
    i === index ? { ...p, x: clamp(x, lo, hi), alpha: clamp(alpha, 0, 1) } : p,
  );
  return next;
}

/** Insert a new point at x, linearly interpolating color and alpha. */
export function addPoint(points: TransferPoint[], x: number): TransferPoint[] {
  const cx = clamp(x, 0, 1);
  let k = points.findIndex((p) => p.x > cx);
  if (k < 0) k = points.length - 1;
  if (k === 0) k = 1;
  const a = points[k - 1];
  const b = points[k];
  const span = b.x - a.x;
  const u = span === 0 ? 0 : (cx - a.x) / span;
  const lerp = (p: number, q: number) => p * (1 - u) + q * u;
  const inserted: TransferPoint = {
    x: cx,
    rgb: [lerp(a.rgb[0], b.rgb[0]), lerp(a.rgb[1], b.rgb[1]), lerp(a.rgb[2], b.rgb[2])],
    alpha: lerp(a.alpha, b.alpha),
  };
  return [...points.slice(0, k), inserted, ...points.slice(k)];
}

/** Remove a point; interior only, the endpoints always stay. */
export function removePoint(points: TransferPoint[], index: number): TransferPoint[] {
  if (index <= 0 || index >= points.length - 1) return points;
  return points.filter((_, i) => i !== index);
}
