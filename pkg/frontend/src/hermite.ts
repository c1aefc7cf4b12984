import type { Point2 } from "./types";

/**
 * Catmull-Rom polyline through the key points (one-sided tangents at the
 * ends), sampled `segments` times per span.  Client-side display only; the
 * server owns the real curves.
 */
export function catmullRom(points: Point2[], segments: number): Point2[] {
  if (points.length < 3) return points.slice();
  const n = points.length;
  const tangents: Point2[] = points.map((_, i) => {
    const prev = points[Math.max(i - 1, 0)];
    const next = points[Math.min(i + 1, n - 1)];
    const scale = i === 0 || i === n - 1 ? 1.0 : 0.5;
    return [(next[0] - prev[0]) * scale, (next[1] - prev[1]) * scale];
  });
  const out: Point2[] = [points[0]];
  for (let i = 0; i + 1 < n; i++) {
    for (let s = 1; s <= segments; s++) {
      const u = s / segments;
      const h00 = (1 + 2 * u) * (1 - u) ** 2;
      const h10 = u * (1 - u) ** 2;
      const h01 = u * u * (3 - 2 * u);
      const h11 = u * u * (u - 1);
      out.push([
        h00 * points[i][0] +
          h10 * tangents[i][0] +
          h01 * points[i + 1][0] +
          h11 * tangents[i + 1][0],
        h00 * points[i][1] +
          h10 * tangents[i][1] +
          h01 * points[i + 1][1] +
          h11 * tangents[i + 1][1],
      ]);
    }
  }
  return out;
}
