/**
 * Workspace controller: the single place UI events funnel into.
 *
 * The server owns the authoritative annotation state; this class keeps a
 * mirror rebuilt from server responses, so a reload plus session load
 * reproduces the workspace exactly.
 */

import { SessionClient } from "./api";
import type { Label, Point2, ProjectDoc, StrokePairDoc, View } from "./types";

export type ViewMode = "V1" | "V2" | "V3D";
export type RenderMode = "segments" | "curve" | "cylinder";

const RECONSTRUCT_DEBOUNCE_MS = 500;

export interface WorkspaceEvents {
  strokesChanged?: () => void;
  meshChanged?: (partId: string) => void;
  error?: (message: string) => void;
}

export class Workspace {
  pairs = new Map<string, StrokePairDoc>();
  pairOrder: string[] = [];
  pending: Point2[] = [];
  pendingView: View | null = null;

  label: Label = "alignment";
  part = "part1";
  lock = true;
  viewMode: ViewMode = "V1";
  renderMode: RenderMode = "curve";
  selectedOnly = false;
  selected: string | null = null;

  private reconstructTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    readonly client: SessionClient,
    readonly events: WorkspaceEvents = {},
  ) {}

  // ------------------------------------------------------------- drawing

  /** Click on a canvas inserts a key point into the stroke being drawn. */
  clickAt(view: View, world: Point2): void {
    if (this.pendingView !== null && this.pendingView !== view) {
      this.pending = [];
    }
    this.pendingView = view;
    this.pending.push(world);
    this.events.strokesChanged?.();
  }

  /** Commit the pending key points as a labeled stroke pair. */
  async finishStroke(): Promise<StrokePairDoc | null> {
    if (this.pendingView === null || this.pending.length < 2) {
      return null;
    }
    const view = this.pendingView;
    const points = this.pending;
    this.pending = [];
    this.pendingView = null;
    try {
      const pair = await this.client.addStroke(
        view,
        points,
        this.label,
        this.part,
      );
      this.pairs.set(pair.id, pair);
      this.pairOrder.push(pair.id);
      this.selected = pair.id;
      this.events.strokesChanged?.();
      this.scheduleReconstruct(pair.part);
      return pair;
    } catch (err) {
      this.events.error?.(String(err));
      return null;
    }
  }

  /**
   * Drag one key point.  With the epipolar lock on, the server pins y to the
   * counterpart, reducing the edit to 1D; the stored pair reflects that.
   */
  async dragKeyPoint(
    view: View,
    strokeId: string,
    index: number,
    world: Point2,
  ): Promise<StrokePairDoc | null> {
    try {
      const pair = await this.client.moveKeyPoint(
        strokeId,
        index,
        world,
        this.lock,
        view,
      );
      this.pairs.set(pair.id, pair);
      this.events.strokesChanged?.();
      this.scheduleReconstruct(pair.part);
      return pair;
    } catch (err) {
      this.events.error?.(String(err));
      return null;
    }
  }

  async eraseStroke(strokeId: string): Promise<void> {
    try {
      await this.client.deleteStroke(strokeId);
      await this.syncFromServer();
      this.scheduleReconstructAll();
    } catch (err) {
      this.events.error?.(String(err));
    }
  }

  async relocate(strokeId: string): Promise<void> {
    try {
      const pair = await this.client.relocateStroke(strokeId);
      this.pairs.set(pair.id, pair);
      this.events.strokesChanged?.();
    } catch (err) {
      this.events.error?.(String(err));
    }
  }

  /** The Z shortcut: revert the last operation and mirror the server. */
  async undoLast(): Promise<void> {
    try {
      await this.client.undo();
      await this.syncFromServer();
    } catch (err) {
      this.events.error?.(String(err));
    }
  }

  async setLock(locked: boolean): Promise<void> {
    this.lock = locked;
    try {
      await this.client.setLock(locked);
    } catch (err) {
      this.events.error?.(String(err));
    }
  }

  // ------------------------------------------------------- persistence

  async saveProject(): Promise<ProjectDoc> {
    return this.client.save();
  }

  async loadProject(doc: ProjectDoc): Promise<void> {
    await this.client.load(doc);
    await this.syncFromServer();
  }

  /** Rebuild the stroke mirror from the server's own serialized state. */
  async syncFromServer(): Promise<void> {
    const doc = await this.client.save();
    this.pairs.clear();
    this.pairOrder = [];
    for (const part of doc.parts) {
      const primary = new Map<string, (typeof part.strokes)[number]>();
      const secondary = new Map<string, (typeof part.strokes)[number]>();
      for (const rec of part.strokes) {
        if (!primary.has(rec.id)) {
          primary.set(rec.id, rec);
        } else {
          secondary.set(rec.id, rec);
        }
      }
      for (const [id, rec] of primary) {
        const other = secondary.get(id);
        if (!other) continue;
        const byView = {
          [rec.view]: rec.points,
          [other.view]: other.points,
        } as Record<View, Point2[]>;
        this.pairs.set(id, {
          id,
          part: part.id,
          label: rec.label,
          primary_view: rec.view,
          attach_id: rec.attach_id,
          marking: rec.marking,
          front: byView.front,
          side: byView.side,
        });
        this.pairOrder.push(id);
      }
    }
    if (this.selected && !this.pairs.has(this.selected)) {
      this.selected = null;
    }
    this.events.strokesChanged?.();
  }

  // ------------------------------------------------------ reconstruction

  private scheduleReconstruct(partId: string): void {
    if (this.reconstructTimer !== null) {
      clearTimeout(this.reconstructTimer);
    }
    this.reconstructTimer = setTimeout(() => {
      this.reconstructTimer = null;
      void this.reconstruct(partId);
    }, RECONSTRUCT_DEBOUNCE_MS);
  }

  private scheduleReconstructAll(): void {
    const parts = new Set<string>();
    for (const pair of this.pairs.values()) {
      parts.add(pair.part);
    }
    for (const part of parts) {
      this.scheduleReconstruct(part);
    }
  }

  /** Rebuild one part now (the manual button and the debounced path). */
  async reconstruct(partId: string): Promise<void> {
    try {
      await this.client.reconstructPart(partId);
      this.events.meshChanged?.(partId);
    } catch (err) {
      this.events.error?.(String(err));
    }
  }

  // ------------------------------------------------------------ queries

  strokesInView(view: View): { pair: StrokePairDoc; points: Point2[] }[] {
    const out: { pair: StrokePairDoc; points: Point2[] }[] = [];
    for (const id of this.pairOrder) {
      const pair = this.pairs.get(id);
      if (!pair) continue;
      if (this.selectedOnly && this.selected !== id) continue;
      out.push({ pair, points: view === "front" ? pair.front : pair.side });
    }
    return out;
  }

  /** Horizontal guide for the locked 1D edit: the counterpart's y. */
  epipolarGuide(view: View, strokeId: string, index: number): number | null {
    const pair = this.pairs.get(strokeId);
    if (!pair || !this.lock) return null;
    const counterpart = view === "front" ? pair.side : pair.front;
    return counterpart[index]?.[1] ?? null;
  }

  hitTestKeyPoint(
    view: View,
    world: Point2,
    radius: number,
  ): { strokeId: string; index: number } | null {
    let best: { strokeId: string; index: number } | null = null;
    let bestD = radius;
    for (const { pair, points } of this.strokesInView(view)) {
      points.forEach((p, i) => {
        const d = Math.hypot(p[0] - world[0], p[1] - world[1]);
        if (d <= bestD) {
          bestD = d;
          best = { strokeId: pair.id, index: i };
        }
      });
    }
    return best;
  }

  hitTestStroke(view: View, world: Point2, radius: number): string | null {
    const hit = this.hitTestKeyPoint(view, world, radius);
    if (hit) return hit.strokeId;
    for (const { pair, points } of this.strokesInView(view)) {
      for (let i = 0; i + 1 < points.length; i++) {
        if (segmentDistance(world, points[i], points[i + 1]) <= radius) {
          return pair.id;
        }
      }
    }
    return null;
  }
}

function segmentDistance(p: Point2, a: Point2, b: Point2): number {
  const vx = b[0] - a[0];
  const vy = b[1] - a[1];
  const len2 = vx * vx + vy * vy;
  if (len2 === 0) return Math.hypot(p[0] - a[0], p[1] - a[1]);
  let t = ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2;
  t = Math.max(0, Math.min(1, t));
  return Math.hypot(p[0] - (a[0] + t * vx), p[1] - (a[1] + t * vy));
}
