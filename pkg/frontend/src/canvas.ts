/**
 * One 2D annotation canvas (V1 front or V2 side): pixel/world transforms,
 * pointer handling, and stroke rendering over the drawing image.
 *
 * World convention matches the service: image center at the origin, y up,
 * `worldPerPixel` world units per canvas pixel.
 */

import { catmullRom } from "./hermite";
import type { Point2, View } from "./types";
import type { Workspace } from "./workspace";

const KEY_POINT_RADIUS = 4;
const HIT_RADIUS_WORLD = 6;
const LABEL_COLORS: Record<string, string> = {
  alignment: "#2b6fd4",
  addition: "#e07b1f",
  erosion: "#2e9e44",
};

export type Tool = "draw" | "edit" | "erase";

export class ViewCanvas {
  tool: Tool = "draw";
  private dragging: { strokeId: string; index: number } | null = null;
  private image: HTMLImageElement | null = null;

  constructor(
    readonly view: View,
    readonly el: HTMLCanvasElement,
    readonly workspace: Workspace,
    readonly worldPerPixel = 1.0,
  ) {
    el.addEventListener("pointerdown", (ev) => this.onPointerDown(ev));
    el.addEventListener("pointermove", (ev) => this.onPointerMove(ev));
    el.addEventListener("pointerup", (ev) => this.onPointerUp(ev));
    el.addEventListener("dblclick", () => void this.workspace.finishStroke());
  }

  setImage(url: string): void {
    if (typeof Image === "undefined") return;
    const img = new Image();
    img.onload = () => {
      this.image = img;
      this.render();
    };
    img.src = url;
  }

  worldFromCanvas(px: number, py: number): Point2 {
    const cx = this.el.width / 2;
    const cy = this.el.height / 2;
    return [(px - cx) * this.worldPerPixel, (cy - py) * this.worldPerPixel];
  }

  canvasFromWorld(p: Point2): Point2 {
    const cx = this.el.width / 2;
    const cy = this.el.height / 2;
    return [cx + p[0] / this.worldPerPixel, cy - p[1] / this.worldPerPixel];
  }

  private eventWorld(ev: MouseEvent): Point2 {
    const rect = this.el.getBoundingClientRect();
    const sx = rect.width > 0 ? this.el.width / rect.width : 1;
    const sy = rect.height > 0 ? this.el.height / rect.height : 1;
    return this.worldFromCanvas(
      (ev.clientX - rect.left) * sx,
      (ev.clientY - rect.top) * sy,
    );
  }

  private onPointerDown(ev: MouseEvent): void {
    const world = this.eventWorld(ev);
    if (this.tool === "erase") {
      const hit = this.workspace.hitTestStroke(this.view, world, HIT_RADIUS_WORLD);
      if (hit) void this.workspace.eraseStroke(hit);
      return;
    }
    if (this.tool === "edit") {
      this.dragging = this.workspace.hitTestKeyPoint(
        this.view,
        world,
        HIT_RADIUS_WORLD,
      );
      return;
    }
    this.workspace.clickAt(this.view, world);
    this.render();
  }

  private onPointerMove(ev: MouseEvent): void {
    if (!this.dragging) return;
    // purely visual feedback while dragging; the commit happens on pointerup
    this.render(this.eventWorld(ev));
  }

  private onPointerUp(ev: MouseEvent): void {
    if (!this.dragging) return;
    const { strokeId, index } = this.dragging;
    this.dragging = null;
    void this.workspace
      .dragKeyPoint(this.view, strokeId, index, this.eventWorld(ev))
      .then(() => this.render());
  }

  // -------------------------------------------------------------- render

  render(cursor?: Point2): void {
    const ctx = this.el.getContext?.("2d");
    if (!ctx) return; // headless test environment
    ctx.clearRect(0, 0, this.el.width, this.el.height);
    if (this.image) {
      ctx.drawImage(this.image, 0, 0, this.el.width, this.el.height);
    }
    for (const { pair, points } of this.workspace.strokesInView(this.view)) {
      const color = LABEL_COLORS[pair.label] ?? "#444";
      const faded = pair.primary_view !== this.view;
      ctx.globalAlpha = faded ? 0.55 : 1.0;
      this.drawPolyline(ctx, points, color, pair.id === this.workspace.selected);
      ctx.globalAlpha = 1.0;
    }
    if (this.workspace.pendingView === this.view) {
      this.drawPolyline(ctx, this.workspace.pending, "#888", false, true);
    }
    if (this.dragging && cursor) {
      const guide = this.workspace.epipolarGuide(
        this.view,
        this.dragging.strokeId,
        this.dragging.index,
      );
      if (guide !== null) {
        const [, y] = this.canvasFromWorld([0, guide]);
        ctx.strokeStyle = "#d43b8b";
        ctx.setLineDash([6, 4]);
        ctx.beginPath();
        ctx.moveTo(0, y);
        ctx.lineTo(this.el.width, y);
        ctx.stroke();
        ctx.setLineDash([]);
      }
    }
  }

  private drawPolyline(
    ctx: CanvasRenderingContext2D,
    points: Point2[],
    color: string,
    selected: boolean,
    dashed = false,
  ): void {
    if (points.length === 0) return;
    const px = points.map((p) => this.canvasFromWorld(p));
    ctx.strokeStyle = color;
    ctx.lineWidth = selected ? 2.5 : 1.5;
    if (dashed) ctx.setLineDash([4, 3]);
    const path =
      this.workspace.renderMode === "curve" && points.length > 2
        ? catmullRom(px, 8)
        : px;
    ctx.beginPath();
    path.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = color;
    for (const [x, y] of px) {
      ctx.beginPath();
      ctx.arc(x, y, KEY_POINT_RADIUS, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
}
