import { fitTransform, hitTest, rectSelect, toScreen } from "./geometry.js";
import type { ScreenTransform } from "./geometry.js";
import { FILE_COLORS, ViewState } from "./store.js";
import type { ProjectionResponse } from "./types.js";

const POINT_RADIUS = 5;

/**
 * Canvas scatter of one frame's projected nuclei. Click selects, shift
 * adds to the selection, dragging draws a rectangle select. Mitotic
 * nuclei carry a red ring.
 */
export class ScatterPlot {
  private transform: ScreenTransform = { scale: 1, offsetX: 0, offsetY: 0 };
  private projection: ProjectionResponse | null = null;
  private state: ViewState | null = null;
  private drag: { x0: number; y0: number; x1: number; y1: number } | null = null;
  private hover: string | null = null;

  onSelectionChange: () => void = () => undefined;

  constructor(private readonly canvas: HTMLCanvasElement) {
    canvas.addEventListener("mousedown", (e) => this.onDown(e));
    canvas.addEventListener("mousemove", (e) => this.onMove(e));
    canvas.addEventListener("mouseup", (e) => this.onUp(e));
    canvas.addEventListener("mouseleave", () => {
      this.drag = null;
      this.hover = null;
      this.draw();
    });
  }

  render(projection: ProjectionResponse, state: ViewState): void {
    this.projection = projection;
    this.state = state;
    this.transform = fitTransform(projection.points, {
      width: this.canvas.width,
      height: this.canvas.height,
      margin: 24,
    });
    this.draw();
  }

  private local(e: MouseEvent): { x: number; y: number } {
    const rect = this.canvas.getBoundingClientRect();
    return { x: e.clientX - rect.left, y: e.clientY - rect.top };
  }

  private onDown(e: MouseEvent): void {
    const { x, y } = this.local(e);
    this.drag = { x0: x, y0: y, x1: x, y1: y };
  }

  private onMove(e: MouseEvent): void {
    const { x, y } = this.local(e);
    if (this.drag) {
      this.drag.x1 = x;
      this.drag.y1 = y;
    } else if (this.projection) {
      this.hover = hitTest(this.projection.points, this.transform, x, y);
    }
    this.draw();
  }

  private onUp(e: MouseEvent): void {
    if (!this.drag || !this.projection || !this.state) return;
    const { x0, y0, x1, y1 } = this.drag;
    this.drag = null;
    const additive = e.shiftKey;
    const moved = Math.hypot(x1 - x0, y1 - y0) > 4;
    if (moved) {
      const ids = rectSelect(this.projection.points, this.transform, x0, y0, x1, y1);
      this.state.selectMany(ids, additive);
    } else {
      const id = hitTest(this.projection.points, this.transform, x1, y1);
      if (id !== null) this.state.toggleSelect(id, additive);
      else if (!additive) this.state.clearSelection();
    }
    this.draw();
    this.onSelectionChange();
  }

  draw(): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.projection || !this.state) return;

    for (const p of this.projection.points) {
      const { x, y } = toScreen(p, this.transform);
      const label = this.state.effectiveLabel(p, this.projection.frame);
      ctx.beginPath();
      ctx.arc(x, y, POINT_RADIUS, 0, 2 * Math.PI);
      ctx.fillStyle = FILE_COLORS[label] ?? "#000";
      ctx.fill();
      if (p.phase === "mitotic") {
        ctx.lineWidth = 2;
        ctx.strokeStyle = "red";
        ctx.stroke();
      }
      if (this.state.selection.has(p.id)) {
        ctx.lineWidth = 2;
        ctx.strokeStyle = "#000";
        ctx.beginPath();
        ctx.arc(x, y, POINT_RADIUS + 3, 0, 2 * Math.PI);
        ctx.stroke();
      }
    }

    if (this.drag) {
      const { x0, y0, x1, y1 } = this.drag;
      ctx.strokeStyle = "#555";
      ctx.setLineDash([4, 3]);
      ctx.strokeRect(Math.min(x0, x1), Math.min(y0, y1),
                     Math.abs(x1 - x0), Math.abs(y1 - y0));
      ctx.setLineDash([]);
    }

    if (this.hover) {
      const p = this.projection.points.find((q) => q.id === this.hover);
      if (p) {
        const { x, y } = toScreen(p, this.transform);
        const label = this.state.effectiveLabel(p, this.projection.frame);
        ctx.fillStyle = "#222";
        ctx.font = "12px sans-serif";
        ctx.fillText(`${p.id} file ${label}${p.phase === "mitotic" ? " (mitotic)" : ""}`,
                     x + 10, y - 10);
      }
    }
  }
}
