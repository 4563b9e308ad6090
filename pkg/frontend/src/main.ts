import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import type { View } from "./controller.js";
import { ScatterPlot } from "./scatter.js";
import { FILE_COLORS, NUM_FILES, ViewState } from "./store.js";
import type { Metrics, ProjectionResponse } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("scatter");
const scatter = new ScatterPlot(canvas);

const view: View = {
  renderProjection(projection: ProjectionResponse, state: ViewState): void {
    scatter.render(projection, state);
    el("frame-label").textContent = `frame ${projection.frame}`;
  },
  renderStatus(text: string): void {
    el("status").textContent = text;
  },
  renderUnsaved(pendingCount: number): void {
    const badge = el("unsaved");
    badge.textContent = pendingCount > 0 ? `${pendingCount} unsaved` : "";
    badge.classList.toggle("active", pendingCount > 0);
  },
  renderMetrics(metrics: Metrics | null): void {
    el("metrics").textContent = metrics
      ? `precision ${(metrics.precision * 100).toFixed(1)}% / ` +
        `recall ${(metrics.recall * 100).toFixed(1)}% ` +
        `(tp ${metrics.tp}, fp ${metrics.fp}, fn ${metrics.fn})`
      : "no metrics yet";
  },
  renderError(message: string | null): void {
    const banner = el("error");
    banner.textContent = message ?? "";
    banner.classList.toggle("visible", message !== null);
  },
};

const controller = new Controller(new ApiClient(""), view);
scatter.onSelectionChange = () => {
  el("selection").textContent =
    controller.state.selection.size > 0
      ? `${controller.state.selection.size} selected - press 0-7 to relabel`
      : "";
};

el("prev").addEventListener("click", () =>
  void controller.showFrame(controller.state.currentFrame - 1));
el("next").addEventListener("click", () =>
  void controller.showFrame(controller.state.currentFrame + 1));
el("save").addEventListener("click", () =>
  void controller.save().catch(() => undefined));
el("rerun").addEventListener("click", () =>
  void controller.rerun().catch(() => undefined));

document.addEventListener("keydown", (e) => {
  if (e.target instanceof HTMLInputElement) return;
  if (e.key >= "0" && e.key <= "7") controller.relabel(Number(e.key));
  else if (e.key === "ArrowLeft") void controller.showFrame(controller.state.currentFrame - 1);
  else if (e.key === "ArrowRight") void controller.showFrame(controller.state.currentFrame + 1);
});

const palette = el("palette");
for (let label = 0; label < NUM_FILES; label++) {
  const swatch = document.createElement("button");
  swatch.className = "swatch";
  swatch.style.background = FILE_COLORS[label] ?? "#000";
  swatch.title = `relabel selection to file ${label} (key ${label})`;
  swatch.textContent = String(label);
  swatch.addEventListener("click", () => controller.relabel(label));
  palette.appendChild(swatch);
}

void controller.start();
