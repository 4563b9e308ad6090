import { ApiClient, ApiError } from "./api.js";
import { ViewState } from "./store.js";
import type { Metrics, ProjectionResponse } from "./types.js";

/** Everything the controller tells the page to show. */
export interface View {
  renderProjection(projection: ProjectionResponse, state: ViewState): void;
  renderStatus(text: string): void;
  renderUnsaved(pendingCount: number): void;
  renderMetrics(metrics: Metrics | null): void;
  renderError(message: string | null): void;
}

/**
 * Frame navigation, relabelling, save and rerun, kept free of DOM code so
 * the whole refinement flow can be driven headlessly. Relabels update the
 * display immediately (the pending overlay is part of the view state);
 * save POSTs per frame and rolls the overlay back if the server refuses.
 */
export class Controller {
  readonly state = new ViewState();
  projection: ProjectionResponse | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly view: View,
  ) {}

  async start(): Promise<void> {
    try {
      const frames = await this.api.getFrames();
      this.state.frameCount = frames.count;
      await this.showFrame(0);
      await this.refreshMetrics();
    } catch (err) {
      this.fail(err);
    }
  }

  async showFrame(frame: number): Promise<void> {
    if (frame < 0 || frame >= this.state.frameCount) return;
    try {
      const projection = await this.api.getProjection(frame);
      this.state.setFrame(frame);
      this.projection = projection;
      this.view.renderError(null);
      this.view.renderProjection(projection, this.state);
      this.view.renderStatus(
        `frame ${frame + 1}/${this.state.frameCount} - ` +
        `${projection.points.length} nuclei - fitness ${projection.fitness.toFixed(3)}`);
      this.view.renderUnsaved(this.state.pendingCount());
    } catch (err) {
      this.fail(err);
    }
  }

  /** Relabel the current selection; optimistic, queued until save(). */
  relabel(label: number): void {
    if (this.state.selection.size === 0 || this.projection === null) return;
    this.state.relabelSelection(label);
    this.view.renderProjection(this.projection, this.state);
    this.view.renderUnsaved(this.state.pendingCount());
  }

  /** Push all pending corrections; no-op when nothing is pending. */
  async save(): Promise<void> {
    const byFrame = this.state.pendingByFrame();
    if (byFrame.size === 0) return;
    const snapshot = this.state.snapshotPending();
    try {
      for (const [frame, entries] of byFrame) {
        await this.api.postLabels(frame, entries);
        this.state.clearPending([frame]);
        this.view.renderUnsaved(this.state.pendingCount());
      }
      this.view.renderStatus("corrections saved");
    } catch (err) {
      this.state.restorePending(snapshot);
      this.view.renderUnsaved(this.state.pendingCount());
      this.fail(err);
      throw err;
    }
    await this.showFrame(this.state.currentFrame);
  }

  /** Recompute lines + tracking server-side, then refresh metrics. */
  async rerun(): Promise<Metrics | null> {
    try {
      this.view.renderStatus("re-running line matching and tracking...");
      const result = await this.api.rerun();
      const metrics = result.metrics ?? null;
      this.view.renderMetrics(metrics);
      const problems = result.reconciliation_errors.length;
      this.view.renderStatus(
        `tracking rebuilt: ${result.edges} edges, ${result.divisions} divisions` +
        (problems ? `, ${problems} reconciliation errors` : ""));
      return metrics;
    } catch (err) {
      this.fail(err);
      throw err;
    }
  }

  async refreshMetrics(): Promise<void> {
    try {
      this.view.renderMetrics(await this.api.getMetrics());
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.view.renderMetrics(null); // nothing computed yet
        return;
      }
      this.fail(err);
    }
  }

  private fail(err: unknown): void {
    const message = err instanceof ApiError
      ? `server rejected the request: ${JSON.stringify(err.detail)}`
      : `request failed: ${String(err)}`;
    this.view.renderError(message);
  }
}
