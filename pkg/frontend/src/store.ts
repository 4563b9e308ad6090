import type { ProjectedPoint } from "./types.js";

/** The eight fixed file colors (same palette as the pipeline's figures). */
export const FILE_COLORS = [
  "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
] as const;

export const NUM_FILES = 8;

/**
 * Client-side view state: current frame, selection, and the pending
 * (unsaved) corrections keyed frame -> nucleus id -> label. Pending
 * entries survive frame navigation; the unsaved indicator is simply
 * whether any pending entry exists.
 */
export class ViewState {
  currentFrame = 0;
  frameCount = 0;
  selection = new Set<string>();
  private pending = new Map<number, Map<string, number>>();

  setFrame(frame: number): void {
    if (frame < 0 || frame >= this.frameCount) return;
    this.currentFrame = frame;
    this.selection.clear(); // selection is per frame; pending edits are not
  }

  toggleSelect(id: string, additive: boolean): void {
    if (!additive) this.selection.clear();
    if (this.selection.has(id)) this.selection.delete(id);
    else this.selection.add(id);
  }

  selectMany(ids: string[], additive: boolean): void {
    if (!additive) this.selection.clear();
    for (const id of ids) this.selection.add(id);
  }

  clearSelection(): void {
    this.selection.clear();
  }

  /** Queue a relabel of the current selection; returns affected ids. */
  relabelSelection(label: number): string[] {
    if (!Number.isInteger(label) || label < 0 || label >= NUM_FILES) {
      throw new RangeError(`label must be 0..${NUM_FILES - 1}, got ${label}`);
    }
    const frame = this.currentFrame;
    if (!this.pending.has(frame)) this.pending.set(frame, new Map());
    const bucket = this.pending.get(frame)!;
    const ids = [...this.selection];
    for (const id of ids) bucket.set(id, label);
    return ids;
  }

  /** Effective label of a point: pending correction wins over the server's. */
  effectiveLabel(point: ProjectedPoint, frame = this.currentFrame): number {
    return this.pending.get(frame)?.get(point.id) ?? point.label;
  }

  hasUnsaved(): boolean {
    for (const bucket of this.pending.values()) if (bucket.size > 0) return true;
    return false;
  }

  pendingCount(): number {
    let n = 0;
    for (const bucket of this.pending.values()) n += bucket.size;
    return n;
  }

  /** Pending entries grouped per frame, ready for POST bodies. */
  pendingByFrame(): Map<number, { id: string; label: number }[]> {
    const out = new Map<number, { id: string; label: number }[]>();
    for (const [frame, bucket] of this.pending) {
      if (bucket.size === 0) continue;
      out.set(frame, [...bucket].map(([id, label]) => ({ id, label })));
    }
    return out;
  }

  /** Drop pending entries (after a successful save). */
  clearPending(frames?: number[]): void {
    if (frames === undefined) this.pending.clear();
    else for (const frame of frames) this.pending.delete(frame);
  }

  /** Restore a snapshot (rollback after a failed save). */
  snapshotPending(): Map<number, Map<string, number>> {
    return new Map([...this.pending].map(([f, b]) => [f, new Map(b)]));
  }

  restorePending(snapshot: Map<number, Map<string, number>>): void {
    this.pending = snapshot;
  }
}
