/**
 * UI round trip against the real serve API: a bent_rotating demo gets three
 * injected label errors, the controller fixes them the way the page would
 * (select -> relabel -> save -> rerun), and the displayed metrics must come
 * back 100%/100% with exactly three persisted correction entries.
 */

import { execFileSync, spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, readdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { Controller } from "../src/controller.js";
import type { View } from "../src/controller.js";
import type { Metrics, ProjectionResponse } from "../src/types.js";

const PORT = 8912;
const BASE = `http://127.0.0.1:${PORT}`;

let stateDir: string;
let server: ChildProcess;
// the three sabotaged nuclei: frame, id, original label
let injected: { frame: number; id: string; label: number }[] = [];

class RecordingView implements View {
  statuses: string[] = [];
  errors: (string | null)[] = [];
  metrics: (Metrics | null)[] = [];
  unsaved: number[] = [];
  projections: ProjectionResponse[] = [];

  renderProjection(projection: ProjectionResponse): void {
    this.projections.push(projection);
  }
  renderStatus(text: string): void {
    this.statuses.push(text);
  }
  renderUnsaved(pendingCount: number): void {
    this.unsaved.push(pendingCount);
  }
  renderMetrics(metrics: Metrics | null): void {
    this.metrics.push(metrics);
  }
  renderError(message: string | null): void {
    this.errors.push(message);
  }
}

function injectErrors(dir: string): void {
  const plan: [number, number][] = [[1, 0], [1, 9], [4, 5]]; // frame, point index
  for (const [frame, index] of plan) {
    const path = join(dir, "assignments", `frame_${String(frame).padStart(5, "0")}.json`);
    const doc = JSON.parse(readFileSync(path, "utf-8")) as {
      labels: Record<string, number>;
    };
    const id = Object.keys(doc.labels).sort()[index]!;
    const original = doc.labels[id]!;
    doc.labels[id] = (original + 4) % 8;
    injected.push({ frame, id, label: original });
    writeFileSync(path, JSON.stringify(doc));
  }
}

async function waitForServer(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(`${BASE}/api/frames`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  stateDir = mkdtempSync(join(tmpdir(), "rootline-ui-"));
  execFileSync("python3", [
    "-m", "rootline.cli", "pipeline",
    "--preset", "bent_rotating", "--frames", "6", "--seed", "0",
    "--population", "120", "--max-iter", "60",
    "--out", stateDir,
  ], { stdio: "ignore" });
  injectErrors(stateDir);
  server = spawn("python3", [
    "-m", "rootline.cli", "serve",
    "--state", stateDir, "--port", String(PORT),
  ], { stdio: "ignore" });
  await waitForServer();
}, 120_000);

afterAll(() => {
  server?.kill();
});

describe("refinement round trip", () => {
  it("fixes three injected errors through the controller and reaches 100%/100%", async () => {
    const view = new RecordingView();
    const controller = new Controller(new ApiClient(BASE), view);
    await controller.start();
    expect(controller.state.frameCount).toBe(6);

    // the broken labels are visible in the projection payloads
    const rerunBefore = await controller.rerun();
    expect(
      rerunBefore === null ||
      rerunBefore.recall < 1 ||
      view.statuses.at(-1)!.includes("reconciliation"),
    ).toBe(true);

    // fix each sabotaged nucleus exactly as the page would
    for (const fix of injected) {
      await controller.showFrame(fix.frame);
      const shown = view.projections.at(-1)!;
      const current = shown.points.find((p) => p.id === fix.id)!;
      expect(controller.state.effectiveLabel(current, fix.frame)).not.toBe(fix.label);
      controller.state.selectMany([fix.id], false);
      controller.relabel(fix.label);
      // optimistic update is visible immediately
      expect(controller.state.effectiveLabel(current, fix.frame)).toBe(fix.label);
    }
    expect(controller.state.pendingCount()).toBe(3);

    await controller.save();
    expect(controller.state.hasUnsaved()).toBe(false);

    const metrics = await controller.rerun();
    expect(metrics).not.toBeNull();
    expect(metrics!.precision).toBe(1.0);
    expect(metrics!.recall).toBe(1.0);
    expect(view.metrics.at(-1)).toEqual(metrics);

    // the persisted overlay carries exactly the three fixes
    const doc = JSON.parse(readFileSync(join(stateDir, "corrections.json"), "utf-8")) as {
      entries: unknown[];
    };
    expect(doc.entries).toHaveLength(3);
  }, 120_000);

  it("keeps raw pipeline outputs untouched", () => {
    const names = readdirSync(stateDir);
    expect(names).toContain("dataset.csv");
    expect(names).toContain("corrections.json");
    const dataset = readFileSync(join(stateDir, "dataset.csv"), "utf-8");
    expect(dataset.startsWith("frame,id,x_um,y_um,z_um,phase")).toBe(true);
  });

  it("rejects an out-of-range relabel with a 422 the view can show", async () => {
    const view = new RecordingView();
    const controller = new Controller(new ApiClient(BASE), view);
    await controller.start();
    const api = new ApiClient(BASE);
    const err = await api
      .postLabels(0, [{ id: view.projections.at(-1)!.points[0]!.id, label: 8 }])
      .catch((e) => e);
    expect(err.status).toBe(422);
  });
});
