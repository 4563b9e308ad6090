/** Payload shapes of the rootline serve API. */

export interface FrameInfo {
  frame: number;
  nuclei: number;
  time_interval_min: number;
}

export interface FramesResponse {
  count: number;
  truth_loaded: boolean;
  frames: FrameInfo[];
}

export interface ProjectedPoint {
  id: string;
  u: number;
  v: number;
  label: number;
  phase: "mitotic" | "non_mitotic";
}

export interface ProjectionResponse {
  frame: number;
  points: ProjectedPoint[];
  plane: { nx: number; ny: number; nz: number };
  fitness: number;
}

export interface CorrectionEntry {
  frame: number;
  id: string;
  label: number;
}

export interface CorrectionsDoc {
  version: string;
  entries: CorrectionEntry[];
}

export interface Metrics {
  tp: number;
  fp: number;
  fn: number;
  precision: number;
  recall: number;
}

export interface RerunResponse {
  status: string;
  edges: number;
  divisions: number;
  reconciliation_errors: string[];
  metrics?: Metrics;
}
