"""HTTP/JSON API over a pipeline state directory.

Serves per-frame projections for the refinement UI, accepts label
corrections (kept in a separate overlay document, never touching the raw
dataset or K-means output), and re-runs line matching plus lineage
tracking on demand. All errors are JSON {error, detail}.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import io
from .clustering import CorrectionSet, apply_corrections
from .evaluation import compare_links, forest_links
from .ga import fitness
from .lineage import LineageForest, track_dataset
from .lines import match_files, propagate_labels, select_representatives
from .model import NUM_FILES


class LabelEntry(BaseModel):
    id: str
    label: int = Field(ge=0, le=NUM_FILES - 1)


class LabelsBody(BaseModel):
    entries: list[LabelEntry]


class CorrectionEntry(BaseModel):
    frame: int = Field(ge=0)
    id: str
    label: int = Field(ge=0, le=NUM_FILES - 1)


class CorrectionsBody(BaseModel):
    version: str
    entries: list[CorrectionEntry]


class ServerState:
    """Pipeline outputs plus the mutable corrections overlay."""

    def __init__(self, state_dir: Path):
        self.state_dir = Path(state_dir)
        dataset_path = self.state_dir / "dataset.csv"
        if not dataset_path.exists():
            raise FileNotFoundError(f"no dataset.csv under {self.state_dir}")
        self.dataset = io.load_dataset(dataset_path)
        self.assignments = io.load_assignments(self.state_dir / "assignments", self.dataset)
        self.truth = None
        if (self.state_dir / "truth.json").exists():
            self.truth = io.load_truth(self.state_dir / "truth.json")
        self.fitness_by_frame = {}
        planes_path = self.state_dir / "planes.json"
        if planes_path.exists():
            for entry in io.read_json(planes_path).get("planes", []):
                self.fitness_by_frame[int(entry["frame"])] = float(entry["fitness"])
        self.write_lock = threading.Lock()

    # ----- corrections overlay

    @property
    def corrections_path(self) -> Path:
        return self.state_dir / "corrections.json"

    def load_corrections(self) -> CorrectionSet:
        if self.corrections_path.exists():
            return io.load_corrections(self.corrections_path)
        return CorrectionSet()

    def store_corrections(self, corrections: CorrectionSet) -> None:
        """Atomic replace so concurrent readers never see a partial file."""
        doc = io.corrections_to_doc(corrections)
        fd, tmp = tempfile.mkstemp(dir=self.state_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
            os.replace(tmp, self.corrections_path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def corrected_assignments(self) -> list:
        corrections = self.load_corrections()
        if not corrections.entries:
            return self.assignments
        return [apply_corrections(a, corrections) for a in self.assignments]

    def frame_fitness(self, t: int) -> float:
        if t in self.fitness_by_frame:
            return self.fitness_by_frame[t]
        return fitness(self.dataset.frames[t].positions(), self.assignments[t].plane)

    def rerun(self) -> dict:
        assignments = self.corrected_assignments()
        reps = [select_representatives(f, a) for f, a in zip(self.dataset.frames, assignments)]
        correspondences = [
            match_files(reps[t], reps[t + 1], assignments[t].plane, assignments[t + 1].plane)
            for t in range(len(self.dataset) - 1)
        ]
        propagated = propagate_labels(assignments, correspondences)
        forest = track_dataset(self.dataset, propagated)
        io.write_json(io.correspondences_to_doc(correspondences),
                      self.state_dir / "correspondences.json")
        io.save_assignments(propagated, self.state_dir / "propagated")
        io.write_json(io.forest_to_doc(forest), self.state_dir / "forest.json")
        payload = {
            "status": "ok",
            "edges": len(forest.edges),
            "divisions": len(forest.division_events()),
            "reconciliation_errors": [str(e) for e in forest.errors],
        }
        if self.truth is not None:
            metrics = compare_links(
                forest_links(forest), forest_links(LineageForest(list(self.truth.edges))))
            io.write_json(io.metrics_to_doc(metrics), self.state_dir / "metrics.json")
            payload["metrics"] = io.metrics_to_doc(metrics)
        return payload


def create_app(state_dir: Path, ui_dir: Path | None = None) -> FastAPI:
    state = ServerState(Path(state_dir))
    app = FastAPI(title="rootline refinement API")

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422, content={
            "error": "validation_error",
            "detail": [
                {"loc": [str(x) for x in e["loc"]], "msg": e["msg"]}
                for e in exc.errors()
            ],
        })

    @app.exception_handler(HTTPException)
    async def http_handler(request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"error": "http_error", "detail": exc.detail})

    def check_frame(t: int) -> None:
        if not 0 <= t < len(state.dataset):
            raise HTTPException(404, f"frame {t} does not exist")

    @app.get("/api/frames")
    def frames():
        return {
            "count": len(state.dataset),
            "truth_loaded": state.truth is not None,
            "frames": [
                {"frame": f.frame_index, "nuclei": len(f),
                 "time_interval_min": f.time_interval_min}
                for f in state.dataset.frames
            ],
        }

    @app.get("/api/frames/{t}/projection")
    def projection(t: int):
        check_frame(t)
        assignment = state.corrected_assignments()[t]
        frame = state.dataset.frames[t]
        nx, ny, nz = assignment.plane.normal
        return {
            "frame": t,
            "points": [
                {"id": n.nucleus_id,
                 "u": assignment.coords[n.nucleus_id][0],
                 "v": assignment.coords[n.nucleus_id][1],
                 "label": assignment.labels[n.nucleus_id],
                 "phase": n.phase.value}
                for n in frame.nuclei
            ],
            "plane": {"nx": nx, "ny": ny, "nz": nz},
            "fitness": state.frame_fitness(t),
        }

    @app.post("/api/frames/{t}/labels", status_code=204)
    def relabel(t: int, body: LabelsBody):
        check_frame(t)
        known = set(state.dataset.frames[t].ids())
        unknown = [e.id for e in body.entries if e.id not in known]
        if unknown:
            raise HTTPException(404, f"unknown nucleus ids in frame {t}: {unknown}")
        with state.write_lock:
            current = state.load_corrections()
            overlay = CorrectionSet(tuple((t, e.id, e.label) for e in body.entries))
            state.store_corrections(current.merged_with(overlay))
        return Response(status_code=204)

    @app.get("/api/corrections")
    def get_corrections():
        return io.corrections_to_doc(state.load_corrections())

    @app.put("/api/corrections", status_code=204)
    def put_corrections(body: CorrectionsBody):
        if body.version != io.FORMAT_VERSION:
            raise HTTPException(422, f"unsupported corrections version {body.version!r}")
        for e in body.entries:
            if not 0 <= e.frame < len(state.dataset):
                raise HTTPException(404, f"frame {e.frame} does not exist")
            if e.id not in set(state.dataset.frames[e.frame].ids()):
                raise HTTPException(404, f"unknown nucleus {e.id!r} in frame {e.frame}")
        with state.write_lock:
            state.store_corrections(CorrectionSet(
                tuple((e.frame, e.id, e.label) for e in body.entries)))
        return Response(status_code=204)

    @app.post("/api/rerun")
    def rerun():
        with state.write_lock:
            return state.rerun()

    @app.get("/api/metrics")
    def metrics():
        path = state.state_dir / "metrics.json"
        if not path.exists():
            raise HTTPException(404, "no metrics computed (run rerun with truth loaded)")
        return io.read_json(path)

    if ui_dir is not None and Path(ui_dir).exists():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
