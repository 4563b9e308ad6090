"""On-disk formats: the dataset CSV, JSON stage documents, run manifests.

All writers are deterministic (sorted keys, shortest-round-trip floats)
so manifest-driven reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .clustering import CorrectionSet, FileAssignment, KMeansConfig, _recompute_centroids
from .ga import GAConfig
from .geometry import ProjectionPlane, to_plane_coords
from .lineage import LineageEdge, LineageForest
from .lines import FileCorrespondence
from .model import DEFAULT_VOXEL_SIZE_UM, Dataset, FrameCloud, NucleusRecord, Phase
from .synth import GroundTruth, SyntheticConfig

FORMAT_VERSION = "1"
CSV_HEADER = ["frame", "id", "x_um", "y_um", "z_um", "phase"]


class ParseError(ValueError):
    """Malformed input file; the message names the offending line."""


def _check_version(doc: dict, path) -> None:
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported document version {version!r}")


def write_json(doc: dict, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def read_json(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: invalid JSON ({err})") from err


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ---------------------------------------------------------------- dataset CSV

def save_dataset(dataset: Dataset, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for frame in dataset.frames:
            for n in frame.nuclei:
                writer.writerow([
                    frame.frame_index, n.nucleus_id,
                    repr(n.position[0]), repr(n.position[1]), repr(n.position[2]),
                    n.phase.value,
                ])


def load_dataset(path: Path, voxel_units: bool = False,
                 voxel_size_um: tuple[float, float, float] = DEFAULT_VOXEL_SIZE_UM) -> Dataset:
    """Read the dataset CSV; positions in micrometers unless voxel_units.

    With voxel_units set, coordinates are voxel indices and get scaled by
    the (z, y, x) voxel size.
    """
    path = Path(path)
    vz, vy, vx = voxel_size_um
    by_frame: dict[int, list[NucleusRecord]] = {}
    seen: set[tuple[int, str]] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file, expected header {','.join(CSV_HEADER)}")
        if [h.strip() for h in header] != CSV_HEADER:
            raise ParseError(f"{path}:1: expected header {','.join(CSV_HEADER)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"{path}:{lineno}: expected {len(CSV_HEADER)} columns, got {len(row)}")
            frame_s, nucleus_id, x_s, y_s, z_s, phase_s = [c.strip() for c in row]
            try:
                frame = int(frame_s)
                x, y, z = float(x_s), float(y_s), float(z_s)
            except ValueError as err:
                raise ParseError(f"{path}:{lineno}: {err}") from err
            if not all(np.isfinite([x, y, z])):
                raise ParseError(f"{path}:{lineno}: non-finite coordinates for id {nucleus_id!r}")
            try:
                phase = Phase(phase_s)
            except ValueError:
                raise ParseError(f"{path}:{lineno}: unknown phase {phase_s!r}")
            if (frame, nucleus_id) in seen:
                raise ParseError(f"{path}:{lineno}: duplicate id {nucleus_id!r} in frame {frame}")
            seen.add((frame, nucleus_id))
            if voxel_units:
                x, y, z = x * vx, y * vy, z * vz
            by_frame.setdefault(frame, []).append(
                NucleusRecord(frame, nucleus_id, (x, y, z), phase))
    if not by_frame:
        raise ParseError(f"{path}: no data rows")
    frames = []
    for expected, frame_index in enumerate(sorted(by_frame)):
        if frame_index != expected:
            raise ParseError(f"{path}: frame indices not contiguous from 0 (missing {expected})")
        frames.append(FrameCloud(frame_index, tuple(by_frame[frame_index])))
    return Dataset(tuple(frames), voxel_size_um=voxel_size_um)


# ---------------------------------------------------------- JSON documents

def assignment_to_doc(assignment: FileAssignment) -> dict:
    nx, ny, nz = assignment.plane.normal
    return {
        "version": FORMAT_VERSION,
        "frame": assignment.frame_index,
        "labels": {nid: int(lab) for nid, lab in assignment.labels.items()},
        "plane": {"nx": nx, "ny": ny, "nz": nz},
    }


def assignment_from_doc(doc: dict, frame: FrameCloud, path="<doc>") -> FileAssignment:
    _check_version(doc, path)
    plane = ProjectionPlane((doc["plane"]["nx"], doc["plane"]["ny"], doc["plane"]["nz"]))
    labels = {nid: int(lab) for nid, lab in doc["labels"].items()}
    missing = set(frame.ids()) ^ set(labels)
    if missing:
        raise ParseError(f"{path}: labels do not cover frame {frame.frame_index} exactly "
                         f"(mismatched ids: {sorted(missing)[:5]}...)")
    coords = to_plane_coords(frame.positions(), plane)
    coord_map = {nid: (float(u), float(v)) for nid, (u, v) in zip(frame.ids(), coords)}
    return FileAssignment(
        frame_index=frame.frame_index,
        labels=labels,
        centroids=_recompute_centroids(labels, coord_map),
        plane=plane,
        coords=coord_map,
    )


def save_assignments(assignments: list[FileAssignment], directory: Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for a in assignments:
        write_json(assignment_to_doc(a), directory / f"frame_{a.frame_index:05d}.json")


def load_assignments(directory: Path, dataset: Dataset) -> list[FileAssignment]:
    directory = Path(directory)
    out = []
    for frame in dataset.frames:
        path = directory / f"frame_{frame.frame_index:05d}.json"
        if not path.exists():
            raise ParseError(f"missing assignment document {path}")
        out.append(assignment_from_doc(read_json(path), frame, path))
    return out


def corrections_to_doc(corrections: CorrectionSet) -> dict:
    return {
        "version": FORMAT_VERSION,
        "entries": [
            {"frame": f, "id": nid, "label": lab}
            for f, nid, lab in sorted(corrections.entries)
        ],
    }


def corrections_from_doc(doc: dict, path="<doc>") -> CorrectionSet:
    _check_version(doc, path)
    return CorrectionSet(tuple(
        (int(e["frame"]), str(e["id"]), int(e["label"])) for e in doc["entries"]
    ))


def save_corrections(corrections: CorrectionSet, path: Path) -> None:
    write_json(corrections_to_doc(corrections), path)


def load_corrections(path: Path) -> CorrectionSet:
    return corrections_from_doc(read_json(path), path)


def correspondences_to_doc(correspondences: list[FileCorrespondence]) -> dict:
    return {
        "version": FORMAT_VERSION,
        "pairs": [
            {"frame_t": c.frame_index_t, "mapping": list(c.mapping)}
            for c in correspondences
        ],
    }


def correspondences_from_doc(doc: dict, path="<doc>") -> list[FileCorrespondence]:
    _check_version(doc, path)
    return [FileCorrespondence(int(p["frame_t"]), tuple(p["mapping"])) for p in doc["pairs"]]


def forest_to_doc(forest: LineageForest) -> dict:
    edges = sorted(forest.edges, key=lambda e: (e.parent[0], e.parent[1]))
    return {
        "version": FORMAT_VERSION,
        "edges": [
            {"frame": e.parent[0], "parent": e.parent[1],
             "children": [cid for _, cid in e.children]}
            for e in edges
        ],
    }


def forest_from_doc(doc: dict, path="<doc>") -> LineageForest:
    _check_version(doc, path)
    edges = [
        LineageEdge(
            (int(e["frame"]), str(e["parent"])),
            tuple((int(e["frame"]) + 1, str(c)) for c in e["children"]),
        )
        for e in doc["edges"]
    ]
    return LineageForest(edges)


def metrics_to_doc(metrics) -> dict:
    return {
        "tp": metrics.tp, "fp": metrics.fp, "fn": metrics.fn,
        "precision": metrics.precision, "recall": metrics.recall,
    }


def truth_to_doc(truth: GroundTruth) -> dict:
    return {
        "version": FORMAT_VERSION,
        "labels": [
            {"frame": t, "labels": {nid: int(lab) for nid, lab in labels.items()}}
            for t, labels in enumerate(truth.labels)
        ],
        "edges": [
            {"frame": e.parent[0], "parent": e.parent[1],
             "children": [cid for _, cid in e.children]}
            for e in sorted(truth.edges, key=lambda e: (e.parent[0], e.parent[1]))
        ],
        "divisions": [
            {"frame": f, "parent": p, "daughters": [d1, d2]}
            for f, p, d1, d2 in truth.divisions
        ],
    }


def save_truth(truth: GroundTruth, path: Path) -> None:
    write_json(truth_to_doc(truth), path)


def load_truth(path: Path) -> GroundTruth:
    doc = read_json(path)
    _check_version(doc, path)
    truth = GroundTruth()
    for entry in doc["labels"]:
        truth.labels.append({nid: int(lab) for nid, lab in entry["labels"].items()})
    for e in doc["edges"]:
        truth.edges.append(LineageEdge(
            (int(e["frame"]), str(e["parent"])),
            tuple((int(e["frame"]) + 1, str(c)) for c in e["children"]),
        ))
    for d in doc["divisions"]:
        truth.divisions.append((int(d["frame"]), str(d["parent"]),
                                str(d["daughters"][0]), str(d["daughters"][1])))
    return truth


# ---------------------------------------------------------------- manifest

def config_to_doc(config) -> dict:
    return asdict(config)


def ga_config_from_doc(doc: dict) -> GAConfig:
    return GAConfig(**doc)


def kmeans_config_from_doc(doc: dict) -> KMeansConfig:
    return KMeansConfig(**doc)


def synth_config_from_doc(doc: dict) -> SyntheticConfig:
    return SyntheticConfig(**doc)
