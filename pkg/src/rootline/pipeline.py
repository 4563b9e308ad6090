"""End-to-end pipeline: GA planes, clustering, corrections, line tracking,
lineage, optional evaluation, with every stage persisted under a manifest.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io
from .clustering import (CorrectionSet, FileAssignment, KMeansConfig,
                         apply_corrections, cluster_frame)
from .evaluation import TrackingMetrics, compare_links, forest_links
from .ga import GAConfig, GAResult, optimize_plane
from .lineage import LineageForest, track_dataset
from .lines import FileCorrespondence, match_files, propagate_labels, select_representatives
from .model import Dataset
from .synth import GroundTruth

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    ga: GAConfig = field(default_factory=GAConfig)
    kmeans: KMeansConfig = field(default_factory=KMeansConfig)


@dataclass
class PipelineResult:
    ga_results: list[GAResult]
    assignments: list[FileAssignment]          # after corrections
    correspondences: list[FileCorrespondence]
    propagated: list[FileAssignment]
    forest: LineageForest
    metrics: TrackingMetrics | None
    out_dir: Path | None


def frame_seed(master: int, frame_index: int, stage: int) -> int:
    """Stable per-frame, per-stage RNG seed derived from the master seed."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(frame_index, stage))
    return int(ss.generate_state(1)[0])


def run_pipeline(
    dataset: Dataset,
    config: PipelineConfig,
    corrections: CorrectionSet | None = None,
    truth: GroundTruth | None = None,
    out_dir: Path | None = None,
    stage_callback=None,
) -> PipelineResult:
    """Run all stages in order; persist outputs when out_dir is given.

    Stage order: per-frame GA -> per-frame K-means -> corrections ->
    representatives -> per-pair file matching -> label propagation ->
    lineage linking -> evaluation (when ground truth is present).
    """
    def stage(name: str):
        log.info("pipeline stage: %s", name)
        if stage_callback is not None:
            stage_callback(name)

    stage("ga")
    ga_results = []
    for frame in dataset.frames:
        ga_results.append(optimize_plane(
            frame, replace(config.ga, rng_seed=frame_seed(config.seed, frame.frame_index, 0))))

    stage("cluster")
    raw_assignments = [
        cluster_frame(frame, res.best_plane,
                      replace(config.kmeans, rng_seed=frame_seed(config.seed, frame.frame_index, 1)))
        for frame, res in zip(dataset.frames, ga_results)
    ]

    stage("corrections")
    assignments = raw_assignments
    if corrections is not None and corrections.entries:
        assignments = [apply_corrections(a, corrections) for a in raw_assignments]

    stage("lines")
    reps = [select_representatives(frame, a) for frame, a in zip(dataset.frames, assignments)]
    correspondences = [
        match_files(reps[t], reps[t + 1], assignments[t].plane, assignments[t + 1].plane)
        for t in range(len(dataset) - 1)
    ]
    propagated = propagate_labels(assignments, correspondences)

    stage("track")
    forest = track_dataset(dataset, propagated)
    for err in forest.errors:
        log.warning("reconciliation failure: %s", err)

    metrics = None
    if truth is not None:
        stage("eval")
        truth_forest = LineageForest(list(truth.edges))
        metrics = compare_links(forest_links(forest), forest_links(truth_forest))

    result = PipelineResult(ga_results, assignments, correspondences, propagated,
                            forest, metrics, Path(out_dir) if out_dir else None)
    if out_dir is not None:
        persist(result, dataset, config, corrections, truth, Path(out_dir))
    return result


def persist(
    result: PipelineResult,
    dataset: Dataset,
    config: PipelineConfig,
    corrections: CorrectionSet | None,
    truth: GroundTruth | None,
    out_dir: Path,
) -> None:
    """Write every stage output plus a manifest with checksums."""
    out_dir.mkdir(parents=True, exist_ok=True)
    io.save_dataset(dataset, out_dir / "dataset.csv")
    io.write_json({
        "version": io.FORMAT_VERSION,
        "planes": [
            {"frame": t, "normal": list(r.best_plane.normal),
             "fitness": r.best_fitness, "generations": r.generations_run}
            for t, r in enumerate(result.ga_results)
        ],
    }, out_dir / "planes.json")
    io.save_assignments(result.assignments, out_dir / "assignments")
    io.write_json(io.correspondences_to_doc(result.correspondences),
                  out_dir / "correspondences.json")
    io.save_assignments(result.propagated, out_dir / "propagated")
    io.write_json(io.forest_to_doc(result.forest), out_dir / "forest.json")
    io.save_corrections(corrections if corrections is not None else CorrectionSet(),
                        out_dir / "corrections.json")
    if truth is not None:
        io.save_truth(truth, out_dir / "truth.json")
    if result.metrics is not None:
        io.write_json(io.metrics_to_doc(result.metrics), out_dir / "metrics.json")

    stages = {}
    for name in ("dataset.csv", "planes.json", "correspondences.json",
                 "forest.json", "corrections.json", "truth.json", "metrics.json"):
        path = out_dir / name
        if path.exists():
            stages[name] = {"path": name, "sha256": io.sha256_file(path)}
    for sub in ("assignments", "propagated"):
        for path in sorted((out_dir / sub).glob("*.json")):
            rel = f"{sub}/{path.name}"
            stages[rel] = {"path": rel, "sha256": io.sha256_file(path)}
    io.write_json({
        "version": io.FORMAT_VERSION,
        "seed": config.seed,
        "configs": {
            "ga": io.config_to_doc(config.ga),
            "kmeans": io.config_to_doc(config.kmeans),
        },
        "stages": stages,
    }, out_dir / "manifest.json")


def rerun_from_manifest(manifest_path: Path, out_dir: Path) -> PipelineResult:
    """Re-execute a persisted run; outputs must be byte-identical."""
    manifest_path = Path(manifest_path)
    doc = io.read_json(manifest_path)
    if doc.get("version") != io.FORMAT_VERSION:
        raise io.ParseError(f"{manifest_path}: unsupported manifest version")
    state_dir = manifest_path.parent
    dataset = io.load_dataset(state_dir / "dataset.csv")
    corrections = None
    if (state_dir / "corrections.json").exists():
        corrections = io.load_corrections(state_dir / "corrections.json")
    truth = None
    if (state_dir / "truth.json").exists():
        truth = io.load_truth(state_dir / "truth.json")
    config = PipelineConfig(
        seed=int(doc["seed"]),
        ga=io.ga_config_from_doc(doc["configs"]["ga"]),
        kmeans=io.kmeans_config_from_doc(doc["configs"]["kmeans"]),
    )
    return run_pipeline(dataset, config, corrections=corrections, truth=truth, out_dir=out_dir)
