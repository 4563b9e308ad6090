import filecmp
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from rootline import io
from rootline.clustering import CorrectionSet, KMeansConfig, corrections_to_truth
from rootline.pipeline import PipelineConfig, frame_seed, rerun_from_manifest, run_pipeline
from rootline.synth import generate, scenario_presets

from conftest import DESK_GA


def pipeline_config():
    return PipelineConfig(seed=0, ga=DESK_GA, kmeans=KMeansConfig())


@pytest.fixture(scope="module")
def straight_small():
    cfg = replace(scenario_presets()["straight"], num_frames=8)
    return generate(cfg)


def test_straight_preset_perfect_metrics(straight_small):
    dataset, truth = straight_small
    result = run_pipeline(dataset, pipeline_config(), truth=truth)
    assert result.metrics.precision == 1.0
    assert result.metrics.recall == 1.0
    assert not result.forest.errors


def test_frame_seed_stable():
    assert frame_seed(0, 0, 0) == frame_seed(0, 0, 0)
    assert frame_seed(0, 0, 0) != frame_seed(0, 1, 0)
    assert frame_seed(0, 0, 0) != frame_seed(0, 0, 1)
    assert frame_seed(0, 0, 0) != frame_seed(1, 0, 0)


def test_injected_errors_fixed_by_corrections():
    cfg = replace(scenario_presets()["bent_rotating"], num_frames=8)
    dataset, truth = generate(cfg)
    config = pipeline_config()

    clean = run_pipeline(dataset, config, truth=truth)
    assert clean.metrics.precision == 1.0  # clustering is clean on this preset

    # sabotage three nuclei across two frames via a corrections overlay
    sabotage = CorrectionSet((
        (1, dataset.frames[1].nuclei[0].nucleus_id,
         (clean.assignments[1].labels[dataset.frames[1].nuclei[0].nucleus_id] + 1) % 8),
        (1, dataset.frames[1].nuclei[9].nucleus_id,
         (clean.assignments[1].labels[dataset.frames[1].nuclei[9].nucleus_id] + 3) % 8),
        (4, dataset.frames[4].nuclei[5].nucleus_id,
         (clean.assignments[4].labels[dataset.frames[4].nuclei[5].nucleus_id] + 5) % 8),
    ))
    broken = run_pipeline(dataset, config, corrections=sabotage, truth=truth)
    assert broken.metrics.recall < 1.0 or broken.forest.errors

    # oracle corrections per frame restore exact tracking
    entries = []
    for assignment, labels in zip(broken.assignments, truth.labels):
        entries.extend(corrections_to_truth(assignment, labels).entries)
    fixed = run_pipeline(dataset, config, corrections=CorrectionSet(tuple(entries)),
                         truth=truth)
    assert fixed.metrics.precision == 1.0
    assert fixed.metrics.recall == 1.0


def test_pipeline_persists_and_reruns_byte_identical(tmp_path):
    cfg = replace(scenario_presets()["rotating"], num_frames=5)
    dataset, truth = generate(cfg)
    out1 = tmp_path / "run1"
    run_pipeline(dataset, pipeline_config(), truth=truth, out_dir=out1)
    for name in ("manifest.json", "dataset.csv", "planes.json", "forest.json",
                 "metrics.json", "correspondences.json", "corrections.json"):
        assert (out1 / name).exists(), name

    out2 = tmp_path / "run2"
    rerun_from_manifest(out1 / "manifest.json", out2)
    compare = ["dataset.csv", "planes.json", "forest.json", "metrics.json",
               "correspondences.json", "manifest.json", "corrections.json"]
    match, mismatch, errors = filecmp.cmpfiles(out1, out2, compare, shallow=False)
    assert mismatch == [] and errors == []
    sub1 = sorted(p.name for p in (out1 / "assignments").glob("*.json"))
    sub2 = sorted(p.name for p in (out2 / "assignments").glob("*.json"))
    assert sub1 == sub2
    for name in sub1:
        assert (out1 / "assignments" / name).read_bytes() == \
            (out2 / "assignments" / name).read_bytes()


def test_manifest_checksums_verify(tmp_path):
    cfg = replace(scenario_presets()["straight"], num_frames=3)
    dataset, truth = generate(cfg)
    out = tmp_path / "run"
    run_pipeline(dataset, pipeline_config(), truth=truth, out_dir=out)
    manifest = io.read_json(out / "manifest.json")
    for entry in manifest["stages"].values():
        assert io.sha256_file(out / entry["path"]) == entry["sha256"]


def test_report_bundle(tmp_path):
    from rootline.report import render_pipeline_report

    cfg = replace(scenario_presets()["dividing"], num_frames=6)
    dataset, truth = generate(cfg)
    result = run_pipeline(dataset, pipeline_config(), truth=truth, out_dir=tmp_path / "o")
    written = render_pipeline_report(dataset, result, tmp_path / "o", truth=truth)
    assert (tmp_path / "o" / "report" / "ga_convergence.png").exists()
    assert (tmp_path / "o" / "report" / "lineage.png").exists()
    assert (tmp_path / "o" / "report" / "frames.csv").exists()
    assert (tmp_path / "o" / "report" / "metrics_by_frame.csv").exists()
    assert all(Path(p).stat().st_size > 0 for p in written)
