import numpy as np
import pytest

from rootline.ga import fitness
from rootline.geometry import ProjectionPlane
from rootline.model import NUM_FILES, Phase
from rootline.synth import SyntheticConfig, generate, scenario_presets

from dataclasses import replace


def test_generate_deterministic():
    cfg = replace(scenario_presets()["dividing"], num_frames=15)
    a_ds, a_truth = generate(cfg)
    b_ds, b_truth = generate(cfg)
    for fa, fb in zip(a_ds.frames, b_ds.frames):
        assert fa == fb
    assert a_truth.labels == b_truth.labels
    assert a_truth.edges == b_truth.edges
    assert a_truth.divisions == b_truth.divisions


def test_different_seed_differs():
    cfg = replace(scenario_presets()["rotating"], num_frames=3)
    a_ds, _ = generate(cfg)
    b_ds, _ = generate(replace(cfg, rng_seed=99))
    assert a_ds.frames[0] != b_ds.frames[0]


def test_no_divisions_means_constant_counts():
    cfg = replace(scenario_presets()["straight"], num_frames=10)
    dataset, truth = generate(cfg)
    for frame in dataset.frames:
        assert len(frame) == NUM_FILES * cfg.nuclei_per_file_init
    assert all(len(e.children) == 1 for e in truth.edges)
    assert truth.divisions == []


def test_division_log_matches_counts():
    cfg = replace(scenario_presets()["dividing"], num_frames=20, rng_seed=3)
    dataset, truth = generate(cfg)
    # per frame pair, the net growth equals the number of completed splits
    splits_at = {}
    for f, parent, d1, d2 in truth.divisions:
        splits_at[f] = splits_at.get(f, 0) + 1
    for t in range(len(dataset) - 1):
        growth = len(dataset.frames[t + 1]) - len(dataset.frames[t])
        assert growth == splits_at.get(t + 1, 0)
    # division edges in the truth match the division log exactly
    assert len([e for e in truth.edges if len(e.children) == 2]) == len(truth.divisions)


def test_mitotic_phase_precedes_division():
    cfg = replace(scenario_presets()["dividing"], num_frames=20, rng_seed=5,
                  mitotic_duration_frames=2)
    dataset, truth = generate(cfg)
    for f, parent, d1, d2 in truth.divisions:
        for back in range(1, cfg.mitotic_duration_frames + 1):
            assert truth.phases[f - back][parent] is Phase.MITOTIC
        for daughter in (d1, d2):
            assert truth.phases[f][daughter] is Phase.NON_MITOTIC


def test_truth_labels_cover_every_frame():
    cfg = replace(scenario_presets()["dividing"], num_frames=12)
    dataset, truth = generate(cfg)
    for frame, labels in zip(dataset.frames, truth.labels):
        assert set(labels) == set(frame.ids())
        assert set(labels.values()) <= set(range(NUM_FILES))


def test_noiseless_straight_root_has_zero_fitness_at_axial_plane():
    cfg = replace(scenario_presets()["straight"], position_noise_um=0.0, num_frames=2)
    dataset, _ = generate(cfg)
    assert fitness(dataset.frames[0].positions(), ProjectionPlane((0, 1, 0))) < 1e-9


def test_in_file_y_order_is_stable_under_noise():
    cfg = replace(scenario_presets()["dividing"], num_frames=40, rng_seed=0)
    dataset, truth = generate(cfg)
    # nuclei of one file never swap y-order between consecutive frames
    for t in range(len(dataset) - 1):
        y_t = {n.nucleus_id: n.y for n in dataset.frames[t].nuclei}
        y_t1 = {n.nucleus_id: n.y for n in dataset.frames[t + 1].nuclei}
        common = [nid for nid in y_t if nid in y_t1]
        for lab in range(NUM_FILES):
            members = [nid for nid in common if truth.labels[t][nid] == lab]
            order_t = sorted(members, key=lambda nid: y_t[nid])
            order_t1 = sorted(members, key=lambda nid: y_t1[nid])
            assert order_t == order_t1


def test_preset_names_stable():
    assert sorted(scenario_presets()) == \
        ["bent_rotating", "dividing", "long", "rotating", "straight"]
    presets = scenario_presets()
    assert presets["straight"].bend_curvature == 0.0
    assert presets["straight"].rotation_deg_per_frame == 0.0
    assert presets["rotating"].rotation_deg_per_frame != 0.0
    assert presets["bent_rotating"].bend_curvature > 0.0
    assert presets["bent_rotating"].rotation_flip_period > 0
    assert presets["dividing"].division_prob_per_frame == 0.05
    assert presets["long"].nuclei_per_file_init > 2 * presets["straight"].nuclei_per_file_init


def test_acceptance_scale_presets():
    for name in ("straight", "rotating", "dividing"):
        cfg = scenario_presets()[name]
        assert cfg.num_frames >= 50
        assert cfg.nuclei_per_file_init >= 12


def test_config_validation():
    with pytest.raises(ValueError):
        SyntheticConfig(num_frames=0)
    with pytest.raises(ValueError):
        SyntheticConfig(rotation_deg_per_frame=25.0)
    with pytest.raises(ValueError):
        SyntheticConfig(division_prob_per_frame=1.5)
    with pytest.raises(ValueError):
        SyntheticConfig(bend_start_fraction=1.0)
    with pytest.raises(ValueError):
        SyntheticConfig(position_noise_um=-1.0)
