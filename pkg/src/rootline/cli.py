"""Command-line interface.

Subcommands mirror the pipeline stages (synth, project, cluster, lines,
track, eval, pipeline) plus serve (refinement API/UI backend) and probe
(baseline comparisons). `--figures` makes report-rendering commands write
PNGs next to their delimited outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .baselines import (dbscan, finite_diff_hessian, greedy_euclidean_link,
                        kmeans_3d_control, pca_plane, projected_gradient_descent,
                        rotated_representatives)
from .clustering import CorrectionSet, KMeansConfig, apply_corrections, cluster_frame, \
    clustering_accuracy
from .evaluation import compare_links, forest_links, per_frame_breakdown
from .ga import GAConfig, optimize_plane
from .geometry import ProjectionPlane, to_plane_coords
from .lineage import LineageForest, track_dataset
from .lines import match_files, propagate_labels, select_representatives
from .pipeline import PipelineConfig, frame_seed, rerun_from_manifest, run_pipeline
from .synth import SyntheticConfig, generate, scenario_presets


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")
    p.add_argument("--out", type=Path, required=True, help="output path or directory")
    p.add_argument("--config", type=Path, default=None,
                   help="JSON config file with ga/kmeans/synth sections")


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--crossover-prob", type=float, default=None)
    p.add_argument("--mutation-prob", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)


def _add_kmeans_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-init", type=int, default=None,
                   help="number of K-means restarts")


def _load_config_file(path: Path | None) -> dict:
    if path is None:
        return {}
    return io.read_json(path)


def _ga_config(args) -> GAConfig:
    doc = _load_config_file(args.config).get("ga", {})
    cfg = io.ga_config_from_doc(doc) if doc else GAConfig()
    overrides = {}
    if getattr(args, "population", None) is not None:
        overrides["population_size"] = args.population
    if getattr(args, "max_iter", None) is not None:
        overrides["max_iterations"] = args.max_iter
    if getattr(args, "crossover_prob", None) is not None:
        overrides["crossover_prob"] = args.crossover_prob
    if getattr(args, "mutation_prob", None) is not None:
        overrides["mutation_prob"] = args.mutation_prob
    if getattr(args, "tol", None) is not None:
        overrides["tolerance"] = args.tol
    return replace(cfg, **overrides) if overrides else cfg


def _kmeans_config(args) -> KMeansConfig:
    doc = _load_config_file(args.config).get("kmeans", {})
    cfg = io.kmeans_config_from_doc(doc) if doc else KMeansConfig()
    if getattr(args, "k_init", None) is not None:
        cfg = replace(cfg, n_init=args.k_init)
    return cfg


def _synth_config(args) -> SyntheticConfig:
    doc = _load_config_file(args.config).get("synth", {})
    if args.preset is not None:
        presets = scenario_presets()
        if args.preset not in presets:
            raise SystemExit(f"unknown preset {args.preset!r}; choose from {sorted(presets)}")
        cfg = presets[args.preset]
    elif doc:
        cfg = io.synth_config_from_doc(doc)
    else:
        cfg = SyntheticConfig()
    cfg = replace(cfg, rng_seed=args.seed)
    if getattr(args, "frames", None) is not None:
        cfg = replace(cfg, num_frames=args.frames)
    return cfg


def _load_dataset(args):
    return io.load_dataset(args.dataset, voxel_units=getattr(args, "voxel_units", False))


def cmd_synth(args) -> int:
    cfg = _synth_config(args)
    dataset, truth = generate(cfg)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    io.save_dataset(dataset, args.out)
    if args.truth is not None:
        io.save_truth(truth, args.truth)
    print(f"wrote {len(dataset)} frames, "
          f"{sum(len(f) for f in dataset.frames)} nuclei -> {args.out}")
    return 0


def cmd_project(args) -> int:
    dataset = _load_dataset(args)
    ga_cfg = _ga_config(args)
    planes = []
    for frame in dataset.frames:
        res = optimize_plane(frame, replace(ga_cfg, rng_seed=frame_seed(args.seed, frame.frame_index, 0)))
        planes.append({"frame": frame.frame_index, "normal": list(res.best_plane.normal),
                       "fitness": res.best_fitness, "generations": res.generations_run})
        print(f"frame {frame.frame_index}: fitness {res.best_fitness:.6f} "
              f"({res.generations_run} generations)")
    io.write_json({"version": io.FORMAT_VERSION, "planes": planes}, args.out)
    return 0


def cmd_cluster(args) -> int:
    dataset = _load_dataset(args)
    km_cfg = _kmeans_config(args)
    planes_doc = io.read_json(args.planes)
    normals = {p["frame"]: ProjectionPlane(tuple(p["normal"])) for p in planes_doc["planes"]}
    assignments = []
    for frame in dataset.frames:
        a = cluster_frame(frame, normals[frame.frame_index],
                          replace(km_cfg, rng_seed=frame_seed(args.seed, frame.frame_index, 1)))
        assignments.append(a)
    if args.corrections is not None:
        corr = io.load_corrections(args.corrections)
        assignments = [apply_corrections(a, corr) for a in assignments]
    io.save_assignments(assignments, args.out)
    print(f"wrote {len(assignments)} assignment documents -> {args.out}")
    return 0


def cmd_lines(args) -> int:
    dataset = _load_dataset(args)
    assignments = io.load_assignments(args.assignments, dataset)
    reps = [select_representatives(f, a) for f, a in zip(dataset.frames, assignments)]
    corr = [match_files(reps[t], reps[t + 1], assignments[t].plane, assignments[t + 1].plane)
            for t in range(len(dataset) - 1)]
    propagated = propagate_labels(assignments, corr)
    args.out.mkdir(parents=True, exist_ok=True)
    io.write_json(io.correspondences_to_doc(corr), args.out / "correspondences.json")
    io.save_assignments(propagated, args.out / "propagated")
    print(f"matched {len(corr)} frame pairs -> {args.out}")
    return 0


def cmd_track(args) -> int:
    dataset = _load_dataset(args)
    assignments = io.load_assignments(args.assignments, dataset)
    forest = track_dataset(dataset, assignments)
    io.write_json(io.forest_to_doc(forest), args.out)
    print(f"{len(forest.edges)} edges, {len(forest.division_events())} divisions, "
          f"{len(forest.errors)} reconciliation errors -> {args.out}")
    for err in forest.errors:
        print(f"  warning: {err}", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    pred = io.forest_from_doc(io.read_json(args.pred), args.pred)
    truth = io.load_truth(args.truth)
    truth_forest = LineageForest(list(truth.edges))
    metrics = compare_links(forest_links(pred), forest_links(truth_forest))
    io.write_json(io.metrics_to_doc(metrics), args.out)
    print(f"tp={metrics.tp} fp={metrics.fp} fn={metrics.fn} "
          f"precision={metrics.precision:.1%} recall={metrics.recall:.1%}")
    if args.per_frame is not None:
        from .report import write_metrics_breakdown_csv
        breakdown = per_frame_breakdown(forest_links(pred), forest_links(truth_forest))
        write_metrics_breakdown_csv(breakdown, args.per_frame)
    return 0


def cmd_pipeline(args) -> int:
    if args.manifest is not None:
        result = rerun_from_manifest(args.manifest, args.out)
        dataset = io.load_dataset(args.out / "dataset.csv")
        truth = io.load_truth(args.out / "truth.json") if (args.out / "truth.json").exists() else None
    else:
        truth = None
        if args.preset is not None:
            dataset, truth = generate(_synth_config(args))
        else:
            if args.dataset is None:
                raise SystemExit("pipeline needs --dataset, --preset or --manifest")
            dataset = _load_dataset(args)
            if args.truth is not None:
                truth = io.load_truth(args.truth)
        corrections = io.load_corrections(args.corrections) if args.corrections else None
        config = PipelineConfig(seed=args.seed, ga=_ga_config(args), kmeans=_kmeans_config(args))
        result = run_pipeline(dataset, config, corrections=corrections, truth=truth,
                              out_dir=args.out, stage_callback=lambda s: print(f"stage: {s}"))
    if result.metrics is not None:
        m = result.metrics
        print(f"metrics: tp={m.tp} fp={m.fp} fn={m.fn} "
              f"precision={m.precision:.1%} recall={m.recall:.1%}")
    if result.forest.errors:
        print(f"{len(result.forest.errors)} reconciliation errors (see logs)", file=sys.stderr)
    if args.figures:
        from .report import render_pipeline_report
        written = render_pipeline_report(dataset, result, args.out, truth=truth)
        print(f"report: {len(written)} files under {args.out / 'report'}")
    print(f"pipeline outputs -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(args.state, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_probe(args) -> int:
    from . import report

    dataset, truth = generate(_synth_config(args))
    frame = dataset.frames[args.frame]
    points = frame.positions()
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    ga_cfg = _ga_config(args)
    ga_res = optimize_plane(frame, replace(ga_cfg, rng_seed=args.seed))
    rows: list[dict] = []

    if args.kind == "pca":
        km = KMeansConfig(rng_seed=args.seed)
        for name, plane in [("ga", ga_res.best_plane),
                            ("pca_c23", pca_plane(points, "c23")),
                            ("pca_c12", pca_plane(points, "c12"))]:
            a = cluster_frame(frame, plane, km)
            acc = clustering_accuracy(a, truth.labels[args.frame])
            rows.append({"plane": name, "accuracy": acc})
            if args.figures:
                report.projection_figure(frame, a, out / f"pca_{name}.png",
                                         title=f"{name} accuracy={acc:.3f}")
        report.write_frame_summary_csv(rows, out / "pca.csv")
    elif args.kind == "gradient":
        rng = np.random.default_rng(args.seed)
        finals = []
        for i in range(args.starts):
            start = rng.normal(size=3)
            start /= np.linalg.norm(start)
            res = projected_gradient_descent(points, ProjectionPlane(tuple(start)))
            finals.append(res.fitness)
            rows.append({"start": i, "final_fitness": res.fitness,
                         "iterations": len(res.path) - 1})
        report.write_frame_summary_csv(rows, out / "gradient.csv")
        if args.figures:
            report.descent_comparison_figure(finals, ga_res.best_fitness,
                                             out / "gradient.png")
    elif args.kind == "hessian":
        rng = np.random.default_rng(args.seed)
        for i in range(args.starts):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            probe = finite_diff_hessian(points, ProjectionPlane(tuple(n)))
            rows.append({"probe": i,
                         "eig_min": probe.eigenvalues[0],
                         "eig_mid": probe.eigenvalues[1],
                         "eig_max": probe.eigenvalues[2],
                         "asymmetry": probe.asymmetry})
        report.write_frame_summary_csv(rows, out / "hessian.csv")
    elif args.kind == "dbscan":
        coords = to_plane_coords(points, ga_res.best_plane)
        labels = dbscan(coords, eps=args.eps, min_pts=args.min_pts)
        clusters = len(set(labels.tolist()) - {-1})
        noise = int((labels < 0).sum())
        rows.append({"eps": args.eps, "min_pts": args.min_pts,
                     "clusters": clusters, "noise": noise})
        report.write_frame_summary_csv(rows, out / "dbscan.csv")
        if args.figures:
            report.clusters_figure(coords, labels, out / "dbscan.png",
                                   title=f"dbscan eps={args.eps} -> {clusters} clusters")
        print(f"dbscan found {clusters} clusters, {noise} noise points")
    elif args.kind == "kmeans3d":
        km = KMeansConfig(rng_seed=args.seed)
        labels3d, acc3d = kmeans_3d_control(frame, km, truth.labels[args.frame])
        a = cluster_frame(frame, ga_res.best_plane, km)
        acc2d = clustering_accuracy(a, truth.labels[args.frame])
        rows.append({"method": "kmeans_3d", "accuracy": acc3d})
        rows.append({"method": "kmeans_projected_ga", "accuracy": acc2d})
        report.write_frame_summary_csv(rows, out / "kmeans3d.csv")
        print(f"3D accuracy {acc3d:.3f} vs projected {acc2d:.3f}")
    elif args.kind == "euclidean":
        from .clustering import FileAssignment
        coords = to_plane_coords(points, ga_res.best_plane)
        assignment = FileAssignment(
            frame.frame_index, dict(truth.labels[args.frame]),
            np.zeros((8, 2)), ga_res.best_plane,
            {nid: (float(u), float(v)) for nid, (u, v) in zip(frame.ids(), coords)})
        reps_t = select_representatives(frame, assignment)
        reps_t1 = rotated_representatives(reps_t, args.degrees, 3.0, args.seed)
        mapping, duplicates = greedy_euclidean_link(reps_t, reps_t1)
        corr = match_files(reps_t, reps_t1, ga_res.best_plane, ga_res.best_plane)
        rows = [{"file": lab, "greedy_target": mapping[lab], "angular_target": corr[lab]}
                for lab in range(8)]
        report.write_frame_summary_csv(rows, out / "euclidean.csv")
        print(f"greedy duplicates: {duplicates}; angular matching is a bijection")
    print(f"probe outputs -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rootline",
                                     description="Root cortex nucleus tracking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset with ground truth")
    _add_common(p)
    p.add_argument("--preset", default="rotating", help="scenario preset name")
    p.add_argument("--frames", type=int, default=None, help="override frame count")
    p.add_argument("--truth", type=Path, default=None, help="also write ground truth JSON")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("project", help="find per-frame GA projection planes")
    _add_common(p)
    _add_ga_flags(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--voxel-units", action="store_true",
                   help="dataset coordinates are voxel indices")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("cluster", help="k-means the projected frames into 8 files")
    _add_common(p)
    _add_kmeans_flags(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--voxel-units", action="store_true")
    p.add_argument("--planes", type=Path, required=True)
    p.add_argument("--corrections", type=Path, default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("lines", help="match files across frames and propagate labels")
    _add_common(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--voxel-units", action="store_true")
    p.add_argument("--assignments", type=Path, required=True)
    p.set_defaults(func=cmd_lines)

    p = sub.add_parser("track", help="link nuclei into a lineage forest")
    _add_common(p)
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--voxel-units", action="store_true")
    p.add_argument("--assignments", type=Path, required=True,
                   help="propagated assignments directory")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a forest against ground truth")
    _add_common(p)
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--per-frame", type=Path, default=None,
                   help="also write a per-frame CSV breakdown")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline", help="run every stage end to end")
    _add_common(p)
    _add_ga_flags(p)
    _add_kmeans_flags(p)
    p.add_argument("--dataset", type=Path, default=None)
    p.add_argument("--voxel-units", action="store_true")
    p.add_argument("--preset", default=None, help="generate this preset instead of loading")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--truth", type=Path, default=None)
    p.add_argument("--corrections", type=Path, default=None)
    p.add_argument("--manifest", type=Path, default=None,
                   help="re-run a previous pipeline byte-identically")
    p.add_argument("--figures", action="store_true", help="render the report bundle")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("serve", help="HTTP API for the refinement UI")
    p.add_argument("--state", type=Path, required=True,
                   help="pipeline output directory to serve")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", type=Path, default=None, help="static UI directory to mount")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("probe", help="baseline comparisons and landscape probes")
    _add_common(p)
    _add_ga_flags(p)
    p.add_argument("--kind", required=True,
                   choices=["pca", "gradient", "hessian", "dbscan", "kmeans3d", "euclidean"])
    p.add_argument("--preset", default="bent_rotating")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--frame", type=int, default=0, help="frame index to probe")
    p.add_argument("--starts", type=int, default=20)
    p.add_argument("--eps", type=float, default=3.0)
    p.add_argument("--min-pts", type=int, default=3)
    p.add_argument("--degrees", type=float, default=23.0,
                   help="euclidean probe: inter-frame rotation")
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=cmd_probe)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
