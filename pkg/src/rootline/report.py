"""Figure rendering and delimited report files for pipeline and probe runs.

Every function writes a PNG to the given path; the CSV writers sit next
to them so a report directory carries both the numbers and the pictures.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .clustering import FileAssignment
from .ga import GAResult, fitness
from .geometry import ProjectionPlane, to_plane_coords
from .lineage import LineageForest
from .model import Dataset, FrameCloud, Phase

# eight fixed file colors, used everywhere a file label is drawn
FILE_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
               "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _finish(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def projection_figure(frame: FrameCloud, assignment: FileAssignment, path: Path,
                      title: str | None = None) -> Path:
    """Chart-plane scatter of one frame, colored by file, mitotic ringed."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for n in frame.nuclei:
        u, v = assignment.coords[n.nucleus_id]
        lab = assignment.labels[n.nucleus_id]
        ax.scatter(u, v, s=28, color=FILE_COLORS[lab],
                   edgecolors="red" if n.phase is Phase.MITOTIC else "none",
                   linewidths=1.2, zorder=3)
    cent = assignment.centroids
    ax.scatter(cent[:, 0], cent[:, 1], marker="x", c="black", s=40, zorder=4)
    ax.set_xlabel("u (um)")
    ax.set_ylabel("v (um)")
    ax.set_title(title or f"frame {frame.frame_index}")
    ax.set_aspect("equal")
    return _finish(fig, path)


def fitness_history_figure(results: list[GAResult], path: Path) -> Path:
    """Best-fitness-per-generation curves, one line per frame."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for t, res in enumerate(results):
        ax.plot(res.fitness_history, lw=0.8,
                label=f"frame {t}" if len(results) <= 8 else None)
    ax.set_xlabel("generation")
    ax.set_ylabel("best fitness (um)")
    ax.set_title("GA convergence")
    if len(results) <= 8:
        ax.legend(fontsize=7)
    return _finish(fig, path)


def distance_profile_figure(points: np.ndarray, planes: dict[str, ProjectionPlane],
                            path: Path) -> Path:
    """Distances from projected nuclei to their centroid, per plane."""
    fig, axes = plt.subplots(1, len(planes), figsize=(3.2 * len(planes), 3.2),
                             squeeze=False)
    for ax, (name, plane) in zip(axes[0], planes.items()):
        coords = to_plane_coords(points, plane)
        dist = np.linalg.norm(coords - coords.mean(axis=0), axis=1)
        ax.plot(np.sort(dist), ".", ms=3)
        ax.set_title(f"{name}\nfitness={fitness(points, plane):.3f}", fontsize=9)
        ax.set_xlabel("nucleus (sorted)")
        ax.set_ylabel("distance to centroid (um)")
    return _finish(fig, path)


def line_tracking_figure(dataset: Dataset, propagated: list[FileAssignment],
                         frames: list[int], path: Path) -> Path:
    """Small multiples of chart scatters with globally consistent colors."""
    fig, axes = plt.subplots(1, len(frames), figsize=(3.0 * len(frames), 3.2),
                             squeeze=False)
    for ax, t in zip(axes[0], frames):
        a = propagated[t]
        for nid, (u, v) in a.coords.items():
            ax.scatter(u, v, s=18, color=FILE_COLORS[a.labels[nid]])
        ax.set_title(f"frame {t}", fontsize=9)
        ax.set_aspect("equal")
    return _finish(fig, path)


def lineage_figure(dataset: Dataset, forest: LineageForest, path: Path,
                   max_tracks: int | None = None) -> Path:
    """Time vs y plot of lineage links; mitotic nuclei drawn red."""
    y_of = {}
    phase_of = {}
    for frame in dataset.frames:
        for n in frame.nuclei:
            y_of[(frame.frame_index, n.nucleus_id)] = n.y
            phase_of[(frame.frame_index, n.nucleus_id)] = n.phase
    roots = forest.roots()
    if max_tracks is not None:
        roots = roots[:max_tracks]
    keep = set()
    for root in roots:
        keep.add(root)
        keep.update(forest.descendants(root))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for edge in forest.edges:
        if edge.parent not in keep:
            continue
        t0, y0 = edge.parent[0], y_of[edge.parent]
        for child in edge.children:
            ax.plot([t0, child[0]], [y0, y_of[child]], c="0.6", lw=0.6, zorder=1)
    nodes = sorted(keep)
    ts = [n[0] for n in nodes]
    ys = [y_of[n] for n in nodes]
    cs = ["red" if phase_of[n] is Phase.MITOTIC else "tab:blue" for n in nodes]
    ax.scatter(ts, ys, c=cs, s=8, zorder=2)
    ax.set_xlabel("frame")
    ax.set_ylabel("y (um)")
    ax.set_title("nucleus lineage (red = mitotic)")
    return _finish(fig, path)


def descent_comparison_figure(final_fitnesses: list[float], ga_fitness: float,
                              path: Path) -> Path:
    """Multi-start descent outcomes against the GA optimum."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(sorted(final_fitnesses), "o", ms=4, label="gradient descent finals")
    ax.axhline(ga_fitness, color="tab:green", lw=1.2, label="GA best")
    ax.set_xlabel("start (sorted by outcome)")
    ax.set_ylabel("final fitness (um)")
    ax.legend(fontsize=8)
    return _finish(fig, path)


def clusters_figure(coords: np.ndarray, labels: np.ndarray, path: Path,
                    title: str = "") -> Path:
    """Generic labeled 2D scatter; label -1 (noise) drawn as grey crosses."""
    fig, ax = plt.subplots(figsize=(5, 5))
    labels = np.asarray(labels)
    for lab in sorted(set(labels.tolist())):
        pts = coords[labels == lab]
        if lab < 0:
            ax.scatter(pts[:, 0], pts[:, 1], marker="x", c="0.5", s=24, label="noise")
        else:
            ax.scatter(pts[:, 0], pts[:, 1], s=20, color=FILE_COLORS[lab % len(FILE_COLORS)])
    ax.set_aspect("equal")
    ax.set_title(title)
    return _finish(fig, path)


# -------------------------------------------------------------- CSV reports

def write_frame_summary_csv(rows: list[dict], path: Path) -> Path:
    """Per-frame summary rows (frame, fitness, generations, accuracy...)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("", encoding="utf-8")
        return path
    fields = list(rows[0].keys())
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_metrics_breakdown_csv(breakdown, path: Path) -> Path:
    rows = [
        {"frame": frame, "tp": m.tp, "fp": m.fp, "fn": m.fn,
         "precision": m.precision, "recall": m.recall}
        for frame, m in breakdown
    ]
    return write_frame_summary_csv(rows, path)


def render_pipeline_report(dataset: Dataset, result, out_dir: Path,
                           truth=None) -> list[Path]:
    """Standard report bundle for a pipeline run: figures plus CSVs."""
    out = Path(out_dir) / "report"
    written = []
    mid = len(dataset) // 2
    frames = sorted({0, mid, len(dataset) - 1})
    for t in frames:
        written.append(projection_figure(
            dataset.frames[t], result.propagated[t], out / f"projection_frame{t:04d}.png"))
    written.append(fitness_history_figure(result.ga_results, out / "ga_convergence.png"))
    written.append(line_tracking_figure(dataset, result.propagated, frames,
                                        out / "line_tracking.png"))
    written.append(lineage_figure(dataset, result.forest, out / "lineage.png"))
    rows = [
        {"frame": t, "fitness": r.best_fitness, "generations": r.generations_run,
         "nuclei": len(dataset.frames[t])}
        for t, r in enumerate(result.ga_results)
    ]
    written.append(write_frame_summary_csv(rows, out / "frames.csv"))
    if result.metrics is not None and truth is not None:
        from .evaluation import forest_links, per_frame_breakdown
        from .lineage import LineageForest

        breakdown = per_frame_breakdown(
            forest_links(result.forest), forest_links(LineageForest(list(truth.edges))))
        written.append(write_metrics_breakdown_csv(breakdown, out / "metrics_by_frame.csv"))
    return written
