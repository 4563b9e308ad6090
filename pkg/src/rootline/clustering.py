"""Lloyd K-means over projected nuclei, accuracy scoring and corrections.

K-means is written out rather than delegated so the artifact controls the
exact determinism rules: lowest-index assignment on distance ties and
restart winners picked by (inertia, restart index). Default seeding is
greedy farthest-point (maximin): with eight tight, well-separated file
blobs, plain Forgy restarts land two centroids in one blob far too often
to be usable, while maximin covers every blob by construction. Forgy
remains available via ``init="forgy"``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .geometry import ProjectionPlane, plane_basis, to_plane_coords
from .model import NUM_FILES, FrameCloud


class InfeasibleClusteringError(ValueError):
    """Fewer distinct points than clusters requested."""


@dataclass(frozen=True)
class KMeansConfig:
    k: int = NUM_FILES
    n_init: int = 10
    max_iterations: int = 300
    tolerance: float = 1e-4
    rng_seed: int = 0
    init: str = "maximin"  # or "forgy"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.n_init < 1:
            raise ValueError("n_init must be >= 1")
        if self.init not in ("maximin", "forgy"):
            raise ValueError(f"init must be 'maximin' or 'forgy', got {self.init!r}")


@dataclass(frozen=True)
class KMeansRun:
    labels: np.ndarray          # (N,) int
    centroids: np.ndarray       # (k, d)
    inertia: float
    inertia_history: tuple[float, ...]
    iterations: int


@dataclass(frozen=True)
class FileAssignment:
    """Per-frame mapping of nucleus ids to one of the eight file labels."""

    frame_index: int
    labels: dict[str, int]
    centroids: np.ndarray                 # (8, 2)
    plane: ProjectionPlane
    coords: dict[str, tuple[float, float]]  # 2D chart position per nucleus

    def label_array(self, ids: list[str]) -> np.ndarray:
        return np.array([self.labels[i] for i in ids], dtype=int)


@dataclass(frozen=True)
class CorrectionSet:
    """Manual relabels: (frame, nucleus, corrected label) entries."""

    entries: tuple[tuple[int, str, int], ...] = ()

    def __post_init__(self):
        seen = set()
        for frame, nucleus_id, label in self.entries:
            if not 0 <= label < NUM_FILES:
                raise ValueError(f"corrected label must be in 0..7, got {label}")
            key = (frame, nucleus_id)
            if key in seen:
                raise ValueError(f"duplicate correction for frame {frame}, id {nucleus_id!r}")
            seen.add(key)

    def for_frame(self, frame_index: int) -> dict[str, int]:
        return {nid: label for f, nid, label in self.entries if f == frame_index}

    def merged_with(self, other: "CorrectionSet") -> "CorrectionSet":
        """Overlay `other` on top of self (last write wins per (frame, id))."""
        combined = {(f, nid): label for f, nid, label in self.entries}
        combined.update({(f, nid): label for f, nid, label in other.entries})
        return CorrectionSet(tuple((f, nid, lab) for (f, nid), lab in sorted(combined.items())))


def _assign(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)  # argmin takes the lowest index on ties


def _inertia(points: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(((points - centroids[labels]) ** 2).sum())


def _lloyd(points: np.ndarray, centroids: np.ndarray, config: KMeansConfig) -> KMeansRun:
    k = centroids.shape[0]
    labels = _assign(points, centroids)
    history = []
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        new_centroids = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j] > 0:
                new_centroids[j] = points[labels == j].mean(axis=0)
        # empty-cluster repair: the farthest member of the largest cluster
        # becomes the empty centroid
        for j in np.flatnonzero(counts == 0):
            big = int(counts.argmax())
            members = np.flatnonzero(labels == big)
            far = members[((points[members] - new_centroids[big]) ** 2).sum(axis=1).argmax()]
            new_centroids[j] = points[far]
            labels[far] = j
            counts = np.bincount(labels, minlength=k)

        new_labels = _assign(points, new_centroids)
        shift = float(np.linalg.norm(new_centroids - centroids, axis=1).max())
        stable = bool((new_labels == labels).all())
        centroids, labels = new_centroids, new_labels
        history.append(_inertia(points, labels, centroids))
        if stable or shift < config.tolerance:
            break
    return KMeansRun(labels, centroids, history[-1], tuple(history), iterations)


def _maximin_centroids(distinct: np.ndarray, k: int, first: int) -> np.ndarray:
    """Greedy farthest-point seeding starting from a given point index."""
    chosen = [first]
    d2 = ((distinct - distinct[first]) ** 2).sum(axis=1)
    for _ in range(k - 1):
        nxt = int(d2.argmax())  # lowest index on ties
        chosen.append(nxt)
        d2 = np.minimum(d2, ((distinct - distinct[nxt]) ** 2).sum(axis=1))
    return distinct[chosen].copy()


def kmeans(points, config: KMeansConfig) -> KMeansRun:
    """Best of n_init seeded Lloyd restarts over distinct-point seedings."""
    points = np.asarray(points, dtype=float)
    distinct = np.unique(points, axis=0)
    if distinct.shape[0] < config.k:
        raise InfeasibleClusteringError(
            f"{distinct.shape[0]} distinct points cannot form {config.k} clusters"
        )
    rng = np.random.default_rng(config.rng_seed)
    best: KMeansRun | None = None
    for _ in range(config.n_init):
        if config.init == "forgy":
            centroids = distinct[rng.choice(distinct.shape[0], size=config.k, replace=False)].copy()
        else:
            centroids = _maximin_centroids(distinct, config.k, int(rng.integers(distinct.shape[0])))
        run = _lloyd(points, centroids, config)
        if best is None or run.inertia < best.inertia:
            best = run
    return best


def cluster_frame(frame: FrameCloud, plane: ProjectionPlane, config: KMeansConfig) -> FileAssignment:
    """Project a frame onto the plane's 2D chart and split it into 8 files."""
    coords = to_plane_coords(frame.positions(), plane)
    run = kmeans(coords, replace(config, k=NUM_FILES))
    ids = frame.ids()
    return FileAssignment(
        frame_index=frame.frame_index,
        labels={nid: int(lab) for nid, lab in zip(ids, run.labels)},
        centroids=run.centroids,
        plane=plane,
        coords={nid: (float(u), float(v)) for nid, (u, v) in zip(ids, coords)},
    )


def clustering_accuracy(predicted: FileAssignment | dict[str, int], truth: dict[str, int]) -> float:
    """Fraction correct under the best bijective relabeling of predictions."""
    pred = predicted.labels if isinstance(predicted, FileAssignment) else predicted
    if set(pred) != set(truth):
        raise ValueError("predicted and truth must cover the same nucleus ids")
    pred_labels = sorted(set(pred.values()))
    true_labels = sorted(set(truth.values()))
    if len(pred_labels) > NUM_FILES or len(true_labels) > NUM_FILES:
        raise ValueError("more than 8 labels on one side")
    p_index = {lab: i for i, lab in enumerate(pred_labels)}
    t_index = {lab: i for i, lab in enumerate(true_labels)}
    contingency = np.zeros((len(pred_labels), len(true_labels)), dtype=int)
    for nid, plab in pred.items():
        contingency[p_index[plab], t_index[truth[nid]]] += 1
    rows, cols = linear_sum_assignment(contingency, maximize=True)
    return float(contingency[rows, cols].sum() / len(pred))


def best_label_map(predicted: dict[str, int], truth: dict[str, int]) -> dict[int, int]:
    """Bijection predicted label -> truth label maximizing agreement."""
    contingency = np.zeros((NUM_FILES, NUM_FILES), dtype=int)
    for nid, plab in predicted.items():
        contingency[plab, truth[nid]] += 1
    rows, cols = linear_sum_assignment(contingency, maximize=True)
    return {int(r): int(c) for r, c in zip(rows, cols)}


def corrections_to_truth(assignment: FileAssignment, truth: dict[str, int]) -> CorrectionSet:
    """Minimal corrections making the assignment agree with ground truth.

    Labels stay in the assignment's own numbering: the best bijective
    relabeling onto truth is found first, and only nuclei breaking it get
    an entry. A perfect-but-renumbered clustering needs no corrections.
    """
    sigma = best_label_map(assignment.labels, truth)
    inverse = {t: p for p, t in sigma.items()}
    entries = tuple(
        (assignment.frame_index, nid, inverse[truth[nid]])
        for nid in sorted(assignment.labels)
        if sigma[assignment.labels[nid]] != truth[nid]
    )
    return CorrectionSet(entries)


def _recompute_centroids(labels: dict[str, int], coords: dict[str, tuple[float, float]]) -> np.ndarray:
    centroids = np.zeros((NUM_FILES, 2))
    for lab in range(NUM_FILES):
        members = np.array([coords[nid] for nid, l in labels.items() if l == lab])
        if len(members):
            centroids[lab] = members.mean(axis=0)
        else:
            centroids[lab] = np.nan
    return centroids


def apply_corrections(assignment: FileAssignment, corrections: CorrectionSet) -> FileAssignment:
    """Overwrite listed labels and recompute centroids; everything else intact."""
    overrides = corrections.for_frame(assignment.frame_index)
    unknown = set(overrides) - set(assignment.labels)
    if unknown:
        raise KeyError(
            f"corrections reference unknown nuclei in frame {assignment.frame_index}: "
            f"{sorted(unknown)}"
        )
    if not overrides:
        return assignment
    labels = dict(assignment.labels)
    labels.update(overrides)
    return FileAssignment(
        frame_index=assignment.frame_index,
        labels=labels,
        centroids=_recompute_centroids(labels, assignment.coords),
        plane=assignment.plane,
        coords=assignment.coords,
    )
