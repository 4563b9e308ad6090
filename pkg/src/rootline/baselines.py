"""Comparison methods and analysis probes.

These exist to demonstrate failure modes: fixed/PCA projection planes
that mix the files, greedy nearest-neighbour linking that double-books
nuclei, gradient descent that stalls in local minima of the plane
fitness, and clustering choices (DBSCAN, raw-3D K-means) that cannot
guarantee eight files.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clustering import KMeansConfig, clustering_accuracy, kmeans
from .ga import fitness
from .geometry import ProjectionPlane
from .lines import RepresentativeSet
from .model import NUM_FILES, DegenerateInputError, FrameCloud

DBSCAN_NOISE = -1

_FIXED_NORMALS = {"XZ": (0.0, 1.0, 0.0), "XY": (0.0, 0.0, 1.0), "YZ": (1.0, 0.0, 0.0)}


@dataclass(frozen=True)
class PCAResult:
    components: np.ndarray          # (3, 3), rows by descending variance
    explained_variance: np.ndarray  # (3,)


def pca(points) -> PCAResult:
    points = np.asarray(points, dtype=float)
    if points.shape[0] < 3:
        raise DegenerateInputError("PCA needs at least 3 points")
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered / (points.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    return PCAResult(eigvecs[:, order].T, eigvals[order])


def pca_plane(points, which: str) -> ProjectionPlane:
    """Plane spanned by a pair of principal components.

    "c12" projects onto the first-and-second-component plane (normal =
    third component); "c23" onto the second-and-third (normal = first).
    """
    if which not in ("c12", "c23"):
        raise ValueError(f"which must be 'c12' or 'c23', got {which!r}")
    result = pca(points)
    total = float(result.explained_variance.sum())
    if total <= 0 or result.explained_variance[1] < 1e-12 * total:
        raise DegenerateInputError("rank-deficient covariance (collinear points)")
    normal = result.components[2] if which == "c12" else result.components[0]
    return ProjectionPlane.from_vector(normal)


def fixed_plane(which: str) -> ProjectionPlane:
    if which not in _FIXED_NORMALS:
        raise ValueError(f"which must be one of {sorted(_FIXED_NORMALS)}, got {which!r}")
    return ProjectionPlane(_FIXED_NORMALS[which])


def greedy_euclidean_link(
    reps_t: RepresentativeSet, reps_t1: RepresentativeSet
) -> tuple[dict[int, int], list[int]]:
    """Independently map each representative to its 3D-nearest successor.

    Returns (mapping file_label -> file_label, duplicate_report). The
    mapping is allowed to be non-injective; the duplicate report lists
    target labels claimed more than once. This failure is the point.
    """
    p_t = reps_t.positions()
    p_t1 = reps_t1.positions()
    d2 = ((p_t[:, None, :] - p_t1[None, :, :]) ** 2).sum(axis=2)
    mapping = {i: int(d2[i].argmin()) for i in range(len(p_t))}
    claimed = np.bincount(list(mapping.values()), minlength=len(p_t1))
    duplicates = [int(j) for j in np.flatnonzero(claimed > 1)]
    return mapping, duplicates


def rotated_representatives(
    reps: RepresentativeSet, degrees: float, y_jitter_um: float, seed: int,
    axis: str = "y",
) -> RepresentativeSet:
    """Next-frame representatives made by rigidly rotating this frame's.

    Rotation happens about the given coordinate axis through the
    centroid, with Gaussian jitter added along y. Rotations past half the
    45-degree file spacing push nearest-neighbour linking into its
    failure regime while angular matching still resolves the files.
    """
    from .geometry import rotation_matrix

    rng = np.random.default_rng(seed)
    centroid = reps.positions().mean(axis=0)
    rot = rotation_matrix(axis, degrees)
    out = []
    for lab, nid, pos in sorted(reps.reps):
        moved = centroid + rot @ (np.asarray(pos) - centroid)
        moved[1] += rng.normal(scale=y_jitter_um)
        out.append((lab, f"{nid}r", tuple(float(c) for c in moved)))
    return RepresentativeSet(reps.frame_index + 1, tuple(out))


def _normalized_fitness(points: np.ndarray):
    def f(v: np.ndarray) -> float:
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise DegenerateInputError("cannot evaluate fitness at the zero vector")
        return fitness(points, ProjectionPlane(tuple(v / norm)))
    return f


def _fd_gradient(f, x: np.ndarray, h: float) -> np.ndarray:
    grad = np.zeros(3)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        grad[i] = (f(x + e) - f(x - e)) / (2 * h)
    return grad


@dataclass(frozen=True)
class DescentResult:
    plane: ProjectionPlane
    fitness: float
    path: tuple[tuple[float, float, float], ...]  # accepted iterates
    fitness_path: tuple[float, ...]


def projected_gradient_descent(
    points, start: ProjectionPlane, step: float = 0.1, max_iter: int = 200,
    grad_h: float = 1e-5, min_step: float = 1e-12,
) -> DescentResult:
    """Finite-difference descent on the sphere with backtracking.

    Serves as the local-optimizer probe: depending on the start it stalls
    in different basins while the GA finds the same plane from any seed.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    points = np.asarray(points, dtype=float)
    f = _normalized_fitness(points)
    n = start.as_array()
    current = f(n)
    path = [tuple(n)]
    fits = [current]
    for _ in range(max_iter):
        grad = _fd_gradient(f, n, grad_h)
        grad_t = grad - grad.dot(n) * n  # tangential component
        gnorm = np.linalg.norm(grad_t)
        if gnorm < 1e-10:
            break
        trial_step = step
        while trial_step >= min_step:
            candidate = n - trial_step * grad_t
            candidate /= np.linalg.norm(candidate)
            value = f(candidate)
            if value < current:
                break
            trial_step /= 2
        else:
            break  # no descent direction at any step size
        n, current = candidate, value
        path.append(tuple(n))
        fits.append(current)
    return DescentResult(ProjectionPlane(tuple(n)), current, tuple(path), tuple(fits))


@dataclass(frozen=True)
class HessianProbe:
    matrix: np.ndarray       # symmetrized
    eigenvalues: np.ndarray  # ascending
    asymmetry: float         # max |H - H^T| before symmetrization


def finite_diff_hessian(points, plane: ProjectionPlane, h: float = 1e-4) -> HessianProbe:
    """Central-difference Hessian of the fitness in ambient coordinates.

    The plane normal is renormalized inside the objective, so the probe
    is well defined off the unit sphere. Entries come from differencing
    the finite-difference gradient, which leaves a genuine (tiny)
    asymmetry; the reported matrix is (H + H^T) / 2.
    """
    if h <= 0:
        raise ValueError("h must be > 0")
    points = np.asarray(points, dtype=float)
    f = _normalized_fitness(points)
    x = plane.as_array()
    raw = np.zeros((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        raw[:, j] = (_fd_gradient(f, x + e, h) - _fd_gradient(f, x - e, h)) / (2 * h)
    asymmetry = float(np.abs(raw - raw.T).max())
    sym = (raw + raw.T) / 2.0
    return HessianProbe(sym, np.linalg.eigvalsh(sym), asymmetry)


def dbscan(points, eps: float, min_pts: int) -> np.ndarray:
    """Classic density clustering; noise points get label -1.

    Neighbourhoods are Euclidean in the 2D chart and include the point
    itself. Cluster ids follow discovery order over point indices.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    points = np.asarray(points, dtype=float)
    n = points.shape[0]
    d2 = ((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    neighbours = [np.flatnonzero(row <= eps * eps) for row in d2]
    core = np.array([len(nb) >= min_pts for nb in neighbours])
    labels = np.full(n, DBSCAN_NOISE, dtype=int)
    cluster = 0
    for i in range(n):
        if labels[i] != DBSCAN_NOISE or not core[i]:
            continue
        labels[i] = cluster
        queue = list(neighbours[i])
        head = 0
        while head < len(queue):
            j = queue[head]
            head += 1
            if labels[j] == DBSCAN_NOISE:
                labels[j] = cluster
                if core[j]:
                    queue.extend(neighbours[j])
        cluster += 1
    return labels


def kmeans_3d_control(
    frame: FrameCloud, config: KMeansConfig, truth: dict[str, int] | None = None
) -> tuple[dict[str, int], float | None]:
    """K-means straight on raw 3D positions (no projection), k forced to 8."""
    run = kmeans(frame.positions(), replace(config, k=NUM_FILES))
    labels = {nid: int(lab) for nid, lab in zip(frame.ids(), run.labels)}
    accuracy = clustering_accuracy(labels, truth) if truth is not None else None
    return labels, accuracy
