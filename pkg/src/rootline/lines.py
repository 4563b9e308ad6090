"""File-level tracking between consecutive frames via polar angles.

Each frame's eight files are reduced to one representative nucleus each
(the median along y). The eight representatives sit on an oval around
their centroid, so one anchor file is matched by smallest angular
displacement and the other seven follow from the preserved cyclic order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import FileAssignment
from .geometry import PlaneBasis, ProjectionPlane, plane_basis, to_plane_coords
from .model import NUM_FILES, DegenerateInputError, FrameCloud

TWO_PI = 2.0 * np.pi


class MissingFileError(ValueError):
    """A file label has no nuclei; upstream clustering failed."""


@dataclass(frozen=True)
class RepresentativeSet:
    """One nucleus per file: (file_label, nucleus_id, position), labels 0..7."""

    frame_index: int
    reps: tuple[tuple[int, str, tuple[float, float, float]], ...]

    def __post_init__(self):
        labels = [r[0] for r in self.reps]
        ids = [r[1] for r in self.reps]
        if sorted(labels) != list(range(NUM_FILES)) or len(set(ids)) != NUM_FILES:
            raise ValueError("representatives must carry the 8 distinct file labels and ids")

    def positions(self) -> np.ndarray:
        """(8, 3) positions ordered by file label."""
        ordered = sorted(self.reps)
        return np.array([r[2] for r in ordered], dtype=float)


@dataclass(frozen=True)
class FileCorrespondence:
    """Permutation sending frame-t file labels to frame-(t+1) labels."""

    frame_index_t: int
    mapping: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.mapping) != list(range(NUM_FILES)):
            raise ValueError(f"mapping must be a permutation of 0..7, got {self.mapping}")

    def __getitem__(self, label: int) -> int:
        return self.mapping[label]

    def inverse(self) -> tuple[int, ...]:
        inv = [0] * NUM_FILES
        for src, dst in enumerate(self.mapping):
            inv[dst] = src
        return tuple(inv)


def select_representatives(frame: FrameCloud, assignment: FileAssignment) -> RepresentativeSet:
    """Per file, the nucleus at the lower median of the file's y values."""
    by_label: dict[int, list] = {lab: [] for lab in range(NUM_FILES)}
    for nucleus in frame.nuclei:
        by_label[assignment.labels[nucleus.nucleus_id]].append(nucleus)
    reps = []
    for lab in range(NUM_FILES):
        members = by_label[lab]
        if not members:
            raise MissingFileError(f"file {lab} has no nuclei in frame {frame.frame_index}")
        members.sort(key=lambda n: (n.y, n.nucleus_id))
        mid = members[(len(members) - 1) // 2]
        reps.append((lab, mid.nucleus_id, mid.position))
    return RepresentativeSet(frame.frame_index, tuple(reps))


def _angles_about_centroid(coords: np.ndarray) -> np.ndarray:
    centered = coords - coords.mean(axis=0)
    radii = np.linalg.norm(centered, axis=1)
    if np.any(radii < 1e-12):
        raise DegenerateInputError("a representative coincides with the centroid")
    return np.mod(np.arctan2(centered[:, 1], centered[:, 0]), TWO_PI)


def polar_angles(reps: RepresentativeSet, plane: ProjectionPlane) -> np.ndarray:
    """Angle of each projected representative about their common centroid.

    Returned in file-label order, in [0, 2pi), measured in the plane's
    deterministic chart.
    """
    coords = to_plane_coords(reps.positions(), plane)
    return _angles_about_centroid(coords)


def _transported_basis(reference: PlaneBasis, normal: np.ndarray) -> PlaneBasis:
    """Carry a chart onto a nearby plane with minimal rotation.

    Keeps angle differences between consecutive frames physically
    meaningful; the standalone axis-pick rule can jump by 90 degrees when
    the normal is nearly symmetric between two axes.
    """
    u = np.asarray(reference.u, dtype=float)
    u = u - u.dot(normal) * normal
    norm = np.linalg.norm(u)
    if norm < 1e-8:  # planes nearly perpendicular; fall back to the own chart
        return plane_basis(ProjectionPlane.from_vector(normal))
    u /= norm
    return PlaneBasis(tuple(u), tuple(np.cross(normal, u)))


def wrap_angle(angle: float | np.ndarray) -> np.ndarray:
    """Wrap into (-pi, pi]."""
    return -np.mod(-np.asarray(angle) + np.pi, TWO_PI) + np.pi


def match_files(
    reps_t: RepresentativeSet,
    reps_t1: RepresentativeSet,
    plane_t: ProjectionPlane,
    plane_t1: ProjectionPlane,
) -> FileCorrespondence:
    """Match the eight files of frame t to frame t+1 by polar angles.

    The frame-(t+1) normal is first sign-aligned with frame t's, and its
    chart is transported from frame t's basis so both angle sets share
    chirality and orientation. File 0 of frame t anchors on the
    representative with the smallest wrapped angular difference (ties go
    to the counterclockwise candidate); the rest follow by cyclic order.
    """
    n_t = plane_t.as_array()
    n_t1 = plane_t1.as_array()
    if n_t.dot(n_t1) < 0:
        n_t1 = -n_t1

    basis_t = plane_basis(plane_t)
    basis_t1 = _transported_basis(basis_t, n_t1)
    # chart coords (p.u, p.v) already discard the normal component
    angles_t = _angles_about_centroid(reps_t.positions() @ basis_t.as_matrix().T)
    angles_t1 = _angles_about_centroid(reps_t1.positions() @ basis_t1.as_matrix().T)

    diffs = wrap_angle(angles_t1 - angles_t[0])
    # smallest magnitude, then positive over negative, then label for determinism
    anchor = min(range(NUM_FILES), key=lambda j: (abs(diffs[j]), diffs[j] <= 0, j))

    order_t = sorted(range(NUM_FILES), key=lambda lab: angles_t[lab])
    order_t1 = sorted(range(NUM_FILES), key=lambda lab: angles_t1[lab])
    pos_t = order_t.index(0)
    pos_t1 = order_t1.index(anchor)
    mapping = [0] * NUM_FILES
    for shift in range(NUM_FILES):
        src = order_t[(pos_t + shift) % NUM_FILES]
        dst = order_t1[(pos_t1 + shift) % NUM_FILES]
        mapping[src] = dst
    return FileCorrespondence(reps_t.frame_index, tuple(mapping))


def propagate_labels(
    assignments: list[FileAssignment],
    correspondences: list[FileCorrespondence],
) -> list[FileAssignment]:
    """Relabel every frame so one physical file keeps one label throughout.

    Frame 0 keeps its labels; later frames are relabeled by composing the
    pairwise permutations.
    """
    if len(correspondences) != max(len(assignments) - 1, 0):
        raise ValueError(
            f"need one correspondence per consecutive pair: "
            f"{len(assignments)} frames, {len(correspondences)} correspondences"
        )
    # raw_of[g] = raw label in the current frame of the file whose global label is g
    raw_of = list(range(NUM_FILES))
    out = [assignments[0]] if assignments else []
    for t in range(1, len(assignments)):
        raw_of = [correspondences[t - 1][raw] for raw in raw_of]
        global_of = {raw: g for g, raw in enumerate(raw_of)}
        a = assignments[t]
        out.append(
            FileAssignment(
                frame_index=a.frame_index,
                labels={nid: global_of[lab] for nid, lab in a.labels.items()},
                centroids=a.centroids[raw_of],
                plane=a.plane,
                coords=a.coords,
            )
        )
    return out
