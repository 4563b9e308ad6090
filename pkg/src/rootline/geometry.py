"""Plane geometry: projection planes through the origin and their 2D charts.

A projection plane is encoded by its unit normal; because the plane passes
through the origin, orthogonal projection onto it is linear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-9

_AXES = {"x": 0, "y": 1, "z": 2}


@dataclass(frozen=True)
class ProjectionPlane:
    """Plane through the origin, encoded by a unit normal vector."""

    normal: tuple[float, float, float]

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if n.shape != (3,) or not np.all(np.isfinite(n)):
            raise ValueError(f"normal must be a finite 3-vector, got {self.normal}")
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise ValueError(f"normal must be unit length, got norm {np.linalg.norm(n)}")
        object.__setattr__(self, "normal", tuple(float(c) for c in n))

    @classmethod
    def from_vector(cls, v) -> "ProjectionPlane":
        """Normalize an arbitrary non-zero vector into a plane normal."""
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise ValueError("cannot build a plane from a (near-)zero vector")
        return cls(tuple(v / norm))

    def as_array(self) -> np.ndarray:
        return np.array(self.normal, dtype=float)


@dataclass(frozen=True)
class PlaneBasis:
    """Orthonormal in-plane axes (u, v); right-handed with the normal."""

    u: tuple[float, float, float]
    v: tuple[float, float, float]

    def as_matrix(self) -> np.ndarray:
        """(2, 3) matrix whose rows are u and v."""
        return np.array([self.u, self.v], dtype=float)


def project_point(p, plane: ProjectionPlane) -> np.ndarray:
    """Orthogonal projection of a point onto the plane: p - (p.n)n."""
    p = np.asarray(p, dtype=float)
    n = plane.as_array()
    return p - p.dot(n) * n


def project_points(points, plane: ProjectionPlane) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    n = plane.as_array()
    return points - np.outer(points.dot(n), n)


def plane_basis(plane: ProjectionPlane) -> PlaneBasis:
    """Deterministic chart axes for a plane.

    Rule: take the standard axis e least aligned with the normal (first
    axis on ties), Gram-Schmidt it into the plane for u, and set v = n x u.
    """
    n = plane.as_array()
    e = np.eye(3)[int(np.argmin(np.abs(n)))]
    u = e - e.dot(n) * n
    u /= np.linalg.norm(u)
    v = np.cross(n, u)
    return PlaneBasis(tuple(u), tuple(v))


def to_plane_coords(points, plane: ProjectionPlane, basis: PlaneBasis | None = None) -> np.ndarray:
    """2D chart coordinates (p.u, p.v) of points; (N, 2) array."""
    if basis is None:
        basis = plane_basis(plane)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return points @ basis.as_matrix().T


def rotation_matrix(axis: str, degrees: float) -> np.ndarray:
    """Right-handed rotation about a coordinate axis ('x', 'y' or 'z')."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {sorted(_AXES)}, got {axis!r}")
    theta = np.deg2rad(degrees)
    c, s = np.cos(theta), np.sin(theta)
    i = _AXES[axis]
    j, k = (i + 1) % 3, (i + 2) % 3
    rot = np.eye(3)
    rot[j, j] = c
    rot[j, k] = -s
    rot[k, j] = s
    rot[k, k] = c
    return rot


def rotate_plane(plane: ProjectionPlane, axis: str, degrees: float) -> ProjectionPlane:
    """Rotate the plane normal by the given angle about a coordinate axis."""
    rotated = rotation_matrix(axis, degrees) @ plane.as_array()
    return ProjectionPlane.from_vector(rotated)


def plane_angle_deg(a: ProjectionPlane, b: ProjectionPlane) -> float:
    """Angle between two planes in degrees, insensitive to normal sign."""
    cos = abs(float(np.dot(a.as_array(), b.as_array())))
    return float(np.degrees(np.arccos(min(1.0, cos))))
