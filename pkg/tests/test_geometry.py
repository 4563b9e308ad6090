import numpy as np
import pytest

from rootline.geometry import (PlaneBasis, ProjectionPlane, plane_angle_deg,
                               plane_basis, project_point, rotate_plane,
                               to_plane_coords)

SQ3 = 3 ** -0.5


def test_project_axis_aligned_drops_y():
    p = project_point((1, 2, 3), ProjectionPlane((0, 1, 0)))
    assert np.allclose(p, (1, 0, 3))


def test_project_point_already_on_plane():
    p = project_point((4, -1, 0), ProjectionPlane((0, 0, 1)))
    assert np.allclose(p, (4, -1, 0))


def test_project_diagonal_collapses_to_origin():
    # direct arithmetic oracle: p - (p.n)n with p = (1,1,1), n = (1,1,1)/sqrt(3)
    n = np.array([SQ3, SQ3, SQ3])
    expected = np.array([1.0, 1.0, 1.0]) - np.dot([1, 1, 1], n) * n
    p = project_point((1, 1, 1), ProjectionPlane(tuple(n)))
    assert np.allclose(p, expected, atol=1e-12)
    assert np.allclose(p, (0, 0, 0), atol=1e-12)


def test_projection_idempotent_and_sign_symmetric():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        plane = ProjectionPlane(tuple(n))
        flipped = ProjectionPlane(tuple(-n))
        p = rng.normal(scale=50, size=3)
        q = project_point(p, plane)
        assert np.allclose(project_point(q, plane), q, atol=1e-9)
        assert np.allclose(project_point(p, flipped), q, atol=1e-12)


def test_basis_examples():
    b = plane_basis(ProjectionPlane((0, 0, 1)))
    assert np.allclose(b.u, (1, 0, 0)) and np.allclose(b.v, (0, 1, 0))
    b = plane_basis(ProjectionPlane((1, 0, 0)))
    assert np.allclose(b.u, (0, 1, 0)) and np.allclose(b.v, (0, 0, 1))


def test_basis_orthonormal_for_diagonal_normal():
    n = np.array([SQ3, SQ3, SQ3])
    b = plane_basis(ProjectionPlane(tuple(n)))
    u, v = np.array(b.u), np.array(b.v)
    assert abs(u @ v) < 1e-9
    assert abs(u @ n) < 1e-9 and abs(v @ n) < 1e-9
    assert abs(np.linalg.norm(u) - 1) < 1e-9 and abs(np.linalg.norm(v) - 1) < 1e-9


def test_basis_deterministic():
    n = (0.3, 0.5, np.sqrt(1 - 0.09 - 0.25))
    assert plane_basis(ProjectionPlane(n)) == plane_basis(ProjectionPlane(n))


def test_chart_coords_axis_example():
    # rule-derived value: e = x (first least-aligned axis for n = y),
    # u = (1,0,0), v = n x u = (0,0,-1), so (3,5,4) charts to (3,-4)
    coords = to_plane_coords([(3, 5, 4)], ProjectionPlane((0, 1, 0)))
    assert np.allclose(coords[0], (3, -4))


def test_chart_origin_and_normal_shift():
    plane = ProjectionPlane(tuple(np.array([1.0, 2.0, 2.0]) / 3.0))
    assert np.allclose(to_plane_coords([(0, 0, 0)], plane)[0], (0, 0))
    p = np.array([5.0, -3.0, 1.0])
    shifted = p + 7.5 * plane.as_array()
    a, b = to_plane_coords([p, shifted], plane)
    assert np.allclose(a, b, atol=1e-9)


def test_chart_is_isometric_for_coplanar_points():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        plane = ProjectionPlane(tuple(n))
        pts = rng.normal(scale=30, size=(6, 3))
        proj = np.array([project_point(p, plane) for p in pts])
        chart = to_plane_coords(proj, plane)
        d3 = np.linalg.norm(proj[:, None] - proj[None, :], axis=2)
        d2 = np.linalg.norm(chart[:, None] - chart[None, :], axis=2)
        assert np.allclose(d3, d2, atol=1e-9)


def test_rotate_plane_quarter_turn():
    out = rotate_plane(ProjectionPlane((1, 0, 0)), "z", 90)
    assert np.allclose(out.as_array(), (0, 1, 0), atol=1e-12)


def test_rotate_plane_identity_and_small_angle():
    n = (0.6, 0.8, 0.0)
    assert np.allclose(rotate_plane(ProjectionPlane(n), "x", 0).as_array(), n)
    out = rotate_plane(ProjectionPlane((1, 0, 0)), "z", 0.1)
    expected = (np.cos(np.deg2rad(0.1)), np.sin(np.deg2rad(0.1)), 0.0)
    assert np.allclose(out.as_array(), expected, atol=1e-12)


def test_rotate_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        plane = ProjectionPlane(tuple(n))
        theta = rng.uniform(-180, 180)
        axis = "xyz"[rng.integers(3)]
        back = rotate_plane(rotate_plane(plane, axis, theta), axis, -theta)
        assert np.allclose(back.as_array(), n, atol=1e-9)


def test_plane_requires_unit_normal():
    with pytest.raises(ValueError):
        ProjectionPlane((1, 1, 0))
    with pytest.raises(ValueError):
        ProjectionPlane.from_vector((0, 0, 0))


def test_plane_angle_ignores_sign():
    a = ProjectionPlane((0, 1, 0))
    b = ProjectionPlane((0, -1, 0))
    assert plane_angle_deg(a, b) < 1e-9
