import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vectorheat import (MeshError, SurfacePoint, TangentVector, build_intrinsic_mesh, extrinsic_to_tangent,
                        shapes, tangent_to_extrinsic, transport_along_edge)
from conftest import make, wrap


def cone(n=5):
    """``n`` unit equilateral triangles closed around vertex 0."""
    F = [(0, 1 + k, 1 + (k + 1) % n) for k in range(n)]
    L = {(0, 1 + k): 1.0 for k in range(n)}
    L.update({(1 + k, 1 + (k + 1) % n): 1.0 for k in range(n)})
    return build_intrinsic_mesh(F, lengths=L)


def test_equilateral_angles_and_area(equilateral):
    assert np.allclose(equilateral.corner_angle, np.pi / 3, atol=1e-15)
    assert equilateral.face_area[0] == pytest.approx(np.sqrt(3) / 4, rel=1e-15)


def test_hexagon_polar_angles(hexagon):
    assert hexagon.angle_sum[0] == pytest.approx(2 * np.pi, abs=1e-14)
    hs = hexagon.outgoing(0)
    assert np.allclose(hexagon.he_angle[hs], np.pi / 3 * np.arange(6), atol=1e-14)
    # counter-clockwise: heads 1..6 in order
    assert list(hexagon.he_head[hs]) == [1, 2, 3, 4, 5, 6]


def test_345_triangle():
    m = build_intrinsic_mesh([[0, 1, 2]], lengths=[[3.0, 4.0, 5.0]])
    assert m.face_area[0] == pytest.approx(6.0, rel=1e-15)
    # corner 1 sits between the sides of length 3 and 4
    assert m.corner_angle[1] == pytest.approx(np.pi / 2, abs=1e-15)


def test_length_dict_matches_positions(ico2):
    P, F = shapes.icosphere(2)
    L = {tuple(ico2.edge_vertices[e]): ico2.edge_length[e] for e in range(ico2.n_edges)}
    m = build_intrinsic_mesh(F, lengths=L)
    assert np.allclose(m.corner_angle, ico2.corner_angle, atol=1e-14)
    assert np.allclose(m.he_rotation, ico2.he_rotation, atol=1e-13)


def test_rotations_are_inverse_across_twins(ico2):
    nI = ico2.n_interior_halfedges
    r = ico2.he_rotation[:nI] * ico2.he_rotation[ico2.he_twin[:nI]]
    assert np.allclose(r, 1.0, atol=1e-14)
    assert np.allclose(np.abs(ico2.he_rotation), 1.0, atol=1e-15)


def test_flat_transport_is_parallel(grid10):
    P = grid10.positions
    X = np.array([0.6, -0.8, 0.0])
    for e in range(0, grid10.n_edges, 7):
        i, j = grid10.edge_vertices[e]
        v = extrinsic_to_tangent(grid10, i, X)
        w = transport_along_edge(grid10, v, (int(i), int(j)))
        assert w.vertex == j
        assert np.allclose(tangent_to_extrinsic(grid10, w), X, atol=1e-12)


def test_face_holonomy_matches_normalized_defect(ico2):
    for f in range(0, ico2.n_faces, 11):
        hs = np.arange(3 * f, 3 * f + 3)
        hol = np.angle(np.prod(ico2.he_rotation[hs]))
        share = np.sum((ico2.angle_scale[ico2.faces[f]] - 1) * ico2.corner_angle[hs])
        assert wrap(hol - share) == pytest.approx(0.0, abs=1e-12)


def test_total_holonomy_is_euler_characteristic(ico2):
    tot = sum(np.angle(np.prod(ico2.he_rotation[3 * f:3 * f + 3])) for f in range(ico2.n_faces))
    assert tot == pytest.approx(4 * np.pi, abs=1e-10)


def test_cone_holonomy_equals_angle_defect():
    m = cone(5)
    ring = [1, 2, 3, 4, 5, 1]
    z = TangentVector(1.0 + 0j, 1)
    for a, b in zip(ring[:-1], ring[1:]):
        z = transport_along_edge(m, z, (a, b))
    defect = 2 * np.pi - m.angle_sum[0]
    assert defect == pytest.approx(np.pi / 3)
    assert wrap(np.angle(z.value) - defect) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 161), st.floats(0, 2 * np.pi), st.floats(0.1, 3.0))
def test_extrinsic_roundtrip(i, angle, mag):
    m = _sphere()
    n = m.positions[i] / np.linalg.norm(m.positions[i])
    e1 = np.cross(n, [0.3, 0.4, 0.5])
    e1 /= np.linalg.norm(e1)
    X = mag * (np.cos(angle) * e1 + np.sin(angle) * np.cross(n, e1))
    v = extrinsic_to_tangent(m, i, X)
    assert v.magnitude == pytest.approx(mag, rel=1e-2)
    back = extrinsic_to_tangent(m, i, tangent_to_extrinsic(m, v))
    assert abs(back.value - v.value) < 1e-12 * mag


_cache = {}


def _sphere():
    if "m" not in _cache:
        _cache["m"] = make(shapes.icosphere(2))
    return _cache["m"]


def test_boundary_vertices_keep_their_angles(grid10):
    b = grid10.boundary_vertex
    assert np.allclose(grid10.angle_scale[b], 1.0)
    assert np.allclose(grid10.angle_sum[~b], 2 * np.pi)


def test_surface_point_validation():
    with pytest.raises(ValueError):
        SurfacePoint()
    with pytest.raises(ValueError):
        SurfacePoint(face=0, bary=(0.5, 0.6, 0.1))
    p = SurfacePoint.in_face(0, (2, 1, 1))
    assert p.bary == pytest.approx((0.5, 0.25, 0.25))


@pytest.mark.parametrize("faces,kwargs,match", [
    ([[0, 1, 2]], dict(lengths=[[1.0, 1.0, 3.0]]), "triangle inequality"),
    ([[0, 1, 2]], dict(lengths=[[1.0, 0.0, 1.0]]), "non-positive"),
    ([[0, 1, 1]], dict(positions=np.eye(3)), "repeats a vertex"),
    ([[0, 1, 2], [0, 1, 3]], dict(positions=np.eye(4)[:, :3]), "non-manifold"),
    ([[0, 1, 2]], dict(lengths={(0, 1): 1.0, (1, 2): 1.0}), "missing length"),
    ([[0, 1, 5]], dict(positions=np.eye(3)), "out of range"),
    (np.zeros((0, 3), int), dict(positions=np.eye(3)), "no faces"),
])
def test_mesh_errors(faces, kwargs, match):
    with pytest.raises(MeshError, match=match):
        build_intrinsic_mesh(faces, **kwargs)


def test_isolated_vertex_is_rejected():
    P, F = shapes.hexagon_fan()
    with pytest.raises(MeshError) as exc:
        build_intrinsic_mesh(F, np.vstack([P, [5.0, 5.0, 0.0]]))
    assert exc.value.vertex == 7


def test_error_carries_edge():
    with pytest.raises(MeshError) as exc:
        build_intrinsic_mesh([[0, 1, 2], [0, 1, 3]], positions=np.eye(4)[:, :3])
    assert exc.value.edge == (0, 1)
