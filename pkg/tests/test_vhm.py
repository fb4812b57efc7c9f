import numpy as np
import pytest

from vectorheat import (SourceSet, SurfacePoint, VectorHeatSolver, extrinsic_to_tangent, field_to_extrinsic,
                        parallel_transport, point_sources, sample_field, scalar_interpolate, shapes,
                        transport_roundtrip_check)
from vectorheat.oracles import SphereOracle
from vectorheat.vhm import choose_time
from conftest import make

X3 = np.array([0.6, -0.8, 0.0])


def flat_error(m, res):
    E = field_to_extrinsic(m, res.field)
    ang = np.abs(np.arctan2(E[:, 1] * X3[0] - E[:, 0] * X3[1], E[:, :2] @ X3[:2]))
    return ang.max(), np.abs(np.linalg.norm(E, axis=1) - 1).max()


def test_choose_time(equilateral):
    assert choose_time(equilateral) == pytest.approx(1.0)
    assert choose_time(equilateral, 2.5) == pytest.approx(2.5)
    a = make(shapes.grid(10))
    b = make(shapes.grid(10, size=0.5))
    assert choose_time(b) == pytest.approx(choose_time(a) / 4, rel=1e-12)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            choose_time(a, bad)


@pytest.mark.parametrize("shape", [shapes.grid(20), shapes.grid(15, jitter=0.3), shapes.random_disk(400),
                                   shapes.thin_strip(25)])
def test_flat_transport_exact(shape):
    m = make(shape)
    src = int(np.argmin(np.linalg.norm(m.positions - m.positions.mean(0), axis=1)))
    res = VectorHeatSolver(m).transport_vector(src, extrinsic_to_tangent(m, src, X3).value)
    ang, mag = flat_error(m, res)
    assert ang < 1e-6
    assert mag < 1e-8


def test_sphere_transport_matches_oracle(ico3):
    P = ico3.positions
    o = SphereOracle()
    X = np.array([1.0, 0.0, 0.0])
    res = VectorHeatSolver(ico3).transport_vector(0, extrinsic_to_tangent(ico3, 0, X - (X @ P[0]) * P[0]).value)
    E = field_to_extrinsic(ico3, res.field)
    err = []
    for y in range(1, len(P)):
        if o.central_angle(P[0], P[y]) < np.pi - 0.5:
            ref = o.transport(P[0], P[y], X - (X @ P[0]) * P[0])
            ref -= (ref @ P[y]) * P[y]
            err.append(np.arccos(np.clip(ref @ E[y] / np.linalg.norm(ref) / np.linalg.norm(E[y]), -1, 1)))
    assert np.mean(err) < 0.01


def test_linearity(ico2):
    s = VectorHeatSolver(ico2)
    v = [3, 40, 100]
    X1, X2, a = np.array([1, 1j, -2]), np.array([0.5, 2 - 1j, 1j]), 0.7 - 1.3j
    Y = lambda X: s.transport(SourceSet(v, X)).direction
    assert np.allclose(Y(a * X1 + X2), a * Y(X1) + Y(X2), atol=1e-12)


@pytest.mark.parametrize("psi", [0.3, 2.0, -1.1])
def test_rotation_covariance(ico2, psi):
    s = VectorHeatSolver(ico2)
    r0 = s.transport_vector(7, 1.5 + 0.5j)
    r1 = s.transport_vector(7, np.exp(1j * psi) * (1.5 + 0.5j))
    scale = np.abs(r0.direction).max()
    assert np.abs(r1.direction - np.exp(1j * psi) * r0.direction).max() < 1e-12 * scale
    # the antipode has |Y| ~ 1e-20 and no meaningful direction
    ok = np.abs(r0.direction) > 1e-8 * scale
    assert (~ok).sum() <= 1
    assert np.allclose(r1.field[ok], np.exp(1j * psi) * r0.field[ok], atol=1e-12)


def test_single_source_magnitude(ico2):
    res = VectorHeatSolver(ico2).transport_vector(11, 2.5j)
    assert np.allclose(np.abs(res.field), 2.5, atol=1e-8)
    assert not res.degenerate.any()


def test_three_magnitudes(ico3):
    P = ico3.positions
    src = [int(np.argmax(P @ d)) for d in ([1, 0, 0], [-0.5, 0.8, 0], [-0.5, -0.8, 0.2])]
    res = VectorHeatSolver(ico3).transport(SourceSet(src, [1.0, 2.0, 3.0]))
    mag = np.abs(res.field)
    ang = np.arccos(np.clip(P @ P[src].T, -1, 1))
    near = np.argsort(ang, axis=1)
    gap = np.take_along_axis(ang, near[:, 1:2], 1)[:, 0] - np.take_along_axis(ang, near[:, :1], 1)[:, 0]
    far = gap > 6 * ico3.mean_edge_length  # both sides of a bisector are 3h away
    assert far.sum() > 100
    assert np.allclose(mag[far], np.array([1.0, 2.0, 3.0])[near[far, 0]], rtol=0.01)


def test_face_source_on_flat(grid10):
    f = 37
    P = grid10.positions[grid10.faces[f]]
    L = grid10.face_layout(f)
    # face frame x axis runs from corner 0 to corner 1
    e1 = (P[1] - P[0]) / np.linalg.norm(P[1] - P[0])
    e2 = np.cross([0, 0, 1], e1)
    z = complex(X3 @ e1, X3 @ e2)
    assert abs(L[1] - np.linalg.norm(P[1] - P[0])) < 1e-14
    res = VectorHeatSolver(grid10).transport(point_sources(grid10, SurfacePoint.in_face(f, (0.2, 0.3, 0.5)), z))
    E = field_to_extrinsic(grid10, res.field)
    assert np.allclose(E, X3, atol=1e-9)
    back = sample_field(grid10, res.field, SurfacePoint.in_face(f, (0.6, 0.2, 0.2)))
    assert abs(back - z) < 1e-9


def test_line_field_on_flat(grid10):
    res = VectorHeatSolver(grid10).transport_vector(60, extrinsic_to_tangent(grid10, 60, X3).value, k=2)
    E = field_to_extrinsic(grid10, res.field)
    assert np.allclose(np.abs(E @ X3), 1.0, atol=1e-9)


def test_scalar_single_source(ico2):
    u, deg = scalar_interpolate(ico2, SourceSet([5], [3.25]), t=ico2.mean_edge_length ** 2)
    assert np.allclose(u, 3.25, atol=1e-9)
    assert not deg.any()


def test_scalar_two_sources_bisector():
    m = make(shapes.grid(30))
    P = m.positions
    a, b = 15 * 31 + 5, 15 * 31 + 25
    u, _ = scalar_interpolate(m, SourceSet([a, b], [0.0, 1.0]), t=m.mean_edge_length ** 2)
    da = np.linalg.norm(P - P[a], axis=1)
    db = np.linalg.norm(P - P[b], axis=1)
    h = m.mean_edge_length
    # the other source's influence decays like exp(-(db^2 - da^2) / 4t)
    assert np.abs(u[da < db - 8 * h]).max() < 1e-3
    assert np.abs(u[db < da - 8 * h] - 1).max() < 1e-3
    mid = np.abs(P[:, 0] - 0.5) < 1e-9
    assert np.allclose(u[mid], 0.5, atol=0.05)


def test_scalar_constant_chain(ico2):
    chain = list(range(0, 60, 3))
    u, _ = scalar_interpolate(ico2, SourceSet(chain, np.full(len(chain), -2.0)), t=0.05)
    assert np.allclose(u, -2.0, atol=1e-8)


def test_roundtrip_flat_and_random():
    g = make(shapes.grid(12))
    s = VectorHeatSolver(g)
    for i, j in [(0, 100), (13, 150), (77, 30)]:
        scale, ang = s.roundtrip(i, j)
        assert ang <= 1e-10
        assert scale > 0
    m = make(shapes.random_sphere(1000, seed=4))
    s = VectorHeatSolver(m)
    rng = np.random.default_rng(0)
    for _ in range(100):
        i, j = rng.choice(m.n_vertices, 2, replace=False)
        _, ang = s.roundtrip(int(i), int(j), np.exp(1j * rng.uniform(0, 6)))
        assert ang <= 1e-8


def test_functional_wrappers(ico2):
    t = ico2.mean_edge_length ** 2
    res = parallel_transport(ico2, SourceSet([0], [1.0]), t)
    ref = VectorHeatSolver(ico2, t).transport_vector(0, 1.0)
    assert np.allclose(res.field, ref.field)
    assert transport_roundtrip_check(ico2, 0, 9, t)[1] < 1e-8
    with pytest.raises(ValueError):
        transport_roundtrip_check(ico2, 4, 4, t)
    with pytest.raises(ValueError):
        parallel_transport(ico2, SourceSet([0], [1.0]), 0.0)


def test_source_errors(ico2):
    s = VectorHeatSolver(ico2)
    with pytest.raises(ValueError, match="zero"):
        s.transport(SourceSet([1, 2], [0.0, 0.0]))
    with pytest.raises(ValueError):
        SourceSet([], [])
    with pytest.raises(ValueError):
        SourceSet([1, 2], [1.0])
    with pytest.raises(ValueError):
        VectorHeatSolver(ico2, t=-1.0)


def test_factorizations_reused(ico2):
    from vectorheat import factorization_count

    s = VectorHeatSolver(ico2)
    s.prefactor()
    n0 = factorization_count()
    for v in range(10):
        s.transport_vector(v, 1j)
        s.interpolate(SourceSet([v], [1.0]))
    assert factorization_count() == n0
