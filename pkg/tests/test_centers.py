import numpy as np
import pytest

from vectorheat import (CenterProblem, SurfacePoint, VectorHeatSolver, build_intrinsic_mesh, compute_log_map,
                        find_center, gcvt, karcher_update, ordered_landmarks, shapes)
from vectorheat import oracles
from vectorheat.centers import cell_densities
from conftest import make


@pytest.fixture(scope="module")
def plane():
    m = make(shapes.grid(30, jitter=0.2, seed=2))
    return m, VectorHeatSolver(m)


def nearest(m, x, y):
    P = m.positions
    return int(np.argmin((P[:, 0] - x) ** 2 + (P[:, 1] - y) ** 2))


def xy(m, p):
    return p.position(m)[:2]


def test_single_sample_is_fixed_point(ico2):
    v, nxt = karcher_update(ico2, SurfacePoint.at_vertex(12), CenterProblem(samples=[12]))
    assert v == 0
    assert nxt == SurfacePoint.at_vertex(12)


def test_flat_centroid_in_one_step(plane):
    m, s = plane
    h = m.mean_edge_length
    samples = [nearest(m, 0.3, 0.3), nearest(m, 0.7, 0.3), nearest(m, 0.7, 0.7), nearest(m, 0.3, 0.7)]
    c = m.positions[samples, :2].mean(0)
    for start in (nearest(m, 0.5, 0.5), nearest(m, 0.2, 0.8), nearest(m, 0.6, 0.35)):
        _, nxt = karcher_update(m, SurfacePoint.at_vertex(start), CenterProblem(samples=samples), solver=s)
        assert np.linalg.norm(xy(m, nxt) - c) < h
    for seed in range(3):
        res = find_center(m, CenterProblem(samples=samples), seed=seed, solver=s)
        assert res.converged and res.iterations <= 20
        # the iterate reaches the centroid at once; later steps only chase O(h) log-map noise
        assert np.linalg.norm(xy(m, res.trajectory[min(3, len(res.trajectory) - 1)]) - c) < h
        assert np.linalg.norm(xy(m, res.center) - c) < h


def test_fermat_point(plane):
    m, s = plane
    h = m.mean_edge_length
    tri = [nearest(m, 0.2, 0.2), nearest(m, 0.8, 0.25), nearest(m, 0.45, 0.8)]
    fp = oracles.fermat_point(m.positions[tri])
    # brute-force argmin over vertices agrees with the closed-form point
    k, _ = oracles.brute_force_center(m.positions[:, :2], m.positions[tri, :2], 1, oracles.euclidean)
    assert np.linalg.norm(m.positions[k, :2] - fp) < h
    for seed in range(3):
        res = find_center(m, CenterProblem(samples=tri, p=1), seed=seed, solver=s)
        assert res.converged and res.iterations <= 20
        assert np.linalg.norm(xy(m, res.center) - fp) < h


def test_sphere_midpoint():
    m = make(shapes.icosphere(4))
    P = m.positions
    o = oracles.SphereOracle()
    a = int(np.argmax(P @ [np.cos(0.5), np.sin(0.5), 0]))
    b = int(np.argmax(P @ [np.cos(0.5), -np.sin(0.5), 0]))
    mid = o.midpoint(P[a], P[b])
    s = VectorHeatSolver(m)
    for seed in range(2):
        res = find_center(m, CenterProblem(samples=[a, b]), seed=seed, solver=s)
        assert res.converged and res.iterations <= 20
        assert o.distance(res.center.position(m), mid) < m.mean_edge_length


def test_outliers_pull_mean_not_median(plane):
    m, s = plane
    P = m.positions[:, :2]
    rho = np.exp(-np.sum((P - [0.3, 0.5]) ** 2, 1) / 0.01) + 0.35 * np.exp(-np.sum((P - [0.9, 0.9]) ** 2, 1) / 0.002)
    mean = find_center(m, CenterProblem(density=rho, p=2), nearest(m, 0.3, 0.5), solver=s)
    med = find_center(m, CenterProblem(density=rho, p=1), nearest(m, 0.3, 0.5), solver=s)
    assert mean.converged and med.converged
    xm, xd = xy(m, mean.center), xy(m, med.center)
    assert np.linalg.norm(xm - [0.3, 0.5]) > 2 * np.linalg.norm(xd - [0.3, 0.5])
    w = rho * s.mass
    e1 = lambda x: oracles.energy(np.linalg.norm(P - x, axis=1), 1, w)
    e2 = lambda x: oracles.energy(np.linalg.norm(P - x, axis=1), 2, w)
    assert e1(xd) < e1(xm)
    assert e2(xm) < e2(xd)


def test_energy_descends(plane):
    m, s = plane
    samples = [nearest(m, 0.1, 0.2), nearest(m, 0.9, 0.4), nearest(m, 0.4, 0.9), nearest(m, 0.5, 0.5)]
    res = find_center(m, CenterProblem(samples=samples), seed=4, solver=s)
    E = np.array(res.energies)
    # radii carry O(h) noise, so descent holds up to a fraction of h times the mean distance
    assert np.all(np.diff(E) <= 0.5 * m.mean_edge_length * 0.5)
    assert E[-1] <= E[0]
    assert len(res.trajectory) == res.iterations + 1 or len(res.trajectory) == res.iterations


def test_weiszfeld_coincident_sample(plane):
    m, s = plane
    v, _ = karcher_update(m, SurfacePoint.at_vertex(100), CenterProblem(samples=[100, 400, 700], p=1), solver=s)
    assert np.isfinite(v) and abs(v) < 1.0


def test_scale_invariance():
    P, F = shapes.grid(16, jitter=0.2, seed=1)
    samples = [20, 150, 260]
    out = []
    for scale in (1.0, 3.0):
        m = build_intrinsic_mesh(F, P * scale)
        prob = CenterProblem(samples=samples, p=1)
        v, _ = karcher_update(m, SurfacePoint.at_vertex(100), prob)
        res = find_center(m, prob, SurfacePoint.at_vertex(100))
        out.append((v, res.center.position(m)[:2] / scale))
    assert abs(out[1][0] - 3.0 * out[0][0]) < 1e-9 * abs(out[1][0])
    assert np.linalg.norm(out[0][1] - out[1][1]) < 1e-6


def test_non_convergence_is_flagged(plane):
    m, s = plane
    res = find_center(m, CenterProblem(samples=[5, 700, 900], max_iter=1, tol=1e-12), seed=0, solver=s)
    assert not res.converged
    assert res.iterations == 1 and len(res.trajectory) >= 1


@pytest.mark.parametrize("kwargs", [dict(samples=[1], p=3), dict(), dict(samples=[1], density=np.ones(3)),
                                    dict(samples=[]), dict(density=-np.ones(4)), dict(samples=[1], tau=0),
                                    dict(samples=[1, 2], sample_weights=[0, 0])])
def test_invalid_problems(kwargs):
    with pytest.raises(ValueError):
        CenterProblem(**kwargs)


def test_gcvt_single_site(plane):
    m, s = plane
    st = gcvt(m, [nearest(m, 0.2, 0.7)], iterations=30, solver=s)
    assert np.allclose(st.densities, 1.0)
    assert np.linalg.norm(xy(m, st.sites[0]) - [0.5, 0.5]) < 2 * m.mean_edge_length


def test_gcvt_square_four_sites():
    m = make(shapes.grid(24))
    h = m.mean_edge_length
    st = gcvt(m, [0, 24, 600, 624], iterations=30)
    assert np.allclose(st.densities.sum(0), 1.0, atol=1e-12)
    got = np.array([xy(m, p) for p in st.sites])
    lloyd = oracles.planar_lloyd(m.positions, VectorHeatSolver(m).mass, m.positions[[0, 24, 600, 624]])
    for ref in ([0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]):
        assert np.linalg.norm(got - ref, axis=1).min() < h
        assert np.linalg.norm(lloyd - ref, axis=1).min() < h


def test_gcvt_sphere_self_consistent(ico3):
    s = VectorHeatSolver(ico3)
    rng = np.random.default_rng(3)
    st = gcvt(ico3, list(rng.choice(ico3.n_vertices, 6, replace=False)), iterations=40, solver=s)
    h = ico3.mean_edge_length
    assert st.movement < 0.05 * h
    for site, dens in zip(st.sites, st.densities):
        v, _ = karcher_update(ico3, site, CenterProblem(density=dens), solver=s)
        assert abs(v) < 0.05 * h


def test_coincident_sites_warn(plane):
    m, s = plane
    with pytest.warns(RuntimeWarning, match="coincide"):
        st = gcvt(m, [100, 100], iterations=1, solver=s)
    assert st.sites[0] != st.sites[1]


def test_cell_densities_partition(ico2):
    s = VectorHeatSolver(ico2)
    D = cell_densities(ico2, [SurfacePoint.at_vertex(0), SurfacePoint.in_face(50, (0.2, 0.3, 0.5))], s)
    assert np.allclose(D.sum(0), 1.0)
    assert D[0, 0] > 0.99


def test_landmarks_on_disk():
    m = make(shapes.disk(16))
    lms, meds = ordered_landmarks(m, 3, initial_guesses=1, return_medians=True)
    assert np.linalg.norm(meds[0].position(m)) < m.mean_edge_length
    assert len(lms) == 3
    for p in lms:
        assert np.linalg.norm(p.position(m)) == pytest.approx(1.0, abs=1e-9)
    assert ordered_landmarks(m, 0) == []
    with pytest.raises(ValueError):
        ordered_landmarks(m, -1)


def test_landmarks_consistent_across_poses():
    P, F = shapes.grid(24, size=1.0)
    x, y = P[:, 0], P[:, 1]
    flat = np.column_stack([2.0 * x + 0.4 * y ** 2, y * (1 + 0.3 * x), np.zeros_like(x)])
    R = 0.8
    bent = np.column_stack([R * np.sin(flat[:, 0] / R), flat[:, 1], R * (1 - np.cos(flat[:, 0] / R))])
    A = build_intrinsic_mesh(F, flat)
    B = build_intrinsic_mesh(F, bent)
    la = ordered_landmarks(A, 5, initial_guesses=2, seed=0)
    lb = ordered_landmarks(B, 5, initial_guesses=2, seed=0)
    diam = np.linalg.norm(np.ptp(flat[:, :2], axis=0))
    for p, q in zip(la, lb):
        assert np.linalg.norm(p.position(A) - q.position(A)) < 0.05 * diam
