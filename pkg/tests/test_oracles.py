import numpy as np
import pytest

from vectorheat import oracles
from vectorheat.oracles import CutLocusError, SphereOracle


def test_equator_transport_keeps_north():
    o = SphereOracle()
    x = np.array([1.0, 0, 0])
    y = np.array([0, 1.0, 0])
    assert np.allclose(o.transport(x, y, [0, 0, 1.0]), [0, 0, 1], atol=1e-15)
    assert np.allclose(o.transport(x, y, [0, 1.0, 0]), [-1, 0, 0], atol=1e-15)


def test_transport_around_octant_rotates_by_area():
    # holonomy of the octant triangle equals its area pi/2
    o = SphereOracle()
    a, b, c = np.eye(3)
    X = np.array([0, 1.0, 0])
    Y = o.transport(c, a, o.transport(b, c, o.transport(a, b, X)))
    assert np.arccos(np.clip(X @ Y, -1, 1)) == pytest.approx(np.pi / 2, abs=1e-12)


def test_sphere_log_pole_to_equator():
    r, phi = oracles.sphere_log([0, 0, 1.0], [1.0, 0, 0])
    assert r == pytest.approx(np.pi / 2)
    assert phi == pytest.approx(0.0, abs=1e-15)  # e1 is the x axis near the poles
    assert oracles.sphere_log([0, 0, 2.0], [2.0, 0, 0], radius=2.0)[0] == pytest.approx(np.pi)


def test_log_exp_inverse():
    o = SphereOracle()
    rng = np.random.default_rng(0)
    for _ in range(50):
        x, y = rng.normal(size=(2, 3))
        x, y = x / np.linalg.norm(x), y / np.linalg.norm(y)
        if o.central_angle(x, y) > np.pi - 1e-3:
            continue
        r, d = o.log(x, y)
        assert np.allclose(o.exp(x, r * d), y, atol=1e-12)


def test_cut_locus_raises():
    with pytest.raises(CutLocusError):
        SphereOracle().transport([1.0, 0, 0], [-1.0, 0, 0], [0, 0, 1.0])


def test_midpoint_and_distance():
    o = SphereOracle(2.0)
    m = o.midpoint([1.0, 0, 0], [0, 1.0, 0])
    assert np.allclose(m, 2 * np.array([1, 1, 0]) / np.sqrt(2))
    assert o.distance([0, 0, 1.0], [1.0, 0, 0]) == pytest.approx(np.pi)


def test_planar_reference():
    P = np.array([[0, 0, 0], [3, 4, 0.0]])
    assert np.allclose(oracles.planar_reference(P, "distance", base=[0, 0]), [0, 5])
    assert np.allclose(oracles.planar_reference(P, "log", base=[3, 4]), [[-3, -4], [0, 0]])
    with pytest.raises(ValueError):
        oracles.planar_reference(P, "area")


def test_hat_quadrature_matches_hand_integral():
    # equilateral corner: hat of a neighbor integrates to (pi/3) * (4A)^-1 * l * (...) per the closed form
    c = np.array([0, 1, np.exp(1j * np.pi / 3)])
    q = oracles.hat_integral_quadrature(c, 1, (0, np.pi / 3), 1e-3)
    a, A = np.pi / 3, np.sqrt(3) / 4
    s, co = np.sin(a), np.cos(a)
    assert q == pytest.approx((a * s + 1j * (s - a * co)) / (4 * A), abs=1e-10)
    q2 = oracles.hat_integral_quadrature(c, 1, (0, np.pi / 3), 1e-2)
    assert q2 == pytest.approx(q, abs=1e-10)


def test_brute_force_and_fermat():
    pts = np.array([[0, 0], [1, 0], [0.3, 0.9]])
    fp = oracles.fermat_point(pts)
    # at the Fermat point the unit vectors to the vertices sum to zero
    u = (pts - fp) / np.linalg.norm(pts - fp, axis=1)[:, None]
    assert np.linalg.norm(u.sum(0)) < 1e-6
    xs = np.stack(np.meshgrid(np.linspace(0, 1, 201), np.linspace(0, 1, 201)), -1).reshape(-1, 2)
    k, E = oracles.brute_force_center(xs, pts, 1, oracles.euclidean)
    assert np.linalg.norm(xs[k] - fp) < 0.01
    k2, _ = oracles.brute_force_center(xs, pts, 2, oracles.euclidean)
    assert np.linalg.norm(xs[k2] - pts.mean(0)) < 0.01
    assert oracles.energy([1.0, 3.0], 2) == pytest.approx(2.5)


def test_planar_lloyd_square():
    xs = np.stack(np.meshgrid(np.linspace(0, 1, 41), np.linspace(0, 1, 41)), -1).reshape(-1, 2)
    S = oracles.planar_lloyd(xs, np.ones(len(xs)), [[0.1, 0.1], [0.9, 0.1], [0.1, 0.9], [0.9, 0.9]])
    for ref in ([0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]):
        assert np.linalg.norm(S - ref, axis=1).min() < 0.02
