"""Closed-form and brute-force references used by the tests and ``validate`` suites.

Nothing here calls into the modules it is meant to check: sphere quantities
come from rotations in R^3, planar ones from vertex positions, and the
radial initial data from direct numerical quadrature.
"""
import numpy as np
from scipy import integrate


class CutLocusError(ValueError):
    pass


def _unit(x):
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x)


def rotate(v, axis, angle):
    """Rodrigues rotation of ``v`` about unit ``axis``."""
    v = np.asarray(v, dtype=float)
    k = _unit(axis)
    return (v * np.cos(angle) + np.cross(k, v) * np.sin(angle)
            + k * (k @ v) * (1 - np.cos(angle)))


class SphereOracle:
    """Analytic geometry of the sphere of radius ``radius`` centered at the origin."""

    def __init__(self, radius=1.0):
        self.radius = float(radius)

    def project(self, x):
        return self.radius * _unit(x)

    def central_angle(self, x, y):
        x, y = _unit(x), _unit(y)
        return float(np.arctan2(np.linalg.norm(np.cross(x, y)), x @ y))

    def distance(self, x, y):
        return self.radius * self.central_angle(x, y)

    def _axis(self, x, y):
        a = np.cross(_unit(x), _unit(y))
        n = np.linalg.norm(a)
        ang = self.central_angle(x, y)
        if ang > np.pi - 1e-9:
            raise CutLocusError("antipodal points have no unique shortest geodesic")
        return a, n, ang

    def transport(self, x, y, X):
        """Parallel transport of tangent ``X`` from ``x`` to ``y`` along the great circle."""
        a, n, ang = self._axis(x, y)
        X = np.asarray(X, dtype=float)
        if n < 1e-15:
            return X.copy()
        return rotate(X, a / n, ang)

    def log(self, x, y):
        """``(r, direction)``: geodesic distance and unit initial direction at ``x``."""
        a, n, ang = self._axis(x, y)
        if n < 1e-15:
            return 0.0, np.zeros(3)
        xu, yu = _unit(x), _unit(y)
        d = _unit(yu - (xu @ yu) * xu)
        return self.radius * ang, d

    def log_polar(self, x, y, e1):
        """``(r, phi)`` with ``phi`` measured from tangent ``e1`` counter-clockwise about the outward normal."""
        r, d = self.log(x, y)
        n = _unit(x)
        e1 = _unit(np.asarray(e1) - (n @ e1) * n)
        e2 = np.cross(n, e1)
        return r, float(np.arctan2(d @ e2, d @ e1))

    def exp(self, x, v):
        """Point reached from ``x`` by walking along tangent ``v`` for length ``|v|``."""
        v = np.asarray(v, dtype=float)
        s = np.linalg.norm(v)
        if s == 0:
            return np.asarray(x, dtype=float).copy()
        n = _unit(x)
        return rotate(np.asarray(x, dtype=float), np.cross(n, v / s), s / self.radius)

    def midpoint(self, x, y):
        return self.radius * _unit(_unit(x) + _unit(y))


def planar_reference(positions, quantity, base=None, vector=None):
    """Exact flat-chart quantities for a planar mesh (z ignored).

    ``quantity`` is ``"log"`` (per-vertex ``(u, v)`` about ``base``),
    ``"distance"`` (Euclidean distance to ``base``) or ``"transport"``
    (the constant field ``vector`` at every vertex).
    """
    P = np.asarray(positions, dtype=float)[:, :2]
    if quantity == "log":
        return P - np.asarray(base, dtype=float)[:2]
    if quantity == "distance":
        return np.linalg.norm(P - np.asarray(base, dtype=float)[:2], axis=1)
    if quantity == "transport":
        return np.tile(np.asarray(vector, dtype=float)[:2], (len(P), 1))
    raise ValueError(f"unknown quantity {quantity!r}")


# ----------------------------------------------------------------------
# radial initial data by quadrature

def hat_integral_quadrature(corners, target, angle_range, eps):
    """Integrate ``hat_target * n`` over an eps-arc around corner 0 of a planar triangle.

    ``corners`` are three complex positions with corner 0 at the origin;
    ``target`` selects which corner's hat function to integrate; the arc
    spans polar angles ``angle_range``.  Uses the measure ``H^1 / eps^2``.
    Returns a complex number.
    """
    P = np.asarray(corners, dtype=complex)
    A2 = np.imag(np.conj(P[1] - P[0]) * (P[2] - P[0]))

    def hat(x):
        a, b = P[(target + 1) % 3], P[(target + 2) % 3]
        return np.imag(np.conj(b - a) * (x - a)) / A2

    def integrand(th, part):
        x = eps * np.exp(1j * th)
        val = hat(x) * np.exp(1j * th) * eps / eps ** 2
        return val.real if part == 0 else val.imag

    lo, hi = angle_range
    re = integrate.quad(integrand, lo, hi, args=(0,), epsabs=1e-14, epsrel=1e-12)[0]
    im = integrate.quad(integrand, lo, hi, args=(1,), epsabs=1e-14, epsrel=1e-12)[0]
    return re + 1j * im


def flat_one_ring_quadrature(P2, ring, eps):
    """Radial initial data at a flat interior vertex by quadrature.

    ``P2`` are planar vertex positions (complex), ``ring`` the triangles
    ``(0, j, k)`` around the center vertex 0 in counter-clockwise order.
    Returns ``{vertex: integral}`` in the global planar frame, including the
    center's own entry.
    """
    out = {}
    for (c, j, k) in ring:
        corners = np.array([P2[c], P2[j], P2[k]]) - P2[c]
        a0 = np.angle(corners[1])
        a1 = a0 + (np.angle(corners[2] / corners[1]) % (2 * np.pi))
        for target, v in ((0, c), (1, j), (2, k)):
            out[v] = out.get(v, 0) + hat_integral_quadrature(corners, target, (a0, a1), eps)
    return out


# ----------------------------------------------------------------------
# brute-force centers

def energy(dist, p, weights=None):
    """``sum w d^p / (2 sum w)`` for an array of distances (last axis = samples)."""
    dist = np.asarray(dist, dtype=float)
    w = np.ones(dist.shape[-1]) if weights is None else np.asarray(weights, dtype=float)
    return (dist ** p) @ w / (2.0 * w.sum())


def brute_force_center(candidates, samples, p, metric, weights=None):
    """Index of the candidate minimizing the center energy under ``metric(a, b)``."""
    E = [energy([metric(c, s) for s in samples], p, weights) for c in candidates]
    return int(np.argmin(E)), np.asarray(E)


def euclidean(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def fermat_point(points):
    """Fermat point of a planar triangle with all angles below 120 degrees."""
    from scipy.optimize import minimize

    pts = np.asarray(points, dtype=float)[:, :2]
    res = minimize(lambda x: np.linalg.norm(pts - x, axis=1).sum(), pts.mean(axis=0),
                   method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 10000})
    return res.x


def planar_lloyd(positions, weights, sites, iterations=200):
    """Euclidean Lloyd iteration on a weighted planar vertex sample."""
    P = np.asarray(positions, dtype=float)[:, :2]
    S = np.asarray(sites, dtype=float)[:, :2].copy()
    w = np.asarray(weights, dtype=float)
    for _ in range(iterations):
        lab = np.argmin(((P[:, None, :] - S[None]) ** 2).sum(-1), axis=1)
        for s in range(len(S)):
            m = lab == s
            if m.any():
                S[s] = (w[m, None] * P[m]).sum(0) / w[m].sum()
    return S


def sphere_transport(x, y, X, radius=1.0):
    return SphereOracle(radius).transport(x, y, X)


def sphere_log(x, y, radius=1.0):
    """``(r, phi)`` with ``phi`` measured from the tangent ``e1`` of :meth:`SphereOracle.log_polar`.

    Uses the projection of the z axis (or the x axis near the poles) as ``e1``.
    """
    xu = _unit(x)
    e1 = np.array([0.0, 0.0, 1.0]) if abs(xu[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    return SphereOracle(radius).log_polar(x, y, e1)


# ----------------------------------------------------------------------
# polyhedral transport by ray shooting

def _layout_bary(P, x):
    A2 = np.imag(np.conj(P[1] - P[0]) * (P[2] - P[0]))
    return np.array([np.imag(np.conj(P[(k + 2) % 3] - P[(k + 1) % 3]) * (x - P[(k + 1) % 3])) / A2
                     for k in range(3)])


def ray_transport_samples(mesh, source, n_rays=1440, max_length=None):
    """Transport along straightest rays fanned out from a source vertex.

    Every segment of every ray contributes its midpoint as a sample:
    ``(face, bary, rotation, traveled)``, where ``rotation`` carries a
    source-frame vector to the face frame by unfolding and ``traveled`` is
    the ray length up to the midpoint.  Tracing uses the library's
    straightest-geodesic walker, which is checked separately against flat
    and sphere closed forms.
    """
    from .geodesics import trace_geodesic
    from .mesh import SurfacePoint

    if max_length is None:
        max_length = 1.6 * np.ptp(mesh.positions, axis=0).max()
    out = []
    for a in np.linspace(0.0, 2 * np.pi, n_rays, endpoint=False):
        tr = trace_geodesic(mesh, SurfacePoint.at_vertex(source), max_length * np.exp(1j * a))
        acc = 0.0
        for f, x, y in tr.path:
            seg = abs(y - x)
            if seg == 0:
                continue
            out.append((f, _layout_bary(mesh.face_layout(f), 0.5 * (x + y)),
                        (y - x) / seg / tr.direction, acc + 0.5 * seg))
            acc += seg
    return out


def nearest_shortest_samples(mesh, samples, delta):
    """For each vertex, the sample within ``delta`` reached by the shortest ray.

    Rays cross each other past the cut locus; keeping the least traveled
    sample near a vertex selects the shortest geodesic.  Returns
    ``{vertex: sample index}`` for the vertices that have a sample nearby.
    """
    from scipy.spatial import cKDTree

    P3 = mesh.positions
    pts = np.array([b @ P3[mesh.faces[f]] for f, b, _, _ in samples])
    traveled = np.array([s[3] for s in samples])
    tree = cKDTree(pts)
    best = {}
    for y, idx in enumerate(tree.query_ball_point(P3, delta)):
        if idx:
            best[y] = int(idx[int(np.argmin(traveled[idx]))])
    return best
