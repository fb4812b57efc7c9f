"""Procedural test meshes: planar grids and disks, spheres, tori, and
deliberately poor triangulations.  Each function returns ``(positions, faces)``.
"""
import numpy as np
from scipy.spatial import ConvexHull, Delaunay


def grid(n, size=1.0, diagonal="alternate", jitter=0.0, seed=0):
    """Planar ``n x n``-cell grid over ``[0, size]^2`` split into triangles.

    ``diagonal`` is ``"right"`` (all cells split the same way) or
    ``"alternate"`` (checkerboard).  ``jitter`` displaces interior vertices
    by that fraction of the spacing.
    """
    xs = np.linspace(0.0, size, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    P = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    if jitter:
        rng = np.random.default_rng(seed)
        inner = (X.ravel() > 0) & (X.ravel() < size) & (Y.ravel() > 0) & (Y.ravel() < size)
        P[inner, :2] += jitter * (size / n) * rng.uniform(-1, 1, size=(inner.sum(), 2))
    faces = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            if diagonal == "right" or (i + j) % 2 == 0:
                faces += [(a, b, c), (a, c, d)]
            else:
                faces += [(a, b, d), (b, c, d)]
    return P, np.array(faces)


def disk(rings, radius=1.0):
    """Flat disk of concentric rings; vertex 0 is the center."""
    pts = [(0.0, 0.0)]
    ring_start = [0]
    for r in range(1, rings + 1):
        ring_start.append(len(pts))
        m = 6 * r
        for k in range(m):
            a = 2 * np.pi * k / m
            pts.append((radius * r / rings * np.cos(a), radius * r / rings * np.sin(a)))
    P = np.array(pts)
    tri = Delaunay(P)
    faces = _orient_ccw_2d(P, tri.simplices)
    return np.column_stack([P, np.zeros(len(P))]), faces


def random_disk(n, radius=1.0, seed=0):
    """Delaunay triangulation of a boundary circle plus random interior points."""
    rng = np.random.default_rng(seed)
    m = max(12, int(np.sqrt(n) * 3))
    a = 2 * np.pi * np.arange(m) / m
    bnd = radius * np.column_stack([np.cos(a), np.sin(a)])
    rr = radius * 0.97 * np.sqrt(rng.uniform(size=n))
    th = rng.uniform(0, 2 * np.pi, size=n)
    P = np.vstack([[0.0, 0.0], np.column_stack([rr * np.cos(th), rr * np.sin(th)]), bnd])
    faces = _orient_ccw_2d(P, Delaunay(P).simplices)
    return np.column_stack([P, np.zeros(len(P))]), faces


def _orient_ccw_2d(P, F):
    F = np.array(F)
    e1 = P[F[:, 1]] - P[F[:, 0]]
    e2 = P[F[:, 2]] - P[F[:, 0]]
    neg = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
    F[neg] = F[neg][:, [0, 2, 1]]
    return F


def icosahedron(radius=1.0):
    t = (1 + np.sqrt(5)) / 2
    P = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
                  [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
                  [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    F = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                  [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                  [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                  [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return radius * P / np.linalg.norm(P, axis=1, keepdims=True), F


def icosphere(level, radius=1.0):
    """Loop-subdivided icosahedron projected to the sphere.

    The icosahedron is rotated so that vertex 0 is the north pole ``(0, 0, radius)``.
    """
    P, F = icosahedron(1.0)
    # rotate vertex 0 onto +z
    v = P[0]
    axis = np.cross(v, [0, 0, 1.0])
    s, c = np.linalg.norm(axis), v[2]
    k = axis / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    Rm = np.eye(3) + s * K + (1 - c) * K @ K
    P = P @ Rm.T
    for _ in range(level):
        P, F = _subdivide(P, F)
        P /= np.linalg.norm(P, axis=1, keepdims=True)
    return radius * P, F


def _subdivide(P, F):
    edges = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
    uniq, inv = np.unique(edges, axis=0, return_inverse=True)
    inv = inv.ravel()
    mid = 0.5 * (P[uniq[:, 0]] + P[uniq[:, 1]])
    n = len(P)
    m = inv.reshape(3, -1).T + n  # midpoints of sides 01, 12, 20
    a, b, c = F[:, 0], F[:, 1], F[:, 2]
    ab, bc, ca = m[:, 0], m[:, 1], m[:, 2]
    newF = np.concatenate([np.stack([a, ab, ca], 1), np.stack([ab, b, bc], 1),
                           np.stack([ca, bc, c], 1), np.stack([ab, bc, ca], 1)])
    return np.vstack([P, mid]), newF


def random_sphere(n, radius=1.0, seed=0):
    """Convex hull of random points on the sphere: an irregular closed mesh."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    X[0] = [0.0, 0.0, 1.0]
    hull = ConvexHull(X)
    F = hull.simplices.copy()
    n_out = np.cross(X[F[:, 1]] - X[F[:, 0]], X[F[:, 2]] - X[F[:, 0]])
    flip = np.einsum("ij,ij->i", n_out, X[F].mean(axis=1)) < 0
    F[flip] = F[flip][:, [0, 2, 1]]
    return radius * X, F


def uv_sphere(n_lat, n_lon, radius=1.0):
    """Latitude/longitude sphere with pole vertices 0 (north) and 1 (south)."""
    pts = [(0, 0, 1.0), (0, 0, -1.0)]
    for i in range(1, n_lat):
        th = np.pi * i / n_lat
        for j in range(n_lon):
            ph = 2 * np.pi * j / n_lon
            pts.append((np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)))
    idx = lambda i, j: 2 + (i - 1) * n_lon + (j % n_lon)
    F = []
    for j in range(n_lon):
        F.append((0, idx(1, j), idx(1, j + 1)))
        F.append((1, idx(n_lat - 1, j + 1), idx(n_lat - 1, j)))
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a, b = idx(i, j), idx(i, j + 1)
            c, d = idx(i + 1, j + 1), idx(i + 1, j)
            F += [(a, d, c), (a, c, b)]
    return radius * np.array(pts), np.array(F)


def torus(n_major, n_minor, R=1.0, r=0.35, bump=0.0):
    """Torus of revolution, optionally with a sinusoidal bump on the tube radius."""
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    U, Vv = np.meshgrid(u, v, indexing="ij")
    rr = r * (1 + bump * np.sin(3 * U) * np.cos(2 * Vv))
    P = np.stack([(R + rr * np.cos(Vv)) * np.cos(U),
                  (R + rr * np.cos(Vv)) * np.sin(U),
                  rr * np.sin(Vv)], axis=-1).reshape(-1, 3)
    F = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            F += [(a, b, c), (a, c, d)]
    return P, np.array(F)


def thin_strip(n, height=0.05, shear=0.37):
    """Planar strip of sheared slivers: strongly non-Delaunay."""
    top = [(i + shear * n, height) for i in range(n + 1)]
    bot = [(float(i), 0.0) for i in range(n + 1)]
    P = np.array(bot + top)
    F = []
    for i in range(n):
        a, b = i, i + 1
        c, d = n + 1 + i + 1, n + 1 + i
        F += [(a, b, c), (a, c, d)]
    P3 = np.column_stack([P, np.zeros(len(P))])
    return P3, _orient_ccw_2d(P, F)


def fan_triangulated_disk(n, radius=1.0):
    """Polygon triangulated as a fan from one boundary vertex: long needle triangles."""
    a = 2 * np.pi * np.arange(n) / n
    P = np.column_stack([radius * np.cos(a), radius * np.sin(a), np.zeros(n)])
    F = np.array([(0, k, k + 1) for k in range(1, n - 1)])
    return P, F


def hexagon_fan(edge=1.0):
    """Six equilateral triangles around vertex 0; neighbors 1..6 counter-clockwise."""
    a = np.pi / 3 * np.arange(6)
    P = np.vstack([[0, 0, 0], np.column_stack([edge * np.cos(a), edge * np.sin(a), np.zeros(6)])])
    F = np.array([(0, 1 + k, 1 + (k + 1) % 6) for k in range(6)])
    return P, F


def perturb(P, amount, seed=0):
    """Random displacement of every vertex by up to ``amount`` per coordinate."""
    rng = np.random.default_rng(seed)
    return P + amount * rng.uniform(-1, 1, size=P.shape)


def ellipsoid(level, axes=(1.0, 0.7, 0.5)):
    """Icosphere scaled along the coordinate axes."""
    P, F = icosphere(level)
    return P * np.asarray(axes, dtype=float), F


def bumpy_sphere(level, amplitude=0.15):
    """Icosphere with a smooth radial bump pattern."""
    P, F = icosphere(level)
    r = 1 + amplitude * np.sin(3 * P[:, 0]) * np.sin(2 * P[:, 1] + 0.3) * np.cos(2 * P[:, 2])
    return P * r[:, None], F


def peanut(level, waist=0.35):
    """Elongated icosphere pinched around ``x = 0``."""
    P, F = icosphere(level)
    pinch = 1 - waist * np.exp(-(2 * P[:, 0]) ** 2)
    return P * np.array([1.6, 0.8, 0.8]) * pinch[:, None], F
