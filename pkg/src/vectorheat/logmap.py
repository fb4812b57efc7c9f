"""Global logarithmic map about a basepoint.

The horizontal field ``H`` is the vector heat transport of a zero
direction; the radial field ``R`` is the transport of outward unit normals
on a vanishing circle around the basepoint, discretized by integrating hat
functions against that circle.  The angle from ``H`` to ``R`` gives the
polar angle and a Poisson solve against the divergence of ``R`` gives the
radius.  Edges touching the basepoint carry their exact distance
increments in that Poisson right-hand side.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import operators
from .mesh import IntrinsicMesh, MeshError, SurfacePoint
from .vhm import VectorHeatSolver, point_sources

UNIT_EPS = 1e-300


@dataclass
class RadialInitialData:
    """Radial initial conditions around one source vertex.

    ``values`` are in each vertex's own frame; ``source_frame`` holds the
    same entries expressed in the source vertex's frame, before transport
    to the neighbors.
    """

    source: int
    vertices: np.ndarray
    values: np.ndarray
    source_frame: np.ndarray


def _neighbor_terms(alpha, l_near, l_far, area):
    """Integrals of the hat functions of a corner's two far vertices.

    For a corner of angle ``alpha`` at the source with sides ``l_near``
    (towards the first vertex ``a``, on the local x axis) and ``l_far``
    (towards ``b``, at angle ``alpha``), return ``(x_a, x_b)``, each in the
    frame whose x axis points along its own edge.
    """
    s, c = np.sin(alpha), np.cos(alpha)
    k = 1.0 / (4.0 * area)
    x_a = k * l_far * (alpha * s + 1j * (s - alpha * c))
    x_b = k * l_near * (alpha * s + 1j * (alpha * c - s))
    return x_a, x_b


def _center_term(alpha, l_ij, l_ik, area):
    s, c = np.sin(alpha), np.cos(alpha)
    re = -s * (l_ik * alpha + l_ij * s)
    im = l_ij * (c * s - alpha) + l_ik * (alpha * c - s)
    return (re + 1j * im) / (4.0 * area)


def radial_initial_conditions(mesh: IntrinsicMesh, i: int, method: str = "integrated") -> RadialInitialData:
    """Initial data for the radial field around vertex ``i``.

    ``method="integrated"`` projects unit outward normals on a small circle
    onto the hat functions (independent of the circle's radius);
    ``method="naive"`` samples the unit edge direction at each neighbor and
    leaves the source entry at zero.
    """
    i = int(i)
    hs = mesh.outgoing(i)
    interior = hs[hs < mesh.n_interior_halfedges]
    if len(interior) == 0:
        raise MeshError(f"vertex {i} has no incident face", vertex=i)
    nbrs = mesh.he_head[hs]
    order = {int(v): n for n, v in enumerate(nbrs)}
    local = np.zeros(len(hs) + 1, dtype=complex)  # last slot is the source
    if method == "naive":
        local[:-1] = np.exp(1j * mesh.he_angle[hs])
    elif method == "integrated":
        ell = mesh.he_length
        for h in interior:
            hp = mesh.he_prev[h]
            a, b = int(mesh.he_head[h]), int(mesh.he_tail[hp])
            alpha = mesh.corner_angle[h]
            area = mesh.face_area[h // 3]
            x_a, x_b = _neighbor_terms(alpha, ell[h], ell[hp], area)
            h_ib = mesh.he_twin[hp]
            local[order[a]] += np.exp(1j * mesh.he_angle[h]) * x_a
            local[order[b]] += np.exp(1j * mesh.he_angle[h_ib]) * x_b
            local[-1] += np.exp(1j * mesh.he_angle[h]) * _center_term(alpha, ell[h], ell[hp], area)
    else:
        raise ValueError(f"unknown initialization {method!r}")
    values = local.copy()
    values[:-1] = mesh.he_rotation[hs] * local[:-1]
    return RadialInitialData(i, np.append(nbrs, i), values, local)


@dataclass
class LogMapField:
    """Per-vertex log-map coordinates about ``basepoint``.

    ``u + 1j*v == r * exp(1j*phi)``; the angle origin is the zero direction
    ``H0``, so coordinates are expressed in the basepoint's frame.
    """

    basepoint: SurfacePoint
    u: np.ndarray
    v: np.ndarray
    R: np.ndarray
    H: np.ndarray
    r: np.ndarray
    phi: np.ndarray
    mesh: Optional[IntrinsicMesh] = None
    H0: complex = 1.0  # unit zero direction in the basepoint's frame

    @property
    def uv(self) -> np.ndarray:
        return np.stack([self.u, self.v], axis=1)

    @property
    def complex(self) -> np.ndarray:
        return self.u + 1j * self.v


def _unit(z):
    a = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(a > UNIT_EPS, z / a, 0.0)


def compute_log_map(mesh: IntrinsicMesh, basepoint, H0: complex = 1.0, t: Optional[float] = None, *,
                    solver: Optional[VectorHeatSolver] = None, init: str = "integrated",
                    use_idt: bool = True) -> LogMapField:
    """Logarithmic map about ``basepoint`` (a vertex id or :class:`SurfacePoint`).

    ``H0`` is the zero direction, in the vertex frame for vertex basepoints
    and in the face frame (see :meth:`IntrinsicMesh.face_layout`) for face
    points.  Pass a prefactored ``solver`` to reuse factorizations across
    basepoints.
    """
    if not isinstance(basepoint, SurfacePoint):
        basepoint = SurfacePoint.at_vertex(int(basepoint))
    H0 = complex(H0)
    if H0 == 0:
        raise ValueError("zero direction H0 must be nonzero")
    H0 = H0 / abs(H0)
    if solver is None:
        solver = VectorHeatSolver(mesh, t, use_idt=use_idt)
    imesh = solver.intrinsic
    n = mesh.n_vertices

    H = _unit(solver.diffuse_vector(point_sources(mesh, basepoint, H0).scatter(n)))

    R0 = np.zeros(n, dtype=complex)
    verts, weights = basepoint.corners(mesh)
    for v, w in zip(verts, weights):
        if w <= 0:
            continue
        data = radial_initial_conditions(imesh, v, init)
        np.add.at(R0, data.vertices, w * data.values)
    R = _unit(solver.diffuse_vector(R0))
    if basepoint.is_vertex:
        R[basepoint.vertex] = 0.0
        H[basepoint.vertex] = H0

    phi = np.where(np.abs(R) > 0, np.angle(R * np.conj(H)), 0.0)

    Rij = operators.edge_projections(imesh, R)
    _exact_source_edges(mesh, imesh, basepoint, Rij)
    r = solver.poisson().solve(-0.5 * operators.edge_divergence(imesh, Rij))
    r = r - _gauge(mesh, basepoint, r)

    z = r * np.exp(1j * phi)
    return LogMapField(basepoint, z.real.copy(), z.imag.copy(), R, H, r, phi, mesh, H0)


def _support_distances(mesh: IntrinsicMesh, p: SurfacePoint):
    """Corners, barycentric weights and in-face distances from ``p`` to its corners."""
    verts, weights = p.corners(mesh)
    if p.is_vertex:
        return verts, weights, np.zeros(1)
    L = mesh.face_layout(p.face)
    return verts, weights, np.abs(L - weights @ L)


def _exact_source_edges(mesh: IntrinsicMesh, imesh: IntrinsicMesh, p: SurfacePoint, Rij):
    """Replace edge averages next to the basepoint by exact distance increments.

    With ``R`` zero at a vertex basepoint the averaged edge integral of a
    source edge is half its length, which biases every radius by about
    ``h/2``.  Along those edges the distance grows by exactly the edge
    length; inside a basepoint face the increments follow from the layout.
    """
    ev = imesh.edge_vertices
    if p.is_vertex:
        e = imesh.he_edge[imesh.outgoing(p.vertex)]
        Rij[e] = np.where(ev[e, 0] == p.vertex, 1.0, -1.0) * imesh.edge_length[e]
        return
    f = mesh.faces[p.face]
    _, _, d = _support_distances(mesh, p)
    for c in range(3):
        a, b = int(f[c]), int(f[(c + 1) % 3])
        try:
            h = imesh.halfedge(a, b)
        except KeyError:  # flipped away by the intrinsic Delaunay pass
            continue
        e = imesh.he_edge[h]
        if abs(imesh.edge_length[e] - mesh.edge_length[mesh.he_edge[3 * p.face + c]]) > 1e-12 * imesh.edge_length[e]:
            continue
        Rij[e] = (d[(c + 1) % 3] - d[c]) * (1.0 if ev[e, 0] == a else -1.0)


def _gauge(mesh: IntrinsicMesh, p: SurfacePoint, r) -> float:
    """Offset making the barycentric interpolant of ``r`` at ``p`` match the exact one.

    At a vertex this is ``r(p) = 0``.  At a face point the interpolant of
    the true distance is ``sum_c b_c |x_c - p| > 0``, not zero.
    """
    verts, weights, d = _support_distances(mesh, p)
    return float(weights @ (r[verts] - d))


def _same_face(field: LogMapField, p: SurfacePoint) -> bool:
    b = field.basepoint
    return not b.is_vertex and not p.is_vertex and p.face == b.face


def logmap_at(field: LogMapField, p: SurfacePoint) -> np.ndarray:
    """``(u, v)`` at a surface point by barycentric interpolation.

    Points in the face of a face-interior basepoint use the exact planar
    offset inside that face.
    """
    if p.is_vertex:
        return np.array([field.u[p.vertex], field.v[p.vertex]])
    L = field.mesh.face_layout(p.face)
    b = np.asarray(p.bary)
    if _same_face(field, p):
        z = (b - np.asarray(field.basepoint.bary)) @ L * np.conj(field.H0)
        return np.array([z.real, z.imag])
    f = field.mesh.faces[p.face]
    return np.array([b @ field.u[f], b @ field.v[f]])


def radius_at(field: LogMapField, p: SurfacePoint) -> float:
    """Geodesic distance estimate at a surface point."""
    if p.is_vertex:
        return float(field.r[p.vertex])
    b = np.asarray(p.bary)
    if _same_face(field, p):
        return float(abs((b - np.asarray(field.basepoint.bary)) @ field.mesh.face_layout(p.face)))
    return float(b @ field.r[field.mesh.faces[p.face]])
