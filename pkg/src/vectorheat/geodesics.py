"""Straightest geodesics traced face by face with isometric unfolding.

Inside a face the trace is a straight segment in the face layout (see
:meth:`IntrinsicMesh.face_layout`).  Crossing an edge re-expresses position
and direction in the neighboring face's layout, which is exactly an
unfolding.  At a vertex the trace leaves at normalized angle ``pi`` from
the incoming direction, splitting the vertex's angle sum equally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .mesh import IntrinsicMesh, MeshError, SurfacePoint, TWO_PI

VERTEX_TOL = 1e-12


@dataclass
class GeodesicTrace:
    """Result of :func:`trace_geodesic`.

    ``direction`` is the unit start direction in the start point's frame
    (vertex polar frame or face layout frame); ``end_direction`` is the unit
    direction at the endpoint in the frame of ``endpoint``.
    """

    start: SurfacePoint
    direction: complex
    length: float
    path: List[Tuple[int, complex, complex]] = field(default_factory=list)
    endpoint: Optional[SurfacePoint] = None
    end_direction: complex = 1.0
    truncated: bool = False
    traveled: float = 0.0

    @property
    def segment_lengths(self) -> np.ndarray:
        return np.array([abs(b - a) for _, a, b in self.path])

    @property
    def rotation(self) -> complex:
        """Unit complex carrying start-frame vectors to end-frame vectors."""
        return self.end_direction / self.direction


def _cross(a, b):
    return a.real * b.imag - a.imag * b.real


def _bary(P, x):
    A2 = _cross(P[1] - P[0], P[2] - P[0])
    return np.array([_cross(P[(k + 2) % 3] - P[(k + 1) % 3], x - P[(k + 1) % 3]) / A2 for k in range(3)])


def _layout_list(mesh):
    cached = mesh.__dict__.get("_layout_list")
    if cached is None:
        cached = mesh.__dict__["_layout_list"] = mesh.layouts.tolist()
    return cached


def _vertex_to_face(mesh: IntrinsicMesh, v: int, psi: float):
    """Face, corner and face-frame direction for polar angle ``psi`` at ``v``.

    Returns ``None`` when ``psi`` points into the gap of a boundary vertex.
    """
    hs = mesh.outgoing(v)
    ang = mesh.he_angle[hs]
    psi = psi % TWO_PI
    s = mesh.angle_scale[v]
    nI = mesh.n_interior_halfedges
    k = int(np.searchsorted(ang, psi, side="right")) - 1
    k = max(k, 0)
    h = int(hs[k])
    if h >= nI:
        return None
    offset = (psi - ang[k]) / s
    theta = mesh.corner_angle[h]
    if offset > theta * (1 + 1e-12):
        return None
    offset = min(offset, theta)
    f, c = h // 3, h % 3
    P = mesh.face_layout(f)
    e = P[(c + 1) % 3] - P[c]
    return f, c, e / abs(e) * np.exp(1j * offset)


def _face_to_vertex_angle(mesh: IntrinsicMesh, f: int, c: int, d: complex) -> float:
    """Polar angle at corner ``c`` of face ``f`` of a face-frame direction inside that corner."""
    h = 3 * f + c
    P = mesh.face_layout(f)
    e = P[(c + 1) % 3] - P[c]
    a = np.angle(d / e)
    a = min(max(a, 0.0), mesh.corner_angle[h])
    v = mesh.faces[f, c]
    return float((mesh.he_angle[h] + mesh.angle_scale[v] * a) % TWO_PI)


def trace_geodesic(mesh: IntrinsicMesh, start: SurfacePoint, v: complex, *, max_steps: int = None) -> GeodesicTrace:
    """Walk the straightest geodesic from ``start`` along ``v`` for length ``|v|``.

    ``v`` is a complex tangent vector in the start point's frame: the polar
    frame of the start vertex, or the layout frame of the start face.
    """
    v = complex(v)
    length = abs(v)
    if length == 0:
        raise ValueError("cannot trace a zero vector")
    d0 = v / length
    trace = GeodesicTrace(start, d0, length)
    if max_steps is None:
        max_steps = 20 * mesh.n_faces + 100

    if start.is_vertex:
        placed = _vertex_to_face(mesh, start.vertex, np.angle(d0))
        if placed is None:
            trace.truncated = True
            trace.endpoint = start
            trace.end_direction = d0
            return trace
        f, c, d = placed
        x = mesh.layouts[f, c]
    else:
        f = start.face
        x = np.asarray(start.bary) @ mesh.layouts[f]
        d = d0

    layouts = _layout_list(mesh)
    twin = mesh.he_twin
    nI = mesh.n_interior_halfedges
    P = layouts[f]
    x, d = complex(x), complex(d)
    remaining = length
    for _ in range(max_steps):
        # coordinate k, the area opposite corner k, reaches zero first
        lam, k_exit = np.inf, -1
        for k in range(3):
            a, b = P[(k + 1) % 3], P[(k + 2) % 3]
            dbk = _cross(b - a, d)
            if dbk < 0:
                lk = max(_cross(b - a, x - a), 0.0) / -dbk
                if lk < lam:
                    lam, k_exit = lk, k
        if lam >= remaining:
            y = x + remaining * d
            trace.path.append((f, x, y))
            trace.traveled += remaining
            bb = np.clip(_bary(P, y), 0.0, None)
            trace.endpoint = SurfacePoint.in_face(f, bb / bb.sum())
            trace.end_direction = d
            return trace
        y = x + lam * d
        trace.path.append((f, x, y))
        trace.traveled += lam
        remaining -= lam
        ell = max(abs(P[1] - P[0]), abs(P[2] - P[1]), abs(P[0] - P[2]))
        near = [m for m in range(3) if m != k_exit and abs(y - P[m]) <= VERTEX_TOL * ell]
        if near:
            m = near[0]
            vtx = int(mesh.faces[f, m])
            if mesh.boundary_vertex[vtx]:
                return _truncate(trace, f, P, y, d)
            psi_back = _face_to_vertex_angle(mesh, f, m, -d)
            placed = _vertex_to_face(mesh, vtx, psi_back + np.pi)
            if placed is None:
                return _truncate(trace, f, P, y, d)
            f, c, d = placed
            d = complex(d)
            P = layouts[f]
            x = P[c]
            continue
        # cross the edge opposite corner k_exit: halfedge from corner k+1 to k+2
        c = (k_exit + 1) % 3
        t = int(twin[3 * f + c])
        if t >= nI:
            return _truncate(trace, f, P, y, d)
        A, B = P[c], P[(c + 1) % 3]
        e = B - A
        u = min(max(((y - A) * e.conjugate()).real / (e.real ** 2 + e.imag ** 2), 0.0), 1.0)
        g, cg = t // 3, t % 3
        Q = layouts[g]
        eg = Q[(cg + 1) % 3] - Q[cg]
        x = Q[cg] + (1.0 - u) * eg
        d = d * (-eg / abs(eg)) / (e / abs(e))
        d = d / abs(d)
        f, P = g, Q
    raise MeshError(f"geodesic trace did not finish within {max_steps} face steps")


def _truncate(trace, f, P, y, d):
    trace.truncated = True
    bb = np.clip(_bary(P, y), 0.0, None)
    trace.endpoint = SurfacePoint.in_face(f, bb / bb.sum())
    trace.end_direction = d
    return trace


def transport_along_trace(trace: GeodesicTrace, X: complex) -> complex:
    """Carry ``X`` (start frame) to the trace endpoint (end frame) by unfolding."""
    return complex(X) * trace.rotation


def exp_map(mesh: IntrinsicMesh, start: SurfacePoint, v: complex) -> SurfacePoint:
    """Endpoint of the straightest geodesic from ``start`` along ``v``."""
    return trace_geodesic(mesh, start, v).endpoint
