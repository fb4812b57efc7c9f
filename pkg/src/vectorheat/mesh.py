"""Intrinsic triangle meshes with per-vertex polar tangent spaces.

Only edge lengths enter the geometry.  Connectivity is stored as a halfedge
structure in flat integer arrays: the interior halfedge ``3*f + c`` runs from
``faces[f, c]`` to ``faces[f, (c + 1) % 3]``; halfedges on the exterior side
of boundary edges are appended after the ``3*F`` interior ones and carry face
index ``-1``.

Tangent vectors at a vertex are complex numbers ``r * exp(1j * phi)`` in the
vertex's polar frame, where ``phi = 0`` is the direction of the vertex's
reference halfedge and angles are measured counter-clockwise after
rescaling the total cone angle of interior vertices to ``2*pi``; boundary
vertices keep their actual corner angles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Tuple

import numpy as np

TWO_PI = 2.0 * np.pi


class MeshError(ValueError):
    """Invalid mesh input.  Carries the offending element when known."""

    def __init__(self, message, *, edge=None, face=None, vertex=None, line=None):
        self.edge = edge
        self.face = face
        self.vertex = vertex
        self.line = line
        parts = [message]
        if line is not None:
            parts.append(f"(line {line})")
        super().__init__(" ".join(parts))


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector ``value`` expressed in the polar frame of ``vertex``."""

    value: complex
    vertex: int

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def angle(self) -> float:
        return float(np.angle(self.value)) % TWO_PI


@dataclass(frozen=True)
class SurfacePoint:
    """A point on the mesh: either a vertex or a face with barycentric coordinates.

    Barycentric coordinates are ordered like the face's corners in
    ``mesh.faces[face]``.
    """

    vertex: Optional[int] = None
    face: Optional[int] = None
    bary: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if (self.vertex is None) == (self.face is None):
            raise ValueError("SurfacePoint needs exactly one of vertex or face")
        if self.face is not None:
            if self.bary is None or len(self.bary) != 3:
                raise ValueError("face points need three barycentric coordinates")
            b = np.asarray(self.bary, dtype=float)
            if abs(b.sum() - 1.0) > 1e-12 or np.any(b < -1e-12):
                raise ValueError(f"invalid barycentric coordinates {tuple(b)}")
            object.__setattr__(self, "bary", tuple(float(x) for x in b))

    @classmethod
    def at_vertex(cls, v: int) -> "SurfacePoint":
        return cls(vertex=int(v))

    @classmethod
    def in_face(cls, f: int, bary: Sequence[float]) -> "SurfacePoint":
        b = np.clip(np.asarray(bary, dtype=float), 0.0, None)
        b = b / b.sum()
        return cls(face=int(f), bary=tuple(float(x) for x in b))

    @property
    def is_vertex(self) -> bool:
        return self.vertex is not None

    def corners(self, mesh: "IntrinsicMesh"):
        """``(vertices, weights)`` of the point's barycentric support."""
        if self.is_vertex:
            return np.array([self.vertex]), np.array([1.0])
        return mesh.faces[self.face].copy(), np.array(self.bary)

    def position(self, mesh: "IntrinsicMesh") -> np.ndarray:
        if mesh.positions is None:
            raise MeshError("no embedding available")
        vs, ws = self.corners(mesh)
        return ws @ mesh.positions[vs]


def _cotangents(a, b, c, area):
    # cot of the angle opposite side c, from lengths only
    return (a * a + b * b - c * c) / (4.0 * area)


def _heron(a, b, c):
    # Kahan's stable formula; sorts lengths descending
    s = np.sort(np.stack([a, b, c], axis=-1), axis=-1)[..., ::-1]
    x, y, z = s[..., 0], s[..., 1], s[..., 2]
    prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


class IntrinsicMesh:
    """Manifold, oriented triangle mesh described by edge lengths.

    Use :func:`build_intrinsic_mesh` to construct one.  Instances are treated
    as immutable after construction.
    """

    def __init__(self, faces, n_vertices, he_tail, he_head, he_twin, he_edge,
                 edge_length, he_angle=None, positions=None):
        self.faces = np.asarray(faces, dtype=np.int64)
        self.n_vertices = int(n_vertices)
        self.n_faces = len(self.faces)
        self.he_tail = np.asarray(he_tail, dtype=np.int64)
        self.he_head = np.asarray(he_head, dtype=np.int64)
        self.he_twin = np.asarray(he_twin, dtype=np.int64)
        self.he_edge = np.asarray(he_edge, dtype=np.int64)
        self.edge_length = np.asarray(edge_length, dtype=float)
        self.positions = None if positions is None else np.asarray(positions, dtype=float)
        self.n_halfedges = len(self.he_tail)
        self.n_edges = len(self.edge_length)

        nI = 3 * self.n_faces
        H = self.n_halfedges
        idx = np.arange(nI)
        self.he_face = np.full(H, -1, dtype=np.int64)
        self.he_face[:nI] = idx // 3
        self.he_next = np.full(H, -1, dtype=np.int64)
        self.he_prev = np.full(H, -1, dtype=np.int64)
        self.he_next[:nI] = 3 * (idx // 3) + (idx % 3 + 1) % 3
        self.he_prev[:nI] = 3 * (idx // 3) + (idx % 3 + 2) % 3

        # one halfedge per edge, preferring the interior side
        edge_he = np.full(self.n_edges, -1, dtype=np.int64)
        order = np.arange(H)[::-1]
        edge_he[self.he_edge[order]] = order
        self.edge_he = edge_he
        self.edge_vertices = np.stack([self.he_tail[edge_he], self.he_head[edge_he]], axis=1)
        self.boundary_edge = self.he_face[self.he_twin[edge_he]] < 0

        self._derive_geometry()
        self._order_outgoing(he_angle)

    # ------------------------------------------------------------------
    def _derive_geometry(self):
        nI = 3 * self.n_faces
        ell = self.edge_length[self.he_edge]
        self.he_length = ell
        a = ell[:nI].reshape(-1, 3)  # a[:, c] = |corner c -> corner c+1|
        if np.any(a <= 0) or not np.all(np.isfinite(a)):
            bad = int(np.nonzero(~(a > 0).all(axis=1) | ~np.isfinite(a).all(axis=1))[0][0])
            raise MeshError(f"non-positive edge length in face {bad}", face=bad)
        l0, l1, l2 = a[:, 0], a[:, 1], a[:, 2]
        viol = (l0 >= l1 + l2) | (l1 >= l2 + l0) | (l2 >= l0 + l1)
        if np.any(viol):
            bad = int(np.nonzero(viol)[0][0])
            raise MeshError(f"triangle inequality violated in face {bad} "
                            f"with lengths {tuple(a[bad])}", face=bad)
        self.face_area = _heron(l0, l1, l2)
        # corner c sits between sides c (outgoing) and c+2 (incoming), opposite side c+1
        cosines = np.empty_like(a)
        cots = np.empty_like(a)
        for c in range(3):
            out, inc, opp = a[:, c], a[:, (c + 2) % 3], a[:, (c + 1) % 3]
            cosines[:, c] = (out * out + inc * inc - opp * opp) / (2.0 * out * inc)
            cots[:, c] = _cotangents(out, inc, opp, self.face_area)
        self.corner_angle = np.arccos(np.clip(cosines, -1.0, 1.0)).ravel()
        self.corner_cot = cots.ravel()
        # planar layout per face: corner 0 at the origin, corner 1 on the +x axis
        self.layouts = np.stack([np.zeros(len(a)), l0 + 0j,
                                 l2 * np.exp(1j * self.corner_angle[0::3])], axis=1)

        V = self.n_vertices
        self.angle_sum = np.bincount(self.he_tail[:nI], weights=self.corner_angle, minlength=V)
        self.boundary_vertex = np.zeros(V, dtype=bool)
        bnd = self.he_face < 0
        self.boundary_vertex[self.he_tail[bnd]] = True
        with np.errstate(divide="ignore"):
            # boundary wedges are already flat and keep their angles
            self.angle_scale = np.where(self.boundary_vertex, 1.0, TWO_PI / self.angle_sum)
        self.he_normalized_angle = np.zeros(self.n_halfedges)
        self.he_normalized_angle[:nI] = self.corner_angle * self.angle_scale[self.he_tail[:nI]]

    def _order_outgoing(self, he_angle):
        """Walk each one-ring counter-clockwise; fill polar angles and CSR ordering."""
        V, H, nI = self.n_vertices, self.n_halfedges, 3 * self.n_faces
        tail = self.he_tail
        face = self.he_face
        twin = self.he_twin.tolist()
        prev = self.he_prev.tolist()
        face_l = face.tolist()
        norm_angle = self.he_normalized_angle.tolist()

        counts = np.bincount(tail, minlength=V)
        if np.any(counts == 0):
            v = int(np.nonzero(counts == 0)[0][0])
            raise MeshError(f"vertex {v} is not referenced by any face", vertex=v)
        bnd_out = np.bincount(tail[face < 0], minlength=V)
        if np.any(bnd_out > 1):
            v = int(np.nonzero(bnd_out > 1)[0][0])
            raise MeshError(f"non-manifold vertex {v} (several boundary fans)", vertex=v)

        start = np.full(V, np.iinfo(np.int64).max, dtype=np.int64)
        interior = np.arange(nI)
        np.minimum.at(start, tail[:nI], interior)
        first_bnd = interior[face[self.he_twin[:nI]] < 0]
        start[tail[first_bnd]] = first_bnd

        ptr = np.zeros(V + 1, dtype=np.int64)
        ptr[1:] = np.cumsum(counts)
        out = [0] * H
        angles = [0.0] * H
        start_l = start.tolist()
        ptr_l = ptr.tolist()
        for v in range(V):
            h = start_l[v]
            s = h
            acc = 0.0
            k = ptr_l[v]
            while True:
                out[k] = h
                k += 1
                angles[h] = acc
                if face_l[h] < 0:
                    break
                acc += norm_angle[h]
                h = twin[prev[h]]
                if h == s:
                    break
            if k != ptr_l[v + 1]:
                raise MeshError(f"non-manifold vertex {v} (disconnected one-ring)", vertex=v)
        self.out_ptr = ptr
        self.out_he = np.asarray(out, dtype=np.int64)
        self.vertex_he = start
        if he_angle is None:
            self.he_angle = np.asarray(angles)
        else:
            self.he_angle = np.asarray(he_angle, dtype=float).copy()
        rho = self.he_angle[self.he_twin] + np.pi - self.he_angle
        self.he_rotation = np.exp(1j * rho)

    # ------------------------------------------------------------------
    @property
    def n_interior_halfedges(self) -> int:
        return 3 * self.n_faces

    @property
    def total_area(self) -> float:
        return float(self.face_area.sum())

    @property
    def mean_edge_length(self) -> float:
        return float(self.edge_length.mean())

    def outgoing(self, v: int) -> np.ndarray:
        """Outgoing halfedges of ``v`` in counter-clockwise order from the reference."""
        return self.out_he[self.out_ptr[v]:self.out_ptr[v + 1]]

    def halfedge(self, i: int, j: int) -> int:
        """Halfedge from ``i`` to ``j``; raises ``KeyError`` when absent."""
        for h in self.outgoing(i):
            if self.he_head[h] == j:
                return int(h)
        raise KeyError(f"no edge between vertices {i} and {j}")

    def cotan_weights(self) -> np.ndarray:
        """Per-edge ``cot(theta_k) + cot(theta_l)`` (one term on boundary edges)."""
        nI = 3 * self.n_faces
        # the corner opposite halfedge h is the corner of prev(h)
        opp = self.corner_cot[self.he_prev[:nI]]
        return np.bincount(self.he_edge[:nI], weights=opp, minlength=self.n_edges)

    def face_layout(self, f: int) -> np.ndarray:
        """Planar corner positions of face ``f`` as complex numbers.

        Corner 0 sits at the origin and corner 1 on the positive real axis;
        this layout defines the face's tangent frame.
        """
        return self.layouts[f]

    def face_to_vertex_rotation(self, f: int, c: int) -> complex:
        """Unit complex mapping face-frame vectors of ``f`` to the frame of corner ``c``.

        The corner wedge's bisector is matched exactly; off-bisector angles are
        carried over without rescaling.
        """
        h = 3 * f + c
        P = self.face_layout(f)
        a_h = np.angle(P[(c + 1) % 3] - P[c])
        theta = self.corner_angle[h]
        s = self.angle_scale[self.faces[f, c]]
        return complex(np.exp(1j * (self.he_angle[h] + 0.5 * s * theta - a_h - 0.5 * theta)))

    def vertex_normals(self) -> np.ndarray:
        if self.positions is None:
            raise MeshError("no embedding available")
        P = self.positions
        F = self.faces
        n = np.cross(P[F[:, 1]] - P[F[:, 0]], P[F[:, 2]] - P[F[:, 0]])
        N = np.zeros((self.n_vertices, 3))
        for c in range(3):
            np.add.at(N, F[:, c], n)
        return N / np.linalg.norm(N, axis=1, keepdims=True)

    def __repr__(self):
        return (f"IntrinsicMesh(V={self.n_vertices}, E={self.n_edges}, "
                f"F={self.n_faces}, boundary={bool(self.boundary_edge.any())})")


def build_intrinsic_mesh(faces, positions=None, lengths=None) -> IntrinsicMesh:
    """Build an :class:`IntrinsicMesh` from faces and either positions or lengths.

    Parameters
    ----------
    faces : (F, 3) array_like of int
        Consistently oriented triangles.
    positions : (V, 3) or (V, 2) array_like, optional
        Vertex positions; edge lengths are computed from them and the
        embedding is kept for extrinsic conversions.
    lengths : mapping or (F, 3) array_like, optional
        Either ``{(i, j): length}`` keyed by unordered vertex pairs, or a
        per-face array whose entry ``[f, c]`` is the length of the side from
        corner ``c`` to corner ``c + 1``.
    """
    faces = np.asarray(faces, dtype=np.int64)
    if faces.ndim != 2 or faces.shape[1] != 3:
        raise MeshError("faces must be an (F, 3) array of vertex indices")
    if len(faces) == 0:
        raise MeshError("mesh has no faces")
    if (positions is None) == (lengths is None):
        raise MeshError("give exactly one of positions or lengths")
    if positions is not None:
        positions = np.asarray(positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] not in (2, 3):
            raise MeshError("positions must be (V, 2) or (V, 3)")
        if positions.shape[1] == 2:
            positions = np.column_stack([positions, np.zeros(len(positions))])
        V = len(positions)
    else:
        V = int(faces.max()) + 1
    if faces.min() < 0 or faces.max() >= V:
        raise MeshError("face index out of range")
    degenerate = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 2] == faces[:, 0])
    if np.any(degenerate):
        bad = int(np.nonzero(degenerate)[0][0])
        raise MeshError(f"face {bad} repeats a vertex", face=bad)

    F = len(faces)
    nI = 3 * F
    tail = faces.ravel()
    head = faces[:, [1, 2, 0]].ravel()
    key = tail * V + head
    order = np.argsort(key, kind="stable")
    sk = key[order]
    dup = np.nonzero(sk[1:] == sk[:-1])[0]
    if len(dup):
        h = int(order[dup[0]])
        e = (int(tail[h]), int(head[h]))
        raise MeshError(f"non-manifold or inconsistently oriented edge {e}", edge=e)
    rkey = head * V + tail
    pos = np.searchsorted(sk, rkey)
    pos = np.minimum(pos, nI - 1)
    found = sk[pos] == rkey
    twin = np.full(nI, -1, dtype=np.int64)
    twin[found] = order[pos[found]]

    bnd = np.nonzero(~found)[0]
    nB = len(bnd)
    b_idx = nI + np.arange(nB)
    twin[bnd] = b_idx
    he_tail = np.concatenate([tail, head[bnd]])
    he_head = np.concatenate([head, tail[bnd]])
    he_twin = np.concatenate([twin, bnd])

    H = nI + nB
    canon = np.minimum(np.arange(H), he_twin)
    uniq, he_edge = np.unique(canon, return_inverse=True)

    if positions is not None:
        ch = uniq
        edge_length = np.linalg.norm(positions[he_head[ch]] - positions[he_tail[ch]], axis=1)
    elif isinstance(lengths, Mapping):
        edge_length = np.empty(len(uniq))
        norm = {(min(a, b), max(a, b)): float(v) for (a, b), v in lengths.items()}
        for e, h in enumerate(uniq):
            a, b = int(he_tail[h]), int(he_head[h])
            try:
                edge_length[e] = norm[(min(a, b), max(a, b))]
            except KeyError:
                raise MeshError(f"missing length for edge {(a, b)}", edge=(a, b)) from None
    else:
        per_face = np.asarray(lengths, dtype=float)
        if per_face.shape != faces.shape:
            raise MeshError("per-face lengths must have the same shape as faces")
        flat = per_face.ravel()
        edge_length = np.empty(len(uniq))
        edge_length[he_edge[:nI]] = flat
        mismatch = np.abs(flat - edge_length[he_edge[:nI]]) > 1e-12 * np.maximum(flat, 1.0)
        if np.any(mismatch):
            h = int(np.nonzero(mismatch)[0][0])
            e = (int(he_tail[h]), int(he_head[h]))
            raise MeshError(f"inconsistent lengths for edge {e}", edge=e)
    if np.any(~(edge_length > 0)):
        e = int(np.nonzero(~(edge_length > 0))[0][0])
        h = uniq[e]
        pair = (int(he_tail[h]), int(he_head[h]))
        raise MeshError(f"non-positive length on edge {pair}", edge=pair)

    return IntrinsicMesh(faces, V, he_tail, he_head, he_twin, he_edge, edge_length,
                         positions=positions)


def transport_along_edge(mesh: IntrinsicMesh, v: TangentVector, edge) -> TangentVector:
    """Carry ``v`` across an edge to the opposite endpoint.

    ``edge`` is an edge index or a ``(i, j)`` vertex pair.
    """
    if isinstance(edge, (tuple, list)):
        i, j = int(edge[0]), int(edge[1])
        if v.vertex == i:
            other = j
        elif v.vertex == j:
            other = i
        else:
            raise MeshError(f"vector at {v.vertex} is not on edge {(i, j)}", edge=(i, j))
        h = mesh.halfedge(v.vertex, other)
    else:
        h = int(mesh.edge_he[edge])
        if mesh.he_tail[h] != v.vertex:
            h = int(mesh.he_twin[h])
        if mesh.he_tail[h] != v.vertex:
            raise MeshError(f"vector at {v.vertex} is not on edge {edge}", edge=edge)
    return TangentVector(complex(mesh.he_rotation[h] * v.value), int(mesh.he_head[h]))


# ----------------------------------------------------------------------
# extrinsic conversions (embedded meshes only)

def _tangent_chart(mesh: IntrinsicMesh, i: int):
    """Piecewise-linear correspondence between projected and polar angles at ``i``."""
    if mesh.positions is None:
        raise MeshError("no embedding available")
    cache = mesh.__dict__.setdefault("_chart_cache", {})
    if i in cache:
        return cache[i]
    n = mesh.vertex_normals()[i] if "_normals" not in mesh.__dict__ else mesh._normals[i]
    P = mesh.positions
    hs = mesh.outgoing(i)
    d = P[mesh.he_head[hs]] - P[i]
    d = d - np.outer(d @ n, n)
    e1 = d[0] / np.linalg.norm(d[0])
    e2 = np.cross(n, e1)
    raw = np.arctan2(d @ e2, d @ e1)
    proj = np.zeros(len(hs) + 1)
    for k in range(1, len(hs)):
        proj[k] = proj[k - 1] + (raw[k] - proj[k - 1]) % TWO_PI
    proj[-1] = TWO_PI
    polar = np.append(mesh.he_angle[hs], TWO_PI)
    chart = (n, e1, e2, proj, polar)
    cache[i] = chart
    return chart


def extrinsic_to_tangent(mesh: IntrinsicMesh, i: int, vec) -> TangentVector:
    """Express the tangential part of a 3-vector at vertex ``i`` in its polar frame."""
    if "_normals" not in mesh.__dict__ and mesh.positions is not None:
        mesh._normals = mesh.vertex_normals()
    n, e1, e2, proj, polar = _tangent_chart(mesh, i)
    vec = np.asarray(vec, dtype=float)
    x, y = vec @ e1, vec @ e2
    mag = np.hypot(x, y)
    a = np.arctan2(y, x) % TWO_PI
    phi = np.interp(a, proj, polar)
    return TangentVector(complex(mag * np.exp(1j * phi)), int(i))


def tangent_to_extrinsic(mesh: IntrinsicMesh, v: TangentVector) -> np.ndarray:
    """3-vector in the tangent plane of ``v.vertex`` representing ``v``."""
    if "_normals" not in mesh.__dict__ and mesh.positions is not None:
        mesh._normals = mesh.vertex_normals()
    n, e1, e2, proj, polar = _tangent_chart(mesh, v.vertex)
    phi = np.angle(v.value) % TWO_PI
    a = np.interp(phi, polar, proj)
    return abs(v.value) * (np.cos(a) * e1 + np.sin(a) * e2)


def field_to_extrinsic(mesh: IntrinsicMesh, values) -> np.ndarray:
    """Per-vertex complex field to ``(V, 3)`` extrinsic vectors."""
    values = np.asarray(values)
    return np.array([tangent_to_extrinsic(mesh, TangentVector(complex(z), i))
                     for i, z in enumerate(values)])
