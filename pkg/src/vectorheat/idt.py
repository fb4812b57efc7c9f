"""Intrinsic Delaunay retriangulation by edge flips, tracking vertex tangent frames.

Flips re-partition corner angles without changing the metric, so vertex
angle sums are untouched and per-vertex polar coordinates computed on the
flipped mesh are valid verbatim on the input mesh.
"""
from collections import deque
from dataclasses import dataclass
import math

import numpy as np

from .mesh import IntrinsicMesh, MeshError, TWO_PI

DELAUNAY_TOL = 1e-12


@dataclass(frozen=True)
class DelaunayResult:
    mesh: IntrinsicMesh
    flip_count: int
    vertex_correspondence: np.ndarray


class _FlipState:
    """Mutable list-based copy of a mesh's connectivity used while flipping."""

    def __init__(self, mesh: IntrinsicMesh):
        self.nI = mesh.n_interior_halfedges
        self.V = mesh.n_vertices
        self.faces = mesh.faces.tolist()
        self.tail = mesh.he_tail.tolist()
        self.head = mesh.he_head.tolist()
        self.twin = mesh.he_twin.tolist()
        self.edge = mesh.he_edge.tolist()
        self.length = mesh.edge_length.tolist()
        self.angle = mesh.he_angle.tolist()
        self.scale = mesh.angle_scale.tolist()
        self.edge_he = mesh.edge_he.tolist()
        self.n_edges = mesh.n_edges

    # halfedge navigation on interior halfedges
    @staticmethod
    def nxt(h):
        return h - h % 3 + (h % 3 + 1) % 3

    @staticmethod
    def prv(h):
        return h - h % 3 + (h % 3 + 2) % 3

    def ell(self, h):
        return self.length[self.edge[h]]

    def corner(self, h):
        """Interior angle at the tail of interior halfedge ``h``."""
        a, b, c = self.ell(h), self.ell(self.prv(h)), self.ell(self.nxt(h))
        x = (a * a + b * b - c * c) / (2.0 * a * b)
        return math.acos(min(1.0, max(-1.0, x)))

    def cot_opposite(self, h):
        """Cotangent of the corner opposite interior halfedge ``h``."""
        a, b, c = self.ell(h), self.ell(self.nxt(h)), self.ell(self.prv(h))
        s = sorted((a, b, c), reverse=True)
        x, y, z = s
        area = 0.25 * math.sqrt(max(0.0, (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z))))
        if area == 0.0:
            return -math.inf
        return (b * b + c * c - a * a) / (4.0 * area)

    def weight(self, e):
        h = self.edge_he[e]
        t = self.twin[h]
        if h >= self.nI or t >= self.nI:
            return math.inf
        return self.cot_opposite(h) + self.cot_opposite(t)

    def is_interior(self, e):
        h = self.edge_he[e]
        return h < self.nI and self.twin[h] < self.nI

    def flip(self, e):
        h = self.edge_he[e]
        t = self.twin[h]
        if h >= self.nI or t >= self.nI:
            raise MeshError(f"cannot flip boundary edge {e}", edge=e)
        f, g = h // 3, t // 3
        if f == g:
            raise MeshError(f"unflippable edge {e}: both sides in one face", edge=e)
        hjk, hki = self.nxt(h), self.prv(h)
        hil, hlj = self.nxt(t), self.prv(t)
        i, j = self.tail[h], self.head[h]
        k, l = self.tail[hki], self.tail[hlj]
        ang_i = self.corner(h) + self.corner(hil)
        ang_j = self.corner(hjk) + self.corner(t)
        if ang_i >= math.pi or ang_j >= math.pi:
            raise MeshError(f"unflippable edge {e}: quad is not convex", edge=e)
        lik, lil = self.ell(hki), self.ell(hil)
        new_len = math.sqrt(max(0.0, lik * lik + lil * lil - 2.0 * lik * lil * math.cos(ang_i)))
        if new_len <= 0.0:
            raise MeshError(f"unflippable edge {e}: zero-length diagonal", edge=e)

        outer_old = (hlj, hjk, hki, hil)
        outer_new = (3 * f, 3 * f + 1, 3 * g, 3 * g + 1)
        saved = [(self.twin[o], self.edge[o], self.angle[o]) for o in outer_old]
        remap = dict(zip(outer_old, outer_new))

        self.faces[f] = [l, j, k]
        self.faces[g] = [k, i, l]
        for slot, (a, b) in zip(range(3 * f, 3 * f + 3), ((l, j), (j, k), (k, l))):
            self.tail[slot], self.head[slot] = a, b
        for slot, (a, b) in zip(range(3 * g, 3 * g + 3), ((k, i), (i, l), (l, k))):
            self.tail[slot], self.head[slot] = a, b
        for n, (tw, ed, an) in zip(outer_new, saved):
            tw = remap.get(tw, tw)
            self.twin[n] = tw
            self.twin[tw] = n
            self.edge[n] = ed
            self.angle[n] = an
            self.edge_he[ed] = n
        d_kl, d_lk = 3 * f + 2, 3 * g + 2
        self.twin[d_kl], self.twin[d_lk] = d_lk, d_kl
        self.edge[d_kl] = self.edge[d_lk] = e
        self.edge_he[e] = d_kl
        self.length[e] = new_len
        # new directions: previous edge's angle plus the normalized corner angle
        self.angle[d_lk] = (self.angle[3 * f] + self.scale[l] * self.corner(3 * f)) % TWO_PI
        self.angle[d_kl] = (self.angle[3 * g] + self.scale[k] * self.corner(3 * g)) % TWO_PI
        return [self.edge[o] for o in outer_new]

    def to_mesh(self) -> IntrinsicMesh:
        return IntrinsicMesh(self.faces, self.V, self.tail, self.head, self.twin,
                             self.edge, self.length, he_angle=self.angle)


def flip_edge(mesh: IntrinsicMesh, e: int) -> IntrinsicMesh:
    """Return a new mesh with interior edge ``e`` flipped to the other diagonal."""
    state = _FlipState(mesh)
    state.flip(int(e))
    return state.to_mesh()


def to_intrinsic_delaunay(mesh: IntrinsicMesh) -> DelaunayResult:
    """Flip non-Delaunay edges until every cotan weight is nonnegative."""
    w = mesh.cotan_weights()
    interior = ~mesh.boundary_edge
    bad = np.nonzero(interior & (w < -DELAUNAY_TOL))[0]
    ident = np.arange(mesh.n_vertices)
    if len(bad) == 0:
        return DelaunayResult(mesh, 0, ident)

    state = _FlipState(mesh)
    queue = deque(int(e) for e in bad)
    queued = set(queue)
    deferred = []
    flips = 0
    flips_at_defer = -1
    while queue or deferred:
        if not queue:
            if flips == flips_at_defer:
                raise MeshError(f"intrinsic Delaunay flipping stalled on edges {sorted(deferred)}")
            queue.extend(deferred)
            queued.update(deferred)
            deferred = []
            flips_at_defer = flips
        e = queue.popleft()
        queued.discard(e)
        if not state.is_interior(e) or state.weight(e) >= -DELAUNAY_TOL:
            continue
        try:
            touched = state.flip(e)
        except MeshError:
            deferred.append(e)
            continue
        flips += 1
        for o in touched:
            if o not in queued and state.is_interior(o):
                queue.append(o)
                queued.add(o)
    out = state.to_mesh()
    return DelaunayResult(out, flips, ident)
