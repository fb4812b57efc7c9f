"""Vector heat method: parallel transport along shortest geodesics by diffusion.

A :class:`VectorHeatSolver` owns the operators and factorizations for one
mesh and heat time; every new source set costs only backsolves.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math
from typing import Iterable, Optional

import numpy as np

from . import operators
from .idt import to_intrinsic_delaunay
from .mesh import IntrinsicMesh, SurfacePoint
from .solver import Factorization, PinnedPoisson

DEGENERATE_EPS = 1e-300


@dataclass
class SourceSet:
    """Vertex-supported sources.

    ``vertices`` and ``values`` hold one entry per source; values are complex
    tangent vectors (in the vertex frame) or reals for scalar problems.
    ``weights`` scale each entry's Dirac mass.  Repeated vertices are merged
    by summing their weighted contributions.
    """

    vertices: np.ndarray
    values: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vertices = np.atleast_1d(np.asarray(self.vertices, dtype=np.int64))
        self.values = np.atleast_1d(np.asarray(self.values))
        if self.weights is None:
            self.weights = np.ones(len(self.vertices))
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if len(self.vertices) == 0:
            raise ValueError("source set is empty")
        if not (len(self.vertices) == len(self.values) == len(self.weights)):
            raise ValueError("vertices, values and weights must have equal length")

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "SourceSet":
        pairs = list(pairs)
        if not pairs:
            raise ValueError("source set is empty")
        v, x = zip(*pairs)
        return cls(np.array(v), np.array(x))

    def scatter(self, n, values=None):
        """Dense length-``n`` vector of weighted Dirac masses."""
        vals = self.values if values is None else values
        out = np.zeros(n, dtype=np.result_type(vals, float))
        np.add.at(out, self.vertices, self.weights * vals)
        return out


@dataclass
class TransportResult:
    field: np.ndarray  # per-vertex complex vectors, the interpolated transport
    direction: np.ndarray  # diffused vector field Y_t (power k representation)
    magnitude: np.ndarray  # interpolated magnitudes u_t / phi_t
    t: float
    k: int = 1
    degenerate: np.ndarray = field(default=None)


def choose_time(mesh: IntrinsicMesh, multiplier: float = 1.0) -> float:
    """Heat time ``m * h**2`` with ``h`` the mean edge length."""
    if not multiplier > 0:
        raise ValueError(f"time multiplier must be positive, got {multiplier}")
    return float(multiplier) * mesh.mean_edge_length ** 2


class VectorHeatSolver:
    """Prefactored heat systems for one mesh.

    Parameters
    ----------
    mesh : IntrinsicMesh
        Input mesh; results are reported on its vertices.
    t : float, optional
        Heat time; defaults to ``t_multiplier * h**2`` with ``h`` the mean
        edge length of ``mesh``.
    use_idt : bool
        Assemble operators on the intrinsic Delaunay triangulation.
    """

    def __init__(self, mesh: IntrinsicMesh, t: Optional[float] = None, *,
                 t_multiplier: float = 1.0, use_idt: bool = True):
        self.mesh = mesh
        self.t = choose_time(mesh, t_multiplier) if t is None else float(t)
        if not self.t > 0:
            raise ValueError(f"heat time must be positive, got {self.t}")
        self.use_idt = use_idt
        if use_idt:
            result = to_intrinsic_delaunay(mesh)
            self.intrinsic = result.mesh
            self.flip_count = result.flip_count
        else:
            self.intrinsic = mesh
            self.flip_count = 0
        self.L = operators.cotan_laplacian(self.intrinsic)
        self.M = operators.mass_matrix(self.intrinsic)
        self.mass = self.M.diagonal()
        self._scalar = None
        self._vector = {}
        self._poisson = None

    # factorizations are created lazily, once each
    def scalar_factor(self) -> Factorization:
        if self._scalar is None:
            self._scalar = Factorization(self.M + self.t * self.L)
        return self._scalar

    def vector_factor(self, k: int = 1) -> Factorization:
        if k not in self._vector:
            Lc = operators.connection_laplacian(self.intrinsic, k)
            self._vector[k] = Factorization(self.M.astype(complex) + self.t * Lc)
        return self._vector[k]

    def poisson(self) -> PinnedPoisson:
        if self._poisson is None:
            self._poisson = PinnedPoisson(self.L)
        return self._poisson

    def prefactor(self, k: int = 1):
        self.scalar_factor()
        self.vector_factor(k)
        return self

    @property
    def n_vertices(self):
        return self.mesh.n_vertices

    # ------------------------------------------------------------------
    def diffuse_scalar(self, u0) -> np.ndarray:
        return self.scalar_factor().solve(np.asarray(u0, dtype=float))

    def diffuse_vector(self, y0, k: int = 1) -> np.ndarray:
        return self.vector_factor(k).solve(np.asarray(y0, dtype=complex))

    def interpolate(self, sources: SourceSet):
        """Closest-point interpolation of scalar source values.

        Returns ``(values, degenerate)``.
        """
        n = self.n_vertices
        u = self.diffuse_scalar(sources.scatter(n, np.real(sources.values).astype(float)))
        phi = self.diffuse_scalar(sources.scatter(n, np.ones(len(sources.vertices))))
        degenerate = np.abs(phi) <= DEGENERATE_EPS
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(degenerate, 0.0, u / phi)
        return out, degenerate

    def transport(self, sources: SourceSet, k: int = 1) -> TransportResult:
        """Transport source vectors to every vertex along shortest geodesics."""
        X = np.asarray(sources.values, dtype=complex)
        mags = np.abs(X)
        if np.all(mags * sources.weights == 0):
            raise ValueError("all source vectors are zero; direction undefined")
        n = self.n_vertices
        # k-fold fields diffuse the k-th power, normalized back to |X|
        with np.errstate(divide="ignore", invalid="ignore"):
            Xk = np.where(mags > 0, X ** k / mags ** (k - 1), 0.0)
        Y = self.diffuse_vector(sources.scatter(n, Xk), k)
        u = self.diffuse_scalar(sources.scatter(n, mags))
        phi = self.diffuse_scalar(sources.scatter(n, np.ones(len(mags))))
        absY = np.abs(Y)
        degenerate = (absY <= DEGENERATE_EPS) | (np.abs(phi) <= DEGENERATE_EPS)
        with np.errstate(divide="ignore", invalid="ignore"):
            ubar = np.where(np.abs(phi) > DEGENERATE_EPS, u / phi, 0.0)
            unit = np.where(absY > DEGENERATE_EPS, Y / absY, 0.0)
        if k > 1:
            unit = np.where(absY > DEGENERATE_EPS, np.exp(1j * np.angle(unit) / k), 0.0)
        return TransportResult(field=ubar * unit, direction=Y, magnitude=ubar, t=self.t,
                               k=k, degenerate=degenerate)

    def transport_vector(self, vertex: int, vector: complex, k: int = 1) -> TransportResult:
        return self.transport(SourceSet([vertex], [vector]), k)

    def roundtrip(self, i: int, j: int, z: complex = 1.0):
        """Transport ``z`` from ``i`` to ``j`` and back with the vector heat kernel.

        Returns ``(scaling, angle_discrepancy)``: the real factor
        ``A_ij A_ji`` relating the returned vector to ``z`` and the angle by
        which it is rotated.
        """
        n = self.n_vertices
        b = np.zeros(n, dtype=complex)
        b[i] = z
        Yj = self.diffuse_vector(b)[j]
        b2 = np.zeros(n, dtype=complex)
        b2[j] = Yj
        back = self.diffuse_vector(b2)[i]
        ratio = back / z
        return float(ratio.real), float(abs(np.angle(ratio)))


def _solver_for(mesh, t, use_idt, solver):
    if solver is not None:
        return solver
    return VectorHeatSolver(mesh, t, use_idt=use_idt)


def parallel_transport(mesh, sources: SourceSet, t: float, k: int = 1,
                       use_idt: bool = True, solver: VectorHeatSolver = None) -> TransportResult:
    """Vector heat method for a set of vertex sources (see :class:`VectorHeatSolver`)."""
    if not t > 0:
        raise ValueError("heat time must be positive")
    return _solver_for(mesh, t, use_idt, solver).transport(sources, k)


def scalar_interpolate(mesh, sources: SourceSet, t: float, use_idt: bool = True,
                       solver: VectorHeatSolver = None):
    """Closest-point interpolation ``u_t / phi_t``; returns ``(values, degenerate)``."""
    if not t > 0:
        raise ValueError("heat time must be positive")
    return _solver_for(mesh, t, use_idt, solver).interpolate(sources)


def transport_roundtrip_check(mesh, i: int, j: int, t: float, use_idt: bool = True,
                              solver: VectorHeatSolver = None):
    if i == j:
        raise ValueError("round trip needs two distinct vertices")
    return _solver_for(mesh, t, use_idt, solver).roundtrip(i, j)


def point_sources(mesh: IntrinsicMesh, point: SurfacePoint, vector: complex = 1.0):
    """Split a vector at a surface point over its supporting vertices.

    Face-interior vectors are given in the face frame and rotated into each
    corner's frame; the weights are the barycentric coordinates.
    """
    if point.is_vertex:
        return SourceSet([point.vertex], [complex(vector)])
    f = point.face
    rots = np.array([mesh.face_to_vertex_rotation(f, c) for c in range(3)])
    return SourceSet(mesh.faces[f], rots * complex(vector), np.array(point.bary))


def sample_field(mesh: IntrinsicMesh, values, point: SurfacePoint) -> complex:
    """Vector field value at a surface point, in the point's frame."""
    values = np.asarray(values)
    if point.is_vertex:
        return complex(values[point.vertex])
    f = point.face
    rots = np.array([mesh.face_to_vertex_rotation(f, c) for c in range(3)])
    return complex(np.sum(np.array(point.bary) * values[mesh.faces[f]] / rots))
