"""Karcher means, geometric medians, geodesic CVT and ordered landmarks.

Every center iteration computes one log map at the current iterate,
averages the log coordinates of the samples (or of all vertices weighted by
a density) and walks along the average with the straightest-geodesic
exponential map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence
import warnings

import numpy as np

from .geodesics import trace_geodesic
from .logmap import LogMapField, compute_log_map, logmap_at, radius_at
from .mesh import IntrinsicMesh, SurfacePoint
from .vhm import VectorHeatSolver, point_sources

WEISZFELD_CAP = 1e-8  # minimum distance, in units of h, in the 1/d weights
MAX_HALVINGS = 8


@dataclass
class CenterProblem:
    """Samples or a per-vertex density, the exponent ``p`` and iteration controls.

    ``tol`` is a length; ``None`` means ``1e-2`` times the mean edge length.
    """

    samples: Optional[Sequence[SurfacePoint]] = None
    density: Optional[np.ndarray] = None
    p: int = 2
    tau: float = 1.0
    tol: Optional[float] = None
    max_iter: int = 100
    sample_weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.p not in (1, 2):
            raise ValueError(f"exponent p must be 1 or 2, got {self.p}")
        if (self.samples is None) == (self.density is None):
            raise ValueError("give exactly one of samples or density")
        if self.samples is not None:
            self.samples = [s if isinstance(s, SurfacePoint) else SurfacePoint.at_vertex(s)
                            for s in self.samples]
            if not self.samples:
                raise ValueError("no samples")
            w = np.ones(len(self.samples)) if self.sample_weights is None else np.asarray(
                self.sample_weights, dtype=float)
            if not np.any(w > 0):
                raise ValueError("no sample has positive weight")
            self.sample_weights = w
        else:
            self.density = np.asarray(self.density, dtype=float)
            if np.any(self.density < 0) or not np.any(self.density > 0):
                raise ValueError("density must be nonnegative and not identically zero")
        if not self.tau > 0:
            raise ValueError("step size tau must be positive")


@dataclass
class CenterResult:
    center: SurfacePoint
    iterations: int
    trajectory: List[SurfacePoint]
    final_gradient_norm: float
    converged: bool
    energies: List[float] = field(default_factory=list)


def _coords(problem: CenterProblem, lm: LogMapField, mass):
    """Log coordinates, distances and base weights of the problem's samples."""
    if problem.samples is not None:
        z = np.array([complex(*logmap_at(lm, s)) for s in problem.samples])
        d = np.array([radius_at(lm, s) for s in problem.samples])
        w = problem.sample_weights
    else:
        z = lm.u + 1j * lm.v
        d = lm.r
        w = mass * problem.density
    return z, np.maximum(d, 0.0), w


def energy(problem: CenterProblem, lm: LogMapField, mass) -> float:
    """``sum w d^p / (2 sum w)`` from the log map's radial coordinate."""
    _, d, w = _coords(problem, lm, mass)
    return float(w @ d ** problem.p / (2.0 * w.sum()))


def energy_noise(problem: CenterProblem, lm: LogMapField, mass, h: float) -> float:
    """Energy change caused by moving the basepoint half an edge length.

    Distances from the log map carry O(h) errors, so energy differences
    below this scale are not evidence of ascent.
    """
    _, d, w = _coords(problem, lm, mass)
    slope = w @ (d ** (problem.p - 1)) / w.sum() * problem.p / 2.0
    return 1e-8 + 0.5 * h * float(slope)


def update_vector(problem: CenterProblem, lm: LogMapField, mass, h: float) -> complex:
    z, d, w = _coords(problem, lm, mass)
    if problem.p == 1:
        w = w / np.maximum(d, WEISZFELD_CAP * h)
    return complex(w @ z / w.sum())


def karcher_update(mesh: IntrinsicMesh, m: SurfacePoint, problem: CenterProblem, *,
                   solver: VectorHeatSolver = None, tau: float = None):
    """One center step from ``m``; returns ``(v, next_point)``.

    ``v`` is the update direction in ``m``'s frame (vertex polar frame or
    face frame); ``next_point`` is the endpoint of the geodesic along
    ``tau * v``.
    """
    solver = solver or VectorHeatSolver(mesh)
    lm = compute_log_map(mesh, m, solver=solver)
    v = update_vector(problem, lm, solver.mass, mesh.mean_edge_length)
    tau = problem.tau if tau is None else tau
    if v == 0:
        return v, m
    return v, trace_geodesic(mesh, m, tau * v).endpoint


def random_point(mesh: IntrinsicMesh, rng) -> SurfacePoint:
    """Area-uniform random point on the mesh."""
    f = int(rng.choice(mesh.n_faces, p=mesh.face_area / mesh.face_area.sum()))
    return SurfacePoint.in_face(f, rng.dirichlet((1.0, 1.0, 1.0)))


def find_center(mesh: IntrinsicMesh, problem: CenterProblem, initial="random", *,
                seed: int = 0, solver: VectorHeatSolver = None) -> CenterResult:
    """Iterate Karcher / Weiszfeld steps until ``|v| <= tol``.

    A step that raises the energy, or whose geodesic hits the boundary, is
    retried with half the step size.  When a new update points straight back
    along the previous step, the step size stays halved for the rest of the
    run.
    """
    solver = solver or VectorHeatSolver(mesh)
    h = mesh.mean_edge_length
    tol = 1e-2 * h if problem.tol is None else problem.tol
    if isinstance(initial, str):
        if initial != "random":
            raise ValueError(f"unknown initial guess {initial!r}")
        m = random_point(mesh, np.random.default_rng(seed))
    elif isinstance(initial, SurfacePoint):
        m = initial
    else:
        m = SurfacePoint.at_vertex(int(initial))

    lm = compute_log_map(mesh, m, solver=solver)
    E = energy(problem, lm, solver.mass)
    traj, energies = [m], [E]
    gnorm = np.inf
    base_tau = problem.tau
    arrival, step = None, 0.0
    for it in range(1, problem.max_iter + 1):
        v = update_vector(problem, lm, solver.mass, h)
        if arrival is not None and (v * np.conj(arrival)).real < -0.5 * abs(v) and abs(v) > 0.5 * step:
            # the step points back where we came from: the iterates cycle,
            # typically across a cone vertex
            base_tau = max(0.5 * base_tau, problem.tau * 0.5 ** MAX_HALVINGS)
        gnorm = abs(v)
        if gnorm <= tol:
            return CenterResult(m, it - 1, traj, gnorm, True, energies)
        tau = base_tau
        noise = energy_noise(problem, lm, solver.mass, h)
        for _ in range(MAX_HALVINGS + 1):
            tr = trace_geodesic(mesh, m, tau * v)
            cand = tr.endpoint
            lm_c = compute_log_map(mesh, cand, solver=solver)
            E_c = energy(problem, lm_c, solver.mass)
            if not tr.truncated and E_c <= E + noise:
                break
            tau *= 0.5
        m, lm, E = cand, lm_c, E_c
        arrival, step = tr.end_direction, tau * gnorm
        traj.append(m)
        energies.append(E)
    v = update_vector(problem, lm, solver.mass, h)
    gnorm = abs(v)
    return CenterResult(m, problem.max_iter, traj, gnorm, gnorm <= tol, energies)


# ----------------------------------------------------------------------
# geodesic centroidal Voronoi tessellation

@dataclass
class VoronoiState:
    sites: List[SurfacePoint]
    densities: np.ndarray  # (n_sites, V), columns sum to 1
    iterations: int
    movement: float


def cell_densities(mesh: IntrinsicMesh, sites, solver: VectorHeatSolver) -> np.ndarray:
    """Soft cell indicators ``k_t(s_i, .) / sum_j k_t(s_j, .)``."""
    n = mesh.n_vertices
    K = []
    for s in sites:
        src = point_sources(mesh, s)
        K.append(solver.diffuse_scalar(src.scatter(n, np.ones(len(src.vertices)))))
    K = np.array(K)
    K = np.maximum(K, 0.0)
    tot = K.sum(axis=0)
    out = np.full_like(K, 1.0 / len(sites))
    ok = tot > 0
    out[:, ok] = K[:, ok] / tot[ok]
    return out


def _separate(mesh, sites, solver, h):
    """Move coincident sites to the vertex farthest from the first copy."""
    sites = list(sites)
    P = [np.asarray(_point_key(mesh, s)) for s in sites]
    for i in range(len(sites)):
        for j in range(i):
            if np.linalg.norm(P[i] - P[j]) < 1e-9 * h:
                warnings.warn(f"sites {j} and {i} coincide; moving site {i}", RuntimeWarning)
                lm = compute_log_map(mesh, sites[j], solver=solver)
                sites[i] = SurfacePoint.at_vertex(int(np.argmax(lm.r)))
                P[i] = np.asarray(_point_key(mesh, sites[i]))
    return sites


def _point_key(mesh, s):
    # intrinsic comparison key: vertex id or face layout position
    if s.is_vertex:
        return (float(s.vertex), -1.0, 0.0)
    x = np.asarray(s.bary) @ mesh.face_layout(s.face)
    return (-1.0, float(s.face) + x.real, x.imag)


def gcvt(mesh: IntrinsicMesh, sites, t: float = None, iterations: int = 20, karcher_steps: int = 1, *,
         tol: float = None, solver: VectorHeatSolver = None) -> VoronoiState:
    """Geodesic centroidal Voronoi tessellation by single-step Lloyd iterations.

    ``t`` is the heat time for the cell indicators (defaults to the
    solver's time).
    """
    sites = [s if isinstance(s, SurfacePoint) else SurfacePoint.at_vertex(s) for s in sites]
    if not sites:
        raise ValueError("gcvt needs at least one site")
    solver = solver or VectorHeatSolver(mesh)
    cell_solver = solver if t is None or t == solver.t else VectorHeatSolver(mesh, t, use_idt=solver.use_idt)
    h = mesh.mean_edge_length
    tol = 1e-2 * h if tol is None else tol
    sites = _separate(mesh, sites, solver, h)
    rho = cell_densities(mesh, sites, cell_solver)
    moved = np.inf
    it = 0
    for it in range(1, iterations + 1):
        moved = 0.0
        new_sites = []
        for s, dens in zip(sites, rho):
            prob = CenterProblem(density=dens, p=2)
            for _ in range(karcher_steps):
                v, s = karcher_update(mesh, s, prob, solver=solver)
                moved = max(moved, abs(v) * prob.tau)
            new_sites.append(s)
        sites = _separate(mesh, new_sites, solver, h)
        rho = cell_densities(mesh, sites, cell_solver)
        if moved < tol:
            break
    return VoronoiState(sites, rho, it, moved)


# ----------------------------------------------------------------------
# ordered landmarks

def ordered_landmarks(mesh: IntrinsicMesh, count: int, initial_guesses: int = 4, extrinsic_bias: float = 0.0, *,
                      seed: int = 0, solver: VectorHeatSolver = None, return_medians: bool = False):
    """Medians of the surface followed by farthest-point landmarks.

    The uniform density (optionally tilted by ``extrinsic_bias`` times the
    normalized x coordinate) is minimized from ``initial_guesses`` random
    starts with ``p = 1``; medians closer than ``2h`` are merged.  Landmarks
    are vertices chosen greedily to maximize the log-map distance to the
    medians and to the landmarks already chosen.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if count == 0:
        return ([], []) if return_medians else []
    if initial_guesses < 1:
        raise ValueError("need at least one initial guess")
    solver = solver or VectorHeatSolver(mesh)
    h = mesh.mean_edge_length
    rho = np.ones(mesh.n_vertices)
    if extrinsic_bias:
        if mesh.positions is None:
            raise ValueError("extrinsic bias needs vertex positions")
        x = mesh.positions[:, 0]
        rho = rho + extrinsic_bias * (x - x.min()) / max(np.ptp(x), 1e-300)
    problem = CenterProblem(density=rho, p=1)
    rng = np.random.default_rng(seed)

    medians, fields = [], []
    for _ in range(initial_guesses):
        res = find_center(mesh, problem, random_point(mesh, rng), solver=solver)
        lm = compute_log_map(mesh, res.center, solver=solver)
        if any(radius_at(f, res.center) < 2 * h for f in fields):
            continue
        medians.append(res.center)
        fields.append(lm)

    dist = np.min([f.r for f in fields], axis=0)
    landmarks = []
    for _ in range(count):
        v = int(np.argmax(dist))
        landmarks.append(SurfacePoint.at_vertex(v))
        lm = compute_log_map(mesh, v, solver=solver)
        dist = np.minimum(dist, lm.r)
    return (landmarks, medians) if return_medians else landmarks
