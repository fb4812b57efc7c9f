"""Oracle suites shared by ``vectorheat validate`` and the acceptance tests.

Each suite builds its own meshes, runs the library against an independent
reference and returns a flat dict of JSON-serializable metrics.
"""
from __future__ import annotations

import time

import numpy as np

from . import oracles, shapes
from .geodesics import trace_geodesic
from .mesh import SurfacePoint, build_intrinsic_mesh, extrinsic_to_tangent, field_to_extrinsic
from .vhm import VectorHeatSolver, sample_field

SUITES = ("flat", "sphere-convergence", "t-sweep", "roundtrip", "trace-oracle")
CUT_MARGIN = 0.5  # vertices within this central angle of the antipode are skipped


def loglog_slope(h, err):
    """Least-squares slope of ``log err`` against ``log h``."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def _tangent_angle_error(ref, got, n):
    ref = ref - (ref @ n) * n
    return abs(np.arctan2(np.cross(ref, got) @ n, ref @ got))


def flat(sizes=(20, 40, 80, 160)):
    """Single-source transport on refined unit-square grids is constant."""
    t0 = time.perf_counter()
    ang, mag, faces = 0.0, 0.0, []
    X = np.array([0.6, -0.8, 0.0])
    for n in sizes:
        P, F = shapes.grid(n)
        mesh = build_intrinsic_mesh(F, P)
        src = (n // 3) * (n + 1) + n // 2
        res = VectorHeatSolver(mesh).transport_vector(src, extrinsic_to_tangent(mesh, src, X).value)
        E = field_to_extrinsic(mesh, res.field)
        ang = max(ang, float(np.abs(np.arctan2(E[:, 1] * X[0] - E[:, 0] * X[1], E[:, :2] @ X[:2])).max()))
        mag = max(mag, float(np.abs(np.linalg.norm(E, axis=1) - 1.0).max()))
        faces.append(len(F))
    return {"faces": faces, "max_angle_error": ang, "max_magnitude_error": mag,
            "seconds": time.perf_counter() - t0}


def sphere_transport_error(level, direction=(0.3, 0.5, 0.8)):
    """Mean and max angle error of single-source transport on an icosphere."""
    oracle = oracles.SphereOracle()
    P, F = shapes.icosphere(level)
    mesh = build_intrinsic_mesh(F, P)
    src = int(np.argmax(P @ np.asarray(direction)))
    X = np.array([0.2, -1.0, 0.4])
    X = X - (X @ P[src]) * P[src]
    res = VectorHeatSolver(mesh).transport_vector(src, extrinsic_to_tangent(mesh, src, X).value)
    E = field_to_extrinsic(mesh, res.field)
    err = []
    for y in range(len(P)):
        if y == src or oracle.central_angle(P[src], P[y]) > np.pi - CUT_MARGIN:
            continue
        err.append(_tangent_angle_error(oracle.transport(P[src], P[y], X), E[y], P[y]))
    return mesh.mean_edge_length, float(np.mean(err)), float(np.max(err))


def sphere_convergence(levels=3):
    """Mean transport angle error on icosphere levels ``1..levels`` and its log-log slope."""
    t0 = time.perf_counter()
    hs, mean, mx = [], [], []
    for lv in range(1, levels + 1):
        h, m, x = sphere_transport_error(lv)
        hs.append(h)
        mean.append(m)
        mx.append(x)
    out = {"levels": list(range(1, levels + 1)), "h": hs, "mean_angle_error": mean,
           "max_angle_error": mx, "seconds": time.perf_counter() - t0}
    out["slope"] = loglog_slope(hs, mean) if levels >= 2 else float("nan")
    return out


def t_sweep_error(mesh, multipliers, source=0, n_rays=1440):
    """Whole-surface mean angle error of transport against ray-traced transport, per multiplier."""
    h = mesh.mean_edge_length
    samples = oracles.ray_transport_samples(mesh, source, n_rays)
    best = oracles.nearest_shortest_samples(mesh, samples, 0.5 * h)
    best.pop(source, None)
    pts = [(SurfacePoint.in_face(samples[k][0], samples[k][1]), samples[k][2]) for k in best.values()]
    errors = []
    for m in multipliers:
        field = VectorHeatSolver(mesh, t=m * h * h).transport_vector(source, 1.0).field
        errors.append(float(np.mean([abs(np.angle(sample_field(mesh, field, p) / rot)) for p, rot in pts])))
    return np.array(errors), len(best)


def sweep_meshes(level=5):
    return {"ellipsoid": shapes.ellipsoid(level), "bumpy-sphere": shapes.bumpy_sphere(level),
            "peanut": shapes.peanut(level)}


def t_sweep(level=5, multipliers=None):
    """Error against the heat-time multiplier ``m`` (``t = m h^2``) on three curved surfaces."""
    t0 = time.perf_counter()
    ms = np.geomspace(0.1, 10.0, 13) if multipliers is None else np.asarray(multipliers, dtype=float)
    out = {"multipliers": ms.tolist(), "meshes": {}}
    for name, (P, F) in sweep_meshes(level).items():
        err, covered = t_sweep_error(build_intrinsic_mesh(F, P), ms)
        k = int(np.argmin(err))
        out["meshes"][name] = {"errors": err.tolist(), "argmin": float(ms[k]),
                               "interior_minimum": bool(0 < k < len(ms) - 1), "covered_vertices": covered}
    out["seconds"] = time.perf_counter() - t0
    return out


def roundtrip(pairs=100, seed=0):
    """Relative imaginary part of the round-trip ratio for random vertex pairs on three meshes."""
    rng = np.random.default_rng(seed)
    meshes = {"icosphere": shapes.icosphere(3), "torus": shapes.torus(40, 16),
              "random-sphere": shapes.random_sphere(800, seed=1)}
    out = {}
    for name, (P, F) in meshes.items():
        solver = VectorHeatSolver(build_intrinsic_mesh(F, P))
        worst = 0.0
        for _ in range(pairs):
            i, j = rng.choice(len(P), 2, replace=False)
            _, angle = solver.roundtrip(int(i), int(j))
            worst = max(worst, float(abs(np.sin(angle))))
        out[name] = worst
    return {"pairs": pairs, "max_relative_imaginary": out}


def trace_oracle(level=4, traces=50, seed=0):
    """Transport at random trace endpoints against trace-and-unfold transport on the icosphere."""
    rng = np.random.default_rng(seed)
    P, F = shapes.icosphere(level)
    mesh = build_intrinsic_mesh(F, P)
    solver = VectorHeatSolver(mesh)
    err = []
    for _ in range(traces):
        s = int(rng.integers(len(P)))
        v = rng.uniform(0.2, np.pi - 2 * CUT_MARGIN) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        X = np.exp(1j * rng.uniform(0, 2 * np.pi))
        tr = trace_geodesic(mesh, SurfacePoint.at_vertex(s), v)
        field = solver.transport_vector(s, X).field
        ref = X * tr.rotation
        err.append(abs(np.angle(sample_field(mesh, field, tr.endpoint) / ref)))
    return {"level": level, "traces": traces, "h": mesh.mean_edge_length,
            "mean_angle_error": float(np.mean(err)), "max_angle_error": float(np.max(err))}


def run_suite(name, levels=None):
    if name == "flat":
        return flat()
    if name == "sphere-convergence":
        return sphere_convergence(3 if levels is None else levels)
    if name == "t-sweep":
        return t_sweep(5 if levels is None else levels)
    if name == "roundtrip":
        return roundtrip()
    if name == "trace-oracle":
        return trace_oracle(4 if levels is None else levels)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
