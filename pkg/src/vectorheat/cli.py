"""Command-line driver: ``vectorheat <subcommand> [mesh] [options]``.

Exit status is 0 on success, 1 on numerical failure (with a diagnostic on
stderr) and 2 on usage errors.
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
import json
import sys
from typing import List, Optional

import numpy as np

from . import io, validation
from .mesh import MeshError, SurfacePoint

SUBCOMMANDS = ("transport", "interpolate", "logmap", "mean", "median", "gcvt", "landmarks", "validate")


@dataclass
class SourceSpec:
    """One ``--source`` entry: a vertex or face point with an angle, magnitude or scalar value."""

    point: SurfacePoint
    angle: float = 0.0
    mag: float = 1.0
    value: Optional[float] = None

    @property
    def vector(self) -> complex:
        return self.mag * np.exp(1j * self.angle)


def parse_source(text: str) -> SourceSpec:
    """Parse ``"v:0,angle:0,mag:1"`` or ``"f:3,b:0.2/0.3/0.5,value:2"``."""
    fields = {}
    for part in text.split(","):
        key, sep, val = part.partition(":")
        key = key.strip()
        if not sep or not key:
            raise argparse.ArgumentTypeError(f"bad source field {part!r}; expected key:value")
        if key in fields:
            raise argparse.ArgumentTypeError(f"source field {key!r} given twice")
        fields[key] = val.strip()
    unknown = set(fields) - {"v", "f", "b", "angle", "mag", "value"}
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown source fields {sorted(unknown)}")
    try:
        if "v" in fields:
            if "f" in fields or "b" in fields:
                raise argparse.ArgumentTypeError("give either v or f/b, not both")
            point = SurfacePoint.at_vertex(int(fields["v"]))
        elif "f" in fields:
            bary = [float(x) for x in fields.get("b", "").split("/")]
            if len(bary) != 3:
                raise argparse.ArgumentTypeError("face source needs b:b0/b1/b2")
            point = SurfacePoint.in_face(int(fields["f"]), bary)
        else:
            raise argparse.ArgumentTypeError("source needs v:<vertex> or f:<face>,b:<b0/b1/b2>")
        spec = SourceSpec(point, float(fields.get("angle", 0.0)), float(fields.get("mag", 1.0)),
                          float(fields["value"]) if "value" in fields else None)
    except (ValueError, MeshError) as exc:
        raise argparse.ArgumentTypeError(f"bad source {text!r}: {exc}") from None
    if spec.mag < 0:
        raise argparse.ArgumentTypeError("source magnitude must be nonnegative")
    return spec


def _positive(kind):
    def conv(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not x > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return x
    return conv


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated vertex ids, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vectorheat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("mesh", help="OBJ file or intrinsic-format file")
    common.add_argument("--t-mult", type=_positive(float), default=1.0, help="heat time t = m h^2 (default 1)")
    common.add_argument("--no-idt", action="store_true", help="skip the intrinsic Delaunay retriangulation")
    common.add_argument("--format", choices=("csv", "json"), help="export format (default from --output, else csv)")
    common.add_argument("--output", default="-", help="output path, '-' for stdout")
    common.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("transport", parents=[common], help="parallel transport of source vectors")
    s.add_argument("--source", type=parse_source, action="append", required=True)
    s.add_argument("--degree", type=_positive(int), default=1, help="symmetry degree k of the field")

    s = sub.add_parser("interpolate", parents=[common], help="closest-point interpolation of scalars")
    s.add_argument("--source", type=parse_source, action="append", required=True)

    s = sub.add_parser("logmap", parents=[common], help="logarithmic map about one point")
    s.add_argument("--source", type=parse_source, required=True, help="basepoint; angle sets the zero direction")

    for name, p_exp in (("mean", 2), ("median", 1)):
        s = sub.add_parser(name, parents=[common], help=f"{'Karcher mean' if p_exp == 2 else 'geometric median'}"
                                                         " of sample vertices")
        s.add_argument("--samples", type=_int_list, required=True, help="comma-separated vertex ids")
        s.add_argument("--tau", type=_positive(float), default=1.0)
        s.add_argument("--tol", type=_positive(float))
        s.add_argument("--max-iter", type=_positive(int), default=100)
        s.add_argument("--initial", type=int, help="start vertex (default random, seeded)")

    s = sub.add_parser("gcvt", parents=[common], help="geodesic centroidal Voronoi tessellation")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sites", type=_int_list, help="comma-separated initial site vertices")
    g.add_argument("--count", type=_positive(int), help="number of random initial sites")
    s.add_argument("--iterations", type=_positive(int), default=20)
    s.add_argument("--karcher-steps", type=_positive(int), default=1)

    s = sub.add_parser("landmarks", parents=[common], help="ordered intrinsic landmarks")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--guesses", type=_positive(int), default=4)
    s.add_argument("--bias", type=float, default=0.0, help="extrinsic x bias for symmetry breaking")

    s = sub.add_parser("validate", help="run oracle suites and write a metrics file")
    s.add_argument("--suite", choices=validation.SUITES, action="append",
                   help="suite to run (repeatable; default all)")
    s.add_argument("--levels", type=_positive(int), help="refinement levels (sphere-convergence), "
                                                          "icosphere level (t-sweep, trace-oracle)")
    s.add_argument("--output", default="-", help="metrics JSON path, '-' for stdout")
    return p


def _format(args):
    if args.format:
        return args.format
    return "json" if str(args.output).lower().endswith(".json") else "csv"


def _provenance(args):
    skip = {"mesh"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, list):
            v = [_describe(x) for x in v]
        else:
            v = _describe(v)
        out[k] = v
    return out


def _describe(x):
    if isinstance(x, SourceSpec):
        loc = {"vertex": x.point.vertex} if x.point.is_vertex else {"face": x.point.face,
                                                                      "bary": list(map(float, x.point.bary))}
        return {**loc, "angle": x.angle, "mag": x.mag, "value": x.value}
    return x


def _check_point(mesh, p: SurfacePoint):
    if p.is_vertex and not 0 <= p.vertex < mesh.n_vertices:
        raise argparse.ArgumentTypeError(f"vertex {p.vertex} out of range 0..{mesh.n_vertices - 1}")
    if not p.is_vertex and not 0 <= p.face < mesh.n_faces:
        raise argparse.ArgumentTypeError(f"face {p.face} out of range 0..{mesh.n_faces - 1}")


def run(args) -> int:
    from .centers import CenterProblem, find_center, gcvt, ordered_landmarks, random_point
    from .logmap import compute_log_map
    from .vhm import SourceSet, VectorHeatSolver, point_sources

    if args.command == "validate":
        return run_validate(args)

    mesh = io.load_mesh(args.mesh)
    fmt = _format(args)
    solver = VectorHeatSolver(mesh, t_multiplier=args.t_mult, use_idt=not args.no_idt)
    meta = io.field_metadata(mesh, command=args.command, input=str(args.mesh), t=solver.t,
                             m=args.t_mult, k=getattr(args, "degree", 1), idt=not args.no_idt,
                             arguments=_provenance(args))
    specs = getattr(args, "source", None) or []
    for spec in specs if isinstance(specs, list) else [specs]:
        _check_point(mesh, spec.point)

    if args.command in ("transport", "interpolate"):
        specs = args.source
        verts, vals, wts = [], [], []
        for spec in specs:
            if args.command == "transport":
                src = point_sources(mesh, spec.point, spec.vector)
                vals += list(src.values)
            else:
                if spec.value is None:
                    raise argparse.ArgumentTypeError("interpolate sources need value:<x>")
                src = point_sources(mesh, spec.point)
                vals += [spec.value] * len(src.vertices)
            verts += list(src.vertices)
            wts += list(src.weights)
        sources = SourceSet(np.array(verts), np.array(vals), np.array(wts))
        if args.command == "transport":
            res = solver.transport(sources, args.degree)
            out = io.vector_export(mesh, res.field, **meta)
            out.columns["degenerate"] = res.degenerate.astype(float)
        else:
            values, degenerate = solver.interpolate(sources)
            out = io.FieldExport({"vertex": np.arange(mesh.n_vertices), "value": values,
                                  "degenerate": degenerate.astype(float)}, meta)
        io.export_field(out, fmt, args.output)
        return 0

    if args.command == "logmap":
        lm = compute_log_map(mesh, args.source.point, np.exp(1j * args.source.angle), solver=solver)
        out = io.FieldExport({"vertex": np.arange(mesh.n_vertices), "u": lm.u, "v": lm.v,
                              "r": lm.r, "phi": lm.phi}, meta)
        io.export_field(out, fmt, args.output)
        return 0

    if args.command in ("mean", "median"):
        for v in args.samples:
            _check_point(mesh, SurfacePoint.at_vertex(v))
        problem = CenterProblem(samples=args.samples, p=2 if args.command == "mean" else 1, tau=args.tau,
                                tol=args.tol, max_iter=args.max_iter)
        initial = "random" if args.initial is None else args.initial
        res = find_center(mesh, problem, initial, seed=args.seed, solver=solver)
        io.export_points(mesh, {"center": [res.center], "trajectory": res.trajectory}, meta, fmt, args.output,
                         {"iterations": res.iterations, "converged": res.converged,
                          "final_gradient_norm": res.final_gradient_norm, "energies": res.energies})
        if not res.converged:
            print(f"vectorheat: {args.command} did not converge in {res.iterations} iterations "
                  f"(|v| = {res.final_gradient_norm:.3g})", file=sys.stderr)
            return 1
        return 0

    if args.command == "gcvt":
        if args.sites is not None:
            for v in args.sites:
                _check_point(mesh, SurfacePoint.at_vertex(v))
            sites = args.sites
        else:
            rng = np.random.default_rng(args.seed)
            sites = [random_point(mesh, rng) for _ in range(args.count)]
        state = gcvt(mesh, sites, iterations=args.iterations, karcher_steps=args.karcher_steps, solver=solver)
        io.export_points(mesh, {"sites": state.sites}, meta, fmt, args.output,
                         {"iterations": state.iterations, "movement": state.movement})
        return 0

    if args.command == "landmarks":
        if args.count < 0:
            raise argparse.ArgumentTypeError("--count must be nonnegative")
        marks, medians = ordered_landmarks(mesh, args.count, args.guesses, args.bias, seed=args.seed,
                                           solver=solver, return_medians=True)
        io.export_points(mesh, {"landmarks": marks, "medians": medians}, meta, fmt, args.output)
        return 0
    raise argparse.ArgumentTypeError(f"unknown subcommand {args.command!r}")


# pass/fail rules for the metrics file, keyed by suite
def _suite_passed(name, m):
    if name == "flat":
        return m["max_angle_error"] < 1e-6 and m["max_magnitude_error"] < 1e-8
    if name == "sphere-convergence":
        return 0.8 <= m["slope"] <= 1.5 and m["mean_angle_error"][-1] < 0.05
    if name == "t-sweep":
        return all(r["interior_minimum"] and 0.5 <= r["argmin"] <= 2.0 for r in m["meshes"].values())
    if name == "roundtrip":
        return max(m["max_relative_imaginary"].values()) <= 1e-8
    if name == "trace-oracle":
        return m["mean_angle_error"] < 0.05
    return False


def run_validate(args) -> int:
    suites = args.suite or list(validation.SUITES)
    report = {"tool": "vectorheat", "version": io.VERSION, "suites": {}}
    ok = True
    for name in suites:
        metrics = validation.run_suite(name, args.levels)
        metrics["passed"] = bool(_suite_passed(name, metrics))
        ok &= metrics["passed"]
        report["suites"][name] = metrics
        print(f"{name}: {'PASS' if metrics['passed'] else 'FAIL'}", file=sys.stderr)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.output in ("-", None):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if ok else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"vectorheat: error: {exc}", file=sys.stderr)
        return 2
    except (MeshError, ValueError, OSError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"vectorheat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
