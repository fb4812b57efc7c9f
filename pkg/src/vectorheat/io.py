"""Mesh files in, field exports out.

Meshes are read from OBJ (``v`` and triangular ``f`` records) or from a
plain-text intrinsic format::

    # comments and blank lines are ignored
    V F
    i j k          (F face lines, 0-based, counter-clockwise)
    i j length     (one line per edge)

Exports hold one record per vertex with a JSON metadata header.  CSV files
start with a single ``# {json}`` line followed by a column line; JSON files
follow the versioned schema ``SCHEMA``.  Floats are written with ``repr``,
the shortest string that round-trips, so re-import is bit-exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import json
import os
from typing import Dict, List, Optional

import numpy as np

from .mesh import IntrinsicMesh, MeshError, SurfacePoint, build_intrinsic_mesh

VERSION = "0.1.0"
SCHEMA = "vectorheat.field/1"
POINTS_SCHEMA = "vectorheat.points/1"
INTEGER_COLUMNS = ("vertex", "face")


# ----------------------------------------------------------------------
# mesh input

def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise MeshError(f"cannot read mesh file {path!r}: {exc}") from None


def _obj_index(tok, n, lineno):
    s = tok.split("/")[0]
    try:
        k = int(s)
    except ValueError:
        raise MeshError(f"bad face index {tok!r}", line=lineno) from None
    if k == 0:
        raise MeshError("OBJ indices start at 1", line=lineno)
    return k - 1 if k > 0 else n + k


def read_obj(path):
    """``(positions, faces, face_lines)`` from an OBJ file with triangle faces only."""
    P, F, where = [], [], []
    for lineno, raw in enumerate(_read_lines(path), 1):
        tok = raw.split("#", 1)[0].split()
        if not tok:
            continue
        if tok[0] == "v":
            try:
                P.append([float(x) for x in tok[1:4]])
            except ValueError:
                raise MeshError(f"bad vertex record {raw.strip()!r}", line=lineno) from None
            if len(P[-1]) != 3:
                raise MeshError("vertex record needs three coordinates", line=lineno)
        elif tok[0] == "f":
            if len(tok) != 4:
                raise MeshError(f"face with {len(tok) - 1} vertices; only triangles are supported",
                                line=lineno)
            F.append([_obj_index(t, len(P), lineno) for t in tok[1:]])
            where.append(lineno)
    if not F:
        raise MeshError(f"no faces in {path!r}")
    return np.array(P, dtype=float), np.array(F, dtype=np.int64), where


def _ints(tok, count, lineno, what):
    if len(tok) != count:
        raise MeshError(f"{what} needs {count} fields, got {len(tok)}", line=lineno)
    try:
        return [int(t) for t in tok]
    except ValueError:
        raise MeshError(f"bad {what} {' '.join(tok)!r}", line=lineno) from None


def read_intrinsic(path):
    """``(faces, lengths, face_lines, edge_lines)`` from the intrinsic text format."""
    rows = [(n, raw.split("#", 1)[0].split()) for n, raw in enumerate(_read_lines(path), 1)]
    rows = [(n, t) for n, t in rows if t]
    if not rows:
        raise MeshError(f"empty mesh file {path!r}")
    n0, head = rows[0]
    nv, nf = _ints(head, 2, n0, "counts line")
    if nf < 1 or nv < 3:
        raise MeshError("need at least three vertices and one face", line=n0)
    if len(rows) < 1 + nf:
        raise MeshError(f"expected {nf} face lines, found {len(rows) - 1}", line=rows[-1][0])
    F, where = [], []
    for n, tok in rows[1:1 + nf]:
        f = _ints(tok, 3, n, "face line")
        if min(f) < 0 or max(f) >= nv:
            raise MeshError(f"face index out of range 0..{nv - 1}", line=n)
        F.append(f)
        where.append(n)
    lengths, edge_lines = {}, {}
    for n, tok in rows[1 + nf:]:
        if len(tok) != 3:
            raise MeshError(f"edge line needs 'i j length', got {len(tok)} fields", line=n)
        i, j = _ints(tok[:2], 2, n, "edge line")
        try:
            ell = float(tok[2])
        except ValueError:
            raise MeshError(f"bad edge length {tok[2]!r}", line=n) from None
        key = (min(i, j), max(i, j))
        if key in lengths:
            raise MeshError(f"edge {key} listed twice", line=n)
        lengths[key] = ell
        edge_lines[key] = n
    used = np.unique(np.array(F))
    if len(used) != nv:
        raise MeshError(f"counts line says {nv} vertices but faces use {len(used)}", line=n0)
    return np.array(F, dtype=np.int64), lengths, where, edge_lines


def _locate(exc: MeshError, faces, face_lines, edge_lines=None):
    """Line number of the record behind a build error."""
    if exc.face is not None and 0 <= exc.face < len(face_lines):
        return face_lines[exc.face]
    if exc.edge is not None:
        a, b = exc.edge
        if edge_lines and (min(a, b), max(a, b)) in edge_lines:
            return edge_lines[(min(a, b), max(a, b))]
        for f, tri in enumerate(np.asarray(faces).tolist()):
            if a in tri and b in tri:
                return face_lines[f]
    if exc.vertex is not None:
        for f, tri in enumerate(np.asarray(faces).tolist()):
            if exc.vertex in tri:
                return face_lines[f]
    return None


def load_mesh(path, fmt: Optional[str] = None) -> IntrinsicMesh:
    """Read a mesh; ``fmt`` is ``"obj"``, ``"intrinsic"`` or ``None`` (by extension).

    Errors are :class:`MeshError` with the offending line number when known.
    """
    path = os.fspath(path)
    if fmt is None:
        fmt = "obj" if path.lower().endswith(".obj") else "intrinsic"
    if fmt == "obj":
        P, F, where = read_obj(path)
        if len(F) and (F.min() < 0 or F.max() >= len(P)):
            bad = int(np.nonzero((F < 0).any(1) | (F >= len(P)).any(1))[0][0])
            raise MeshError("face index out of range", face=bad, line=where[bad])
        build, edge_lines = (lambda: build_intrinsic_mesh(F, P)), None
    elif fmt == "intrinsic":
        F, lengths, where, edge_lines = read_intrinsic(path)
        build = lambda: build_intrinsic_mesh(F, lengths=lengths)  # noqa: E731
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    try:
        return build()
    except MeshError as exc:
        if exc.line is not None:
            raise
        line = _locate(exc, F, where, edge_lines)
        msg = exc.args[0]
        raise MeshError(msg, edge=exc.edge, face=exc.face, vertex=exc.vertex, line=line) from None


def write_intrinsic(mesh: IntrinsicMesh, path):
    """Write ``mesh`` in the intrinsic text format."""
    e_he = mesh.edge_he
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_faces}\n")
        for f in mesh.faces.tolist():
            fh.write(f"{f[0]} {f[1]} {f[2]}\n")
        for e, h in enumerate(e_he.tolist()):
            fh.write(f"{mesh.he_tail[h]} {mesh.he_head[h]} {float(mesh.edge_length[e])!r}\n")


def mesh_checksum(mesh: IntrinsicMesh) -> str:
    """SHA-256 of the connectivity and edge lengths."""
    hsh = hashlib.sha256()
    hsh.update(np.ascontiguousarray(mesh.faces, dtype="<i8").tobytes())
    hsh.update(np.ascontiguousarray(mesh.edge_length, dtype="<f8").tobytes())
    return hsh.hexdigest()


# ----------------------------------------------------------------------
# field export

@dataclass
class FieldExport:
    """Per-vertex records plus metadata.

    ``columns`` maps column names to equal-length arrays.  Standard names:
    ``vertex``, ``angle``, ``magnitude``, ``x``, ``y``, ``z`` (extrinsic
    vector), ``u``, ``v`` (log coordinates), ``r``, ``phi``, ``value``.
    """

    columns: Dict[str, np.ndarray]
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}
        sizes = {len(v) for v in self.columns.values()}
        if len(sizes) > 1:
            raise ValueError("columns have different lengths")

    def __len__(self):
        return len(next(iter(self.columns.values()))) if self.columns else 0


def field_metadata(mesh: IntrinsicMesh, **extra) -> Dict:
    meta = {"tool": "vectorheat", "version": VERSION, "mesh_checksum": mesh_checksum(mesh),
            "n_vertices": int(mesh.n_vertices)}
    meta.update(extra)
    return meta


def vector_export(mesh: IntrinsicMesh, values, extrinsic: bool = True, **metadata) -> FieldExport:
    """Export of a complex per-vertex field: angle in [0, 2pi), magnitude, optional 3-vector."""
    from .mesh import field_to_extrinsic

    values = np.asarray(values, dtype=complex)
    angle = np.angle(values) % (2 * np.pi)
    angle[angle >= 2 * np.pi] = 0.0  # -0.0 and tiny negatives wrap to exactly 2pi
    cols = {"vertex": np.arange(len(values)), "angle": angle,
            "magnitude": np.abs(values)}
    if extrinsic and mesh.positions is not None:
        E = field_to_extrinsic(mesh, values)
        cols.update(x=E[:, 0], y=E[:, 1], z=E[:, 2])
    return FieldExport(cols, field_metadata(mesh, **metadata))


def _fmt(v, integer):
    if integer:
        return str(int(v))
    v = float(v)
    if np.isfinite(v):
        return repr(v)
    # spellings accepted by both float() and json.loads
    return "NaN" if np.isnan(v) else ("Infinity" if v > 0 else "-Infinity")


def export_field(fld: FieldExport, fmt: str, path) -> None:
    """Write ``fld`` as ``"csv"`` or ``"json"``; ``path`` may be ``"-"`` for stdout."""
    text = dumps_field(fld, fmt)
    if path in ("-", None):
        import sys

        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path!r}: {exc.strerror or exc}") from None


def dumps_field(fld: FieldExport, fmt: str) -> str:
    names = list(fld.columns)
    ints = [n in INTEGER_COLUMNS for n in names]
    rows = [[_fmt(fld.columns[n][k], i) for n, i in zip(names, ints)] for k in range(len(fld))]
    if fmt == "csv":
        out = ["# " + json.dumps({"schema": SCHEMA, "metadata": fld.metadata}, sort_keys=True),
               ",".join(names)]
        out += [",".join(r) for r in rows]
        return "\n".join(out) + "\n"
    if fmt == "json":
        # one record per line keeps large exports diffable
        body = "[\n" + ",\n".join("    [" + ", ".join(r) + "]" for r in rows) + "\n  ]" if rows else "[]"
        return ('{\n  "schema": %s,\n  "metadata": %s,\n  "columns": %s,\n  "records": %s\n}\n'
                % (json.dumps(SCHEMA), json.dumps(fld.metadata, sort_keys=True), json.dumps(names), body))
    raise ValueError(f"unknown export format {fmt!r}")


def _column_arrays(names, rows):
    cols = {}
    for k, n in enumerate(names):
        vals = [r[k] for r in rows]
        cols[n] = np.array(vals, dtype=np.int64 if n in INTEGER_COLUMNS else float)
    return cols


def read_field(path) -> FieldExport:
    """Load a CSV or JSON export written by :func:`export_field`."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.startswith("#"):
        lines = text.splitlines()
        head = json.loads(lines[0][1:])
        if head.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {head.get('schema')!r}")
        names = lines[1].split(",") if len(lines) > 1 and lines[1] else []
        rows = [ln.split(",") for ln in lines[2:] if ln]
        rows = [[int(x) if n in INTEGER_COLUMNS else float(x) for n, x in zip(names, r)] for r in rows]
        return FieldExport(_column_arrays(names, rows), head["metadata"])
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}")
    return FieldExport(_column_arrays(doc["columns"], doc["records"]), doc["metadata"])


# ----------------------------------------------------------------------
# surface points

def point_record(mesh: IntrinsicMesh, p: SurfacePoint) -> Dict:
    rec = {"vertex": int(p.vertex)} if p.is_vertex else {
        "face": int(p.face), "bary": [float(b) for b in p.bary]}
    if mesh.positions is not None:
        rec["position"] = [float(x) for x in p.position(mesh)]
    return rec


def export_points(mesh: IntrinsicMesh, groups: Dict[str, List[SurfacePoint]], metadata: Dict, fmt: str, path,
                  extra: Optional[Dict] = None) -> None:
    """Write named lists of surface points (centers, sites, landmarks)."""
    if fmt == "json":
        doc = {"schema": POINTS_SCHEMA, "metadata": metadata,
               "points": {k: [point_record(mesh, p) for p in v] for k, v in groups.items()}}
        if extra:
            doc.update(extra)
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        lines = ["# " + json.dumps({"schema": POINTS_SCHEMA, "metadata": metadata, **(extra or {})},
                                   sort_keys=True),
                 "group,index,vertex,face,b0,b1,b2,x,y,z"]
        for name, pts in groups.items():
            for k, p in enumerate(pts):
                pos = p.position(mesh) if mesh.positions is not None else [np.nan] * 3
                if p.is_vertex:
                    loc = [str(p.vertex), "-1", "1.0", "0.0", "0.0"]
                else:
                    loc = ["-1", str(p.face)] + [repr(float(b)) for b in p.bary]
                lines.append(",".join([name, str(k)] + loc + [repr(float(x)) for x in pos]))
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown export format {fmt!r}")
    if path in ("-", None):
        import sys

        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
