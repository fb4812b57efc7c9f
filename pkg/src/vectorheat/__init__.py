"""Parallel transport, logarithmic maps and geodesic centers by vector heat diffusion."""
from .mesh import (IntrinsicMesh, MeshError, SurfacePoint, TangentVector, build_intrinsic_mesh,
                   extrinsic_to_tangent, field_to_extrinsic, tangent_to_extrinsic, transport_along_edge)
from .idt import DelaunayResult, to_intrinsic_delaunay
from .solver import Factorization, IndefiniteMatrixError, factorization_count
from .vhm import (SourceSet, TransportResult, VectorHeatSolver, parallel_transport, point_sources,
                  sample_field, scalar_interpolate, transport_roundtrip_check)
from .logmap import LogMapField, compute_log_map, logmap_at, radial_initial_conditions, radius_at
from .geodesics import GeodesicTrace, exp_map, trace_geodesic, transport_along_trace
from .centers import (CenterProblem, CenterResult, VoronoiState, find_center, gcvt, karcher_update,
                      ordered_landmarks)
from .io import FieldExport, export_field, load_mesh, read_field

__version__ = "0.1.0"
