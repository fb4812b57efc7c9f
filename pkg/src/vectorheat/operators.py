"""Sparse discrete operators on an :class:`~vectorheat.mesh.IntrinsicMesh`.

All stiffness matrices are assembled positive semidefinite, i.e. as the
negative of the Laplace-Beltrami operator, so heat steps read
``(M + t L) x = b``.
"""
import numpy as np
import scipy.sparse as sp


def _stencil_entries(mesh, values=None):
    """Rows, columns and weights of the per-face cotan stencils.

    Each interior halfedge ``i -> j`` contributes ``-cot(theta_k) / 2`` to
    entry ``(i, j)`` and ``+cot(theta_k) / 2`` to ``(i, i)``, where ``k`` is
    the opposite corner.  ``values`` optionally multiplies the off-diagonal
    contribution per halfedge.
    """
    nI = mesh.n_interior_halfedges
    i = mesh.he_tail[:nI]
    j = mesh.he_head[:nI]
    w = 0.5 * mesh.corner_cot[mesh.he_prev[:nI]]
    off = -w if values is None else -w * values
    return i, j, w, off


def cotan_laplacian(mesh) -> sp.csr_matrix:
    """Real symmetric cotan Laplacian; ``L @ ones == 0``."""
    i, j, w, off = _stencil_entries(mesh)
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([off, off, w, w])
    n = mesh.n_vertices
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def connection_laplacian(mesh, k: int = 1) -> sp.csr_matrix:
    """Complex Hermitian connection Laplacian for ``k``-fold symmetric fields.

    The row of vertex ``i`` couples to ``X_j`` through the rotation carrying
    ``j``'s frame into ``i``'s, raised to the power ``k``; parallel fields
    (``X_j = r_ij X_i`` on every edge) are in the kernel.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"symmetry degree must be a positive integer, got {k}")
    nI = mesh.n_interior_halfedges
    r = mesh.he_rotation[:nI] ** int(k)
    i, j, w, _ = _stencil_entries(mesh)
    # entry (i, j) multiplies X_j and needs r_ji = conj(r_ij)
    off_ij = -w * np.conj(r)
    off_ji = -w * r
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([j, i, i, j])
    vals = np.concatenate([off_ij, off_ji, w.astype(complex), w.astype(complex)])
    n = mesh.n_vertices
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def mass_matrix(mesh) -> sp.dia_matrix:
    """Lumped (barycentric) mass matrix: a third of the incident face areas."""
    return sp.diags(vertex_areas(mesh))


def vertex_areas(mesh) -> np.ndarray:
    areas = np.zeros(mesh.n_vertices)
    for c in range(3):
        areas += np.bincount(mesh.faces[:, c], weights=mesh.face_area, minlength=mesh.n_vertices)
    return areas / 3.0


def edge_projections(mesh, X) -> np.ndarray:
    """Per-edge ``R_ij = (<e_ij, X_i> + <-e_ji, X_j>) / 2`` for the canonical halfedges.

    ``e_ij`` is the edge vector ``l_ij exp(1j phi_ij)`` in the frame of its tail.
    """
    X = np.asarray(X, dtype=complex)
    h = mesh.edge_he
    t = mesh.he_twin[h]
    ell = mesh.edge_length
    e_i = ell * np.exp(1j * mesh.he_angle[h])
    e_j = ell * np.exp(1j * mesh.he_angle[t])
    a = np.real(np.conj(e_i) * X[mesh.he_tail[h]])
    b = np.real(np.conj(-e_j) * X[mesh.he_head[h]])
    return 0.5 * (a + b)


def divergence(mesh, X) -> np.ndarray:
    """Vertex divergence ``sum_j w_ij R_ij`` of a tangent field.

    ``w_ij`` is the full cotan weight ``cot(theta_k) + cot(theta_l)``.  For
    the gradient of a linear function on a flat mesh this equals
    ``-2 * (L @ f)`` with ``L`` from :func:`cotan_laplacian`.
    """
    return edge_divergence(mesh, edge_projections(mesh, X))


def edge_divergence(mesh, R) -> np.ndarray:
    """Divergence from per-edge integrated values ``R`` (oriented along ``mesh.edge_vertices``)."""
    R = np.asarray(R, dtype=float) * mesh.cotan_weights()
    i, j = mesh.edge_vertices[:, 0], mesh.edge_vertices[:, 1]
    n = mesh.n_vertices
    return np.bincount(i, weights=R, minlength=n) - np.bincount(j, weights=R, minlength=n)
