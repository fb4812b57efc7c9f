"""Prefactored sparse direct solves for the heat and Poisson systems."""
import hashlib
import itertools
import threading

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

RESIDUAL_TOL = 1e-8

_counter = itertools.count()
_count_lock = threading.Lock()
_n_factorizations = 0


def factorization_count() -> int:
    """Number of factorizations created in this process."""
    return _n_factorizations


class IndefiniteMatrixError(np.linalg.LinAlgError):
    pass


def fingerprint(A) -> tuple:
    A = sp.csr_matrix(A)
    A.sort_indices()
    digest = hashlib.sha1()
    for arr in (A.indptr, A.indices, A.data):
        digest.update(np.ascontiguousarray(arr).tobytes())
    return A.shape[0], A.nnz, digest.hexdigest()


class Factorization:
    """Reusable LU factorization of a symmetric / Hermitian positive semidefinite matrix.

    Symmetric mode with a minimum-degree ordering on ``A + A^T`` keeps the
    pivots on the diagonal, so their signs expose indefiniteness.
    """

    def __init__(self, A, *, check_definite=True):
        global _n_factorizations
        A = sp.csc_matrix(A)
        self.shape = A.shape
        self.kind = "hermitian-HPD" if np.iscomplexobj(A.data) else "real-SPD"
        self.fingerprint = fingerprint(A)
        self._A = A
        try:
            self._lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                 options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise IndefiniteMatrixError(
                f"factorization failed ({exc}); the matrix may be indefinite, "
                "try building operators on the intrinsic Delaunay mesh") from exc
        if check_definite:
            piv = self._lu.U.diagonal()
            scale = np.abs(piv).max()
            if np.any(np.real(piv) < -1e-10 * scale):
                raise IndefiniteMatrixError(
                    "matrix is indefinite (negative pivot); use the intrinsic "
                    "Delaunay mesh to guarantee nonnegative cotan weights")
        with _count_lock:
            _n_factorizations += 1
        self.id = next(_counter)

    def solve(self, b) -> np.ndarray:
        """Backsolve with one step of iterative refinement when needed."""
        b = np.asarray(b)
        if b.shape[0] != self.shape[0]:
            raise ValueError(f"dimension mismatch: matrix {self.shape}, rhs {b.shape}")
        if self.kind == "real-SPD" and np.iscomplexobj(b):
            return self.solve(b.real) + 1j * self.solve(b.imag)
        x = self._lu.solve(b)
        r = b - self._A @ x
        nb = np.linalg.norm(b)
        if nb > 0 and np.linalg.norm(r) > RESIDUAL_TOL * nb:
            x = x + self._lu.solve(r)
        return x


def prefactor(A, **kwargs) -> Factorization:
    return Factorization(A, **kwargs)


def backsolve(f: Factorization, b) -> np.ndarray:
    return f.solve(b)


class PinnedPoisson:
    """Solver for ``L x = b`` with ``L`` a Laplacian whose kernel is the constants.

    One vertex per connected component is pinned to zero; the right-hand
    side must sum to zero on every component.
    """

    def __init__(self, L):
        L = sp.csr_matrix(L)
        n = L.shape[0]
        ncomp, labels = csgraph.connected_components(L != 0, directed=False)
        self.pins = np.array([np.nonzero(labels == c)[0][0] for c in range(ncomp)])
        keep = np.ones(n, dtype=bool)
        keep[self.pins] = False
        D = sp.diags(keep.astype(float))
        A = D @ L @ D + sp.diags((~keep).astype(float))
        self._keep = keep
        self.factor = Factorization(A)

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float).copy()
        b[~self._keep] = 0.0
        return self.factor.solve(b)
