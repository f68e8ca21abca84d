"""Sparse matrices, stiffness assembly, and verified linear solves.

Everything downstream funnels its implicit systems through this module so
that the solve contract lives in one place: a solve either returns a vector
whose relative residual is below the requested tolerance or raises
SolverError.  scipy.sparse provides the storage and the LU factorization;
the residual verification and refinement policy on top are ours.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import InvalidArgumentError, SolverError

__all__ = [
    "SparseMatrix",
    "SparseSystem",
    "SparseFactor",
    "assemble_stiffness",
    "solve_spd",
    "solve_general",
    "export_matrix_market",
]


class SparseMatrix:
    """Square CSR matrix with canonical structure and a symmetry flag.

    Parameters
    ----------
    matrix : scipy sparse matrix or convertible
        Square matrix; duplicates are summed and indices sorted on entry.
    symmetric : bool
        Caller's assertion that the matrix is symmetric.  It is trusted by
        the SPD solve path, so only set it when the construction guarantees
        symmetry (e.g. stiffness plus diagonal terms).
    """

    def __init__(self, matrix, symmetric: bool = False):
        csr = sp.csr_matrix(matrix)
        if csr.shape[0] != csr.shape[1]:
            raise InvalidArgumentError(f"matrix must be square, got shape {csr.shape}")
        csr.sum_duplicates()
        csr.sort_indices()
        self.csr = csr
        self.symmetric = bool(symmetric)

    @classmethod
    def from_coo(cls, rows, cols, vals, n: int, symmetric: bool = False) -> "SparseMatrix":
        """Build from COO triplets; duplicate entries are summed."""
        coo = sp.coo_matrix((np.asarray(vals, dtype=float), (rows, cols)), shape=(n, n))
        return cls(coo, symmetric=symmetric)

    @property
    def n(self) -> int:
        return self.csr.shape[0]

    @property
    def nnz(self) -> int:
        return self.csr.nnz

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.csr @ x

    def __matmul__(self, x):
        return self.csr @ x

    def toarray(self) -> np.ndarray:
        return self.csr.toarray()

    def __repr__(self) -> str:
        tag = "symmetric" if self.symmetric else "general"
        return f"SparseMatrix(n={self.n}, nnz={self.nnz}, {tag})"


@dataclass
class SparseSystem:
    """One linear system A x = b ready for a verified solve."""

    A: SparseMatrix
    b: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        if self.b.shape != (self.A.n,):
            raise InvalidArgumentError(
                f"right-hand side has shape {self.b.shape}, expected ({self.A.n},)"
            )

    def solve(self, tol: float = 1e-12, maxit: int | None = None) -> np.ndarray:
        if self.A.symmetric:
            return solve_spd(self.A, self.b, tol=tol, maxit=maxit)
        return solve_general(self.A, self.b, tol=tol, maxit=maxit)


class SparseFactor:
    """Reusable LU factorization of a SparseMatrix.

    Factor once, then solve many right-hand sides against the same matrix
    (the per-step systems for species with state-independent coefficients).
    Each solve still goes through the residual check.
    """

    def __init__(self, A: SparseMatrix):
        self.A = A
        try:
            self._lu = splu(A.csr.tocsc())
        except RuntimeError as exc:
            raise SolverError(f"factorization failed: {exc}") from exc

    def solve(self, b: np.ndarray, tol: float = 1e-12, maxit: int | None = None) -> np.ndarray:
        return _refined_solve(self._lu, self.A.csr, np.asarray(b, dtype=float), tol, maxit)


def _refined_solve(lu, csr, b, tol, maxit):
    """Direct solve plus iterative refinement, verified against the residual contract."""
    n = csr.shape[0]
    if b.shape != (n,):
        raise InvalidArgumentError(f"right-hand side has shape {b.shape}, expected ({n},)")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros(n)
    if maxit is None:
        maxit = 10 * n
    x = lu.solve(b)
    # a couple of refinement sweeps normally land at ~1e-16 relative residual
    refinements = max(1, min(10, maxit))
    res_norm = float(np.linalg.norm(b - csr @ x))
    for _ in range(refinements):
        if res_norm <= tol * b_norm:
            break
        x = x + lu.solve(b - csr @ x)
        new_norm = float(np.linalg.norm(b - csr @ x))
        if not new_norm < res_norm:
            break
        res_norm = new_norm
    if not res_norm <= tol * b_norm:
        raise SolverError(
            f"solve failed the residual contract: |Ax-b| = {res_norm:.3e} "
            f"> {tol:.1e} * |b| = {tol * b_norm:.3e}"
        )
    if not np.all(np.isfinite(x)):
        raise SolverError("solve produced non-finite entries (singular or badly scaled matrix)")
    return x


def solve_spd(A: SparseMatrix, b: np.ndarray, tol: float = 1e-12, maxit: int | None = None) -> np.ndarray:
    """Solve A x = b for a symmetric positive definite A.

    The factorization choice is an implementation detail; the contract is
    the verified relative residual |Ax - b| <= tol * |b| in the 2-norm.

    Raises
    ------
    SolverError
        If the matrix is singular or the residual contract cannot be met.
    InvalidArgumentError
        If A is not flagged symmetric.
    """
    if not A.symmetric:
        raise InvalidArgumentError("solve_spd needs a matrix flagged symmetric")
    return SparseFactor(A).solve(np.asarray(b, dtype=float), tol=tol, maxit=maxit)


def solve_general(A: SparseMatrix, b: np.ndarray, tol: float = 1e-12, maxit: int | None = None) -> np.ndarray:
    """Solve A x = b for a general square A, with the same residual contract."""
    return SparseFactor(A).solve(np.asarray(b, dtype=float), tol=tol, maxit=maxit)


def assemble_stiffness(mesh) -> SparseMatrix:
    """Assemble the diffusion stiffness matrix from the interior edge table.

    Entry (K, K) accumulates the transmissibilities of all edges incident
    to cell K and entry (K, L) gets minus the transmissibility of the edge
    between K and L, so row sums vanish (up to summation roundoff) and the
    matrix is symmetric positive semidefinite.  Boundary edges contribute
    nothing, which is exactly the zero-flux boundary condition.
    """
    e = mesh.edges
    a, b, tau = e.cell_a, e.cell_b, e.transmissibility
    rows = np.concatenate([a, b, a, b])
    cols = np.concatenate([a, b, b, a])
    vals = np.concatenate([tau, tau, -tau, -tau])
    return SparseMatrix.from_coo(rows, cols, vals, mesh.n_cells, symmetric=True)


def export_matrix_market(A: SparseMatrix, path) -> None:
    """Write the matrix in Matrix Market format for external inspection."""
    from scipy.io import mmwrite

    mmwrite(str(path), A.csr)
