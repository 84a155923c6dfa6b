"""Slow, independent reference implementations for tests and verification.

Everything here is Jacobi-rotation based and shares no code path with the
production divide-and-conquer solver.
"""
import numpy as np

from .backend import kernels as _kn

EPS = float(np.finfo(np.float64).eps)
MAX_ORDER = 4096
MAX_SWEEPS = 50


class JacobiConvergenceError(ArithmeticError):
    pass


class DenseSym:
    """Dense symmetric matrix with mirrored storage (symmetry exact by construction)."""

    def __init__(self, data):
        A = np.array(data, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("need a square 2-D array")
        # mirror the lower triangle so A == A.T holds to 0 ulp
        A = np.tril(A) + np.tril(A, -1).T
        self.data = A
        self.n = A.shape[0]

    @classmethod
    def from_tridiagonal(cls, T):
        return cls(T.to_dense())


def _as_sym_array(A):
    if isinstance(A, DenseSym):
        return A.data
    A = np.asarray(A, dtype=np.float64)
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not exactly symmetric; wrap it in DenseSym")
    return A


def jacobi_eig(A):
    """Eigendecomposition by cyclic Jacobi rotations.

    Stops once the off-diagonal Frobenius norm is below n*eps*||A||_F.
    Returns (eigenvalues ascending, eigenvector columns).
    """
    A = _as_sym_array(A)
    n = A.shape[0]
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds the oracle bound {MAX_ORDER}")
    W = np.ascontiguousarray(A.copy())
    V = np.eye(n)
    target = n * EPS * float(np.linalg.norm(A, "fro"))
    sweeps = _kn.jacobi_run(W, V, target, MAX_SWEEPS)
    if sweeps < 0:
        raise JacobiConvergenceError(f"no convergence in {MAX_SWEEPS} sweeps")
    lam = np.diag(W).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def singular_values(M):
    """Singular values of a dense matrix via one-sided Jacobi.

    Rows of the short side are rotated until mutually orthogonal, which
    diagonalizes the Gram matrix without ever forming it, so values near
    eps*||M|| are still resolved.  Returned descending.
    """
    M = np.asarray(M, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise ValueError("non-finite entries")
    p, q = M.shape
    W = np.array(M if p <= q else M.T, dtype=np.float64, order="C", copy=True)
    sweeps = _kn.onesided_orthogonalize(W, MAX_SWEEPS)
    if sweeps < 0:
        raise JacobiConvergenceError(f"no convergence in {MAX_SWEEPS} sweeps")
    sig = np.linalg.norm(W, axis=1)
    sig.sort()
    return sig[::-1]


def numerical_rank(M, threshold):
    """Number of singular values strictly above threshold."""
    return int(np.count_nonzero(singular_values(M) > threshold))
