"""Generator-level representation of the merge eigenvector matrix.

The eigenvector matrix Q of diag(d) + rho*zhat*zhat^T satisfies the
displacement identity diag(d) @ Q - Q @ diag(lam) = zhat v^T, i.e. it is
Cauchy-like: Q[i, j] = zhat[i] * v[j] / (d[i] - lam[j]).  Entries are always
evaluated on demand from the generators (zhat, v) and the gap pairs; nothing
dense is cached here.
"""
import numpy as np

from .flops import cauchy_eval_flops, gemm_flops
from .secular import column_normalizers, gap_table, stable_gap


class CauchyEvecMatrix:
    """Square Cauchy-like matrix with unit columns, held entirely by generators."""

    def __init__(self, d, gamma, mu, zhat, v):
        self.d = np.ascontiguousarray(d, dtype=np.float64)
        self.gamma = np.ascontiguousarray(gamma, dtype=np.float64)
        self.mu = np.ascontiguousarray(mu, dtype=np.float64)
        self.zhat = np.ascontiguousarray(zhat, dtype=np.float64)
        self.v = np.ascontiguousarray(v, dtype=np.float64)
        self.k = self.d.size
        shapes = {a.shape for a in (self.d, self.gamma, self.mu, self.zhat, self.v)}
        if len(shapes) != 1:
            raise ValueError("generator arrays must share one shape")

    @classmethod
    def from_secular(cls, sys, sol, flops=None):
        """Assemble from a solved system; computes v if not yet recorded."""
        if sol.zhat is None:
            raise ValueError("recompute_weights must run first")
        v = sol.v
        if v is None or np.any(np.isnan(v)):
            v = column_normalizers(sys.d, sol.gamma, sol.mu, sol.zhat, flops=flops)
            sol.v = v
        return cls(sys.d, sol.gamma, sol.mu, sol.zhat, v)

    @property
    def lam(self):
        return self.d + self.gamma

    def entry(self, i, j):
        """Single entry zhat[i]*v[j] / (d[i] - lam[j])."""
        return self.zhat[i] * self.v[j] / stable_gap(i, j, self.d, self.gamma, self.mu)

    def block(self, rows, cols, flops=None, phase="hss_construct"):
        """Dense materialization of a subblock, straight from the generators."""
        rows = self._range(rows)
        cols = self._range(cols)
        g = gap_table(rows, cols, self.d, self.gamma, self.mu)
        out = (self.zhat[rows][:, None] * self.v[cols][None, :]) / g
        if flops is not None:
            self._count(flops, phase, cauchy_eval_flops(out.size))
        return out

    def _range(self, r):
        if isinstance(r, (slice, range)):
            return np.arange(self.k, dtype=np.intp)[r]
        return np.asarray(r, dtype=np.intp)

    @staticmethod
    def _count(flops, phase, n):
        setattr(flops, phase, getattr(flops, phase) + n)

    def to_dense(self, flops=None, phase="hss_construct"):
        return self.block(np.arange(self.k), np.arange(self.k), flops=flops, phase=phase)

    def multiply(self, X, flops=None, chunk=512, phase="hss_construct"):
        """Dense product C @ X, materializing row blocks on the fly."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] != self.k:
            raise ValueError(f"shape mismatch: C is {self.k}x{self.k}, X has {X.shape[0]} rows")
        out = np.empty((self.k,) + X.shape[1:])
        cols = np.arange(self.k)
        for start in range(0, self.k, chunk):
            rows = np.arange(start, min(start + chunk, self.k))
            out[rows] = self.block(rows, cols) @ X
        if flops is not None:
            p = X.shape[1] if X.ndim > 1 else 1
            self._count(flops, phase,
                        gemm_flops(self.k, self.k, p) + cauchy_eval_flops(self.k * self.k))
        return out

    def transpose_multiply(self, X, flops=None, chunk=512, phase="hss_construct"):
        """Dense product C^T @ X."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] != self.k:
            raise ValueError(f"shape mismatch: C is {self.k}x{self.k}, X has {X.shape[0]} rows")
        out = np.zeros((self.k,) + X.shape[1:])
        cols = np.arange(self.k)
        for start in range(0, self.k, chunk):
            rows = np.arange(start, min(start + chunk, self.k))
            out += self.block(rows, cols).T @ X[rows]
        if flops is not None:
            p = X.shape[1] if X.ndim > 1 else 1
            self._count(flops, phase,
                        gemm_flops(self.k, self.k, p) + cauchy_eval_flops(self.k * self.k))
        return out
