"""Rank-one-modified diagonal eigenproblem: deflation, secular roots, weights.

The merge step of the divide-and-conquer solver reduces to the eigenproblem
of M = diag(d) + rho*z*z^T.  Roots of the secular equation

    f(lam) = 1 + rho * sum_j z_j^2 / (d_j - lam) = 0

interlace the poles d_j; each root is carried as the gap pair
(gamma_i, mu_i) = (lam_i - d_i, d_{i+1} - lam_i) so differences d_i - lam_j
can always be formed without cancellation (stable_gap).  The weight vector
is then recomputed from the roots via Loewner's theorem, which makes the
explicit eigenvector columns orthogonal to working precision even though
the roots themselves are inexact.
"""
from dataclasses import dataclass

import numpy as np

from .backend import kernels as _kn
from .flops import secular_flops

EPS = float(np.finfo(np.float64).eps)


class SecularConvergenceError(ArithmeticError):
    pass


class WeightRecomputationError(ArithmeticError):
    pass


@dataclass
class RankOneSystem:
    """Post-deflation system diag(d) + rho*z*z^T: d strictly ascending, z nonzero."""

    d: np.ndarray
    z: np.ndarray
    rho: float

    def __post_init__(self):
        self.d = np.ascontiguousarray(self.d, dtype=np.float64)
        self.z = np.ascontiguousarray(self.z, dtype=np.float64)
        if self.d.shape != self.z.shape or self.d.ndim != 1:
            raise ValueError("d and z must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.d)) and np.all(np.isfinite(self.z))):
            raise ValueError("non-finite input")
        if self.rho <= 0.0 or not np.isfinite(self.rho):
            raise ValueError("rho must be positive and finite")
        if self.size and np.any(np.diff(self.d) <= 0.0):
            raise ValueError("poles must be strictly ascending")
        if self.size and np.any(self.z == 0.0):
            raise ValueError("zero weights must be deflated first")

    @property
    def size(self):
        return self.d.size


@dataclass
class DeflationOutcome:
    kept: RankOneSystem
    permutation: np.ndarray              # original indices: kept block, then deflated
    rotations: list                      # (i_orig, j_orig, c, s); zeroes weight j
    deflated_eigenvalues: list           # (original index, eigenvalue), ascending value
    n_deflated: int
    tol: float


@dataclass
class SecularSolution:
    """Roots through gap pairs; zhat and v are filled by the later stages."""

    lam: np.ndarray
    gamma: np.ndarray
    mu: np.ndarray
    zhat: np.ndarray | None = None
    v: np.ndarray | None = None
    iterations: int = 0

    @property
    def size(self):
        return self.lam.size

    @property
    def pole_bound(self):
        """Virtual pole closing the last interval: d_k + rho*sum(z^2)."""
        return float(self.lam[-1] + self.mu[-1])


def deflation_tolerance(d, z, rho, eps_scale=1.0):
    scale = max(float(np.abs(d).max()), rho * float(np.sum(z * z)))
    return eps_scale * 8.0 * EPS * scale


def deflate(d, z, rho, eps_scale=1.0):
    """Deflate negligible weights and (near-)equal pole pairs.

    Entries with rho*z_i^2 within tolerance deflate directly at d_i; pole
    pairs closer than the tolerance are merged by a Givens rotation that
    zeroes one weight and folds it into the survivor (both rotated diagonal
    entries are kept).  Rotation index pairs refer to the caller's original
    ordering so they can be replayed on eigenvector columns.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if d.shape != z.shape or d.ndim != 1 or d.size < 1:
        raise ValueError("d and z must be 1-D arrays of equal positive length")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(z)) and np.isfinite(rho)):
        raise ValueError("non-finite input")
    if rho <= 0.0:
        raise ValueError("rho must be positive")

    n = d.size
    tol = deflation_tolerance(d, z, rho, eps_scale)
    order = np.argsort(d, kind="stable")
    ds = d[order].copy()
    zs = z[order].copy()

    rotations = []
    keep = np.ones(n, dtype=bool)
    surv = -1
    for t in range(n):
        # dropping weight t perturbs the matrix by about rho*|z_t|*||z||,
        # first order in z_t, so the test must be on |z_t| rather than z_t^2
        if rho * abs(zs[t]) <= tol:
            keep[t] = False
            continue
        if surv >= 0 and ds[t] - ds[surv] <= tol:
            r = np.hypot(zs[surv], zs[t])
            c = zs[surv] / r
            s = zs[t] / r
            zs[surv] = r
            zs[t] = 0.0
            dp, dt = ds[surv], ds[t]
            ds[surv] = c * c * dp + s * s * dt
            ds[t] = s * s * dp + c * c * dt
            rotations.append((int(order[surv]), int(order[t]), float(c), float(s)))
            keep[t] = False
        else:
            surv = t

    kept_idx = np.flatnonzero(keep)
    defl_idx = np.flatnonzero(~keep)
    defl_order = defl_idx[np.argsort(ds[defl_idx], kind="stable")]
    permutation = np.concatenate([order[kept_idx], order[defl_order]]).astype(np.intp)
    kept = RankOneSystem(ds[kept_idx], zs[kept_idx], rho)
    deflated = [(int(order[t]), float(ds[t])) for t in defl_order]
    return DeflationOutcome(
        kept=kept,
        permutation=permutation,
        rotations=rotations,
        deflated_eigenvalues=deflated,
        n_deflated=int(defl_idx.size),
        tol=tol,
    )


def solve_secular(sys, flops=None):
    """Roots of the secular equation for a valid post-deflation system.

    Each root is found in a coordinate shifted to its nearer pole by a
    two-pole rational interpolant iteration safeguarded by a bisection
    bracket; gap pairs come straight out of the shifted variable.
    """
    k = sys.size
    if k == 0:
        raise ValueError("empty system")
    lam, gamma, mu, iters = _kn.secular_all(sys.d, sys.z, sys.rho)
    if flops is not None:
        flops.secular += secular_flops(k, iters)
    bad = np.flatnonzero(gamma <= 0.0)
    if bad.size == 0 and k >= 2:
        bad = np.flatnonzero(mu <= 0.0)
    if bad.size:
        i = int(bad[0])
        raise SecularConvergenceError(
            f"root {i} lost its bracket (gamma={gamma[i]:.3e}, mu={mu[i]:.3e})"
        )
    return SecularSolution(lam=lam, gamma=gamma, mu=mu, iterations=int(iters))


def stable_gap(i, j, d, gamma, mu):
    """d[i] - lam[j] without cancellation: branch on i <= j vs i > j.

    Uses d[i] - d[j] - gamma[j] when i <= j and d[i] - d[j+1] + mu[j]
    otherwise, so the result stays accurate when lam[j] is glued to one
    of its neighbouring poles.
    """
    if i <= j:
        return (d[i] - d[j]) - gamma[j]
    return (d[i] - d[j + 1]) + mu[j]


def gap_table(rows, cols, d, gamma, mu):
    """Dense table of d[i] - lam[j] over index arrays, via stable_gap branches."""
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    dext = np.append(d, d[-1] + gamma[-1] + mu[-1])
    di = d[rows][:, None]
    le = (di - d[cols][None, :]) - gamma[cols][None, :]
    gt = (di - dext[cols + 1][None, :]) + mu[cols][None, :]
    return np.where(rows[:, None] <= cols[None, :], le, gt)


def recompute_weights(d, sol, orig_z, rho=1.0, flops=None, chunk=512):
    """Rebuild the weight vector from the computed roots (Loewner's theorem).

    |u_i|^2 = prod_{j<i} (lam_j-d_i)/(d_j-d_i) * prod_{j>i} (lam_j-d_i)/(d_j-d_i)
              * (lam_i-d_i) / rho,
    every lam_j - d_i formed through the stable gaps; the sign is copied
    from the original weight.  Fills sol.zhat and returns it.
    """
    d = np.asarray(d, dtype=np.float64)
    k = d.size
    out = np.empty(k)
    cols = np.arange(k)
    for start in range(0, k, chunk):
        rows = np.arange(start, min(start + chunk, k))
        num = -gap_table(rows, cols, d, sol.gamma, sol.mu)  # lam_j - d_i
        den = d[None, :] - d[rows][:, None]
        ratio = np.ones_like(num)
        np.divide(num, den, out=ratio, where=den != 0.0)
        ratio[rows - start, rows] = 1.0
        rad = np.prod(ratio, axis=1) * sol.gamma[rows] / rho
        if np.any(rad <= 0.0) or not np.all(np.isfinite(rad)):
            i = rows[int(np.flatnonzero((rad <= 0.0) | ~np.isfinite(rad))[0])]
            raise WeightRecomputationError(
                f"non-positive radicand at index {i}; interlacing must have failed"
            )
        out[rows] = np.sqrt(rad)
    if flops is not None:
        flops.secular += 8 * k * k
    out = np.copysign(out, orig_z)
    sol.zhat = out
    return out


def column_normalizers(d, gamma, mu, zhat, flops=None, chunk=512):
    """Reciprocal 2-norm of every raw eigenvector column zhat / (d - lam_j)."""
    k = d.size
    v = np.empty(k)
    rows = np.arange(k)
    for start in range(0, k, chunk):
        cols = np.arange(start, min(start + chunk, k))
        g = gap_table(rows, cols, d, gamma, mu)
        v[cols] = 1.0 / np.sqrt(((zhat[:, None] / g) ** 2).sum(axis=0))
    if flops is not None:
        flops.secular += 6 * k * k
    return v


def eigvec_column(sys, sol, j, flops=None):
    """Unit eigenvector column j of the modified system; records sol.v[j]."""
    k = sys.size
    if sol.zhat is None:
        raise ValueError("recompute_weights must run first")
    g = gap_table(np.arange(k), np.array([j]), sys.d, sol.gamma, sol.mu)[:, 0]
    q = sol.zhat / g
    vj = 1.0 / float(np.linalg.norm(q))
    if sol.v is None:
        sol.v = np.full(k, np.nan)
    sol.v[j] = vj
    if flops is not None:
        flops.secular += 6 * k
    return q * vj
