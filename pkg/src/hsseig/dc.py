"""Divide-and-conquer eigensolver for symmetric tridiagonal matrices.

Each merge writes T as a block-diagonal pair plus a rank-one correction,
deflates, solves the secular equation of the reduced system, and updates
the eigenvector block either by a plain product with the explicit
Cauchy-like eigenvector matrix or, above a size threshold, by compressing
that matrix into HSS form and multiplying through the tree.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels as _kn
from .cauchy import CauchyEvecMatrix
from .flops import FlopCounter, gemm_flops
from .hss import build_partition, estimate_rank, hss_matmul_right, rand_hss_construct
from .matgen import SymTridiagonal
from .secular import deflate, recompute_weights, solve_secular

_SQRT2 = np.sqrt(2.0)

METHODS = ("dense-dc", "adc-rand")


class BaseCaseError(ArithmeticError):
    pass


@dataclass
class SolverConfig:
    base_size: int = 25
    hss_threshold: int = 2000
    leaf_size: int = 200
    oversample: int = 10
    rank_eps: float = 1e-16
    rank_cap: int = 100
    seed: int = 0
    method: str = "adc-rand"

    def __post_init__(self):
        if self.base_size < 3:
            raise ValueError("base_size must be at least 3")
        if self.hss_threshold < 4 * self.leaf_size:
            raise ValueError("hss_threshold must be at least 4x leaf_size")
        if self.rank_eps <= 0.0 or not (0 < self.rank_cap):
            raise ValueError("tolerances must be positive")
        if self.oversample < 0:
            raise ValueError("oversample must be non-negative")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")


@dataclass
class MergeRecord:
    size: int
    kept: int
    n_deflated: int
    used_hss: bool = False
    hss_rank: int = 0
    fell_back: bool = False
    flops: dict = field(default_factory=dict)  # per-phase counts for this merge


@dataclass
class EigenResult:
    lam: np.ndarray
    Q: np.ndarray
    merges: list = field(default_factory=list)
    flops: FlopCounter = field(default_factory=FlopCounter)

    @property
    def n(self):
        return self.lam.size

    def max_deflation_fraction(self):
        if not self.merges:
            return 0.0
        return max(m.n_deflated / m.size for m in self.merges)


def split(T, k=None):
    """T = blockdiag(T1, T2) + rho * v v^T with v = e_k + theta*e_{k+1}.

    rho = |b_k| and theta its sign, so both modified corner diagonals drop
    by rho and the coupling entry is rho*theta = b_k.
    """
    n = T.n
    if k is None:
        k = n // 2
    if not 1 <= k < n:
        raise ValueError(f"split index {k} out of range for order {n}")
    bk = float(T.b[k - 1])
    rho = abs(bk)
    theta = 1.0 if bk >= 0.0 else -1.0
    a1 = T.a[:k].copy()
    a1[-1] -= rho
    a2 = T.a[k:].copy()
    a2[0] -= rho
    T1 = SymTridiagonal(a1, T.b[: k - 1].copy())
    T2 = SymTridiagonal(a2, T.b[k:].copy())
    return T1, T2, rho, theta


def merge(Q1, L1, Q2, L2, rho, theta):
    """Rank-one system of the merged problem, jointly sorted by pole.

    The raw coupling vector (last row of Q1, theta * first row of Q2) has
    norm sqrt(2); it is normalized here and the factor folded into the
    returned rho_eff = 2*rho.
    """
    z = np.concatenate([Q1[-1, :], theta * Q2[0, :]]) / _SQRT2
    d = np.concatenate([L1, L2])
    perm = np.argsort(d, kind="stable")
    return d[perm], z[perm], 2.0 * rho, perm


def base_case_eig(T, flops=None):
    """Implicit-shift QL with Wilkinson shift; eigenvalues ascending."""
    n = T.n
    dd = T.a.copy()
    ee = T.b.copy()
    Q = np.eye(n)
    status = _kn.tql2(dd, ee, Q, 30)
    if status != 0:
        raise BaseCaseError(f"QL iteration stalled on eigenvalue {status - 1}")
    order = np.argsort(dd, kind="stable")
    return EigenResult(lam=dd[order], Q=np.ascontiguousarray(Q[:, order]),
                       flops=flops if flops is not None else FlopCounter())


def update_vectors_dense(Qblock, Qprime, flops=None):
    """Plain eigenvector update Qblock @ Qprime."""
    if Qblock.shape[1] != Qprime.shape[0]:
        raise ValueError("inner dimensions do not match")
    if flops is not None:
        flops.update_dense += gemm_flops(Qblock.shape[0], *Qprime.shape)
    return Qblock @ Qprime


def update_vectors_hss(Qblock, C, cfg, seed=0, flops=None, record=None):
    """Eigenvector update through an HSS approximation of C.

    Falls back to the dense product when the system is too small to
    partition, the usable rank is nonpositive, or construction flagged a
    residual failure; the fallback is noted on the record when given.
    """
    k = C.k

    def dense_fallback():
        if record is not None:
            record.used_hss = False
            record.fell_back = True
        return update_vectors_dense(Qblock, C.to_dense(flops=flops, phase="update_dense"),
                                    flops=flops)

    try:
        part = build_partition(k, cfg.leaf_size, C.d, C.gamma, C.mu)
    except ValueError:
        return dense_fallback()
    r_est = estimate_rank(part, C.d, C.gamma, C.mu, cfg.rank_eps, cfg.rank_cap)
    r = min(r_est, part.min_leaf - cfg.oversample)
    if r < 1:
        return dense_fallback()
    H = rand_hss_construct(C, part, r, p=cfg.oversample, seed=seed, flops=flops)
    if H.flagged:
        return dense_fallback()
    if record is not None:
        record.used_hss = True
        record.hss_rank = H.r_used
    return hss_matmul_right(Qblock, H, flops=flops)


def adc_solve(T, cfg=None):
    """Full eigendecomposition of a symmetric tridiagonal matrix.

    Recursion follows the divide-and-conquer tree: orders at most
    cfg.base_size go to the QL base case; larger ones split at the
    midpoint, recurse, deflate the merged rank-one system, solve its
    secular equation, and update eigenvectors by the dense or HSS path
    depending on cfg.method and the post-deflation size.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not (np.all(np.isfinite(T.a)) and np.all(np.isfinite(T.b))):
        raise ValueError("matrix has non-finite entries")
    flops = FlopCounter()
    merges = []
    merge_ids = itertools.count()
    lam, Q = _solve_rec(T, cfg, flops, merges, merge_ids)
    return EigenResult(lam=lam, Q=Q, merges=merges, flops=flops)


def _solve_rec(T, cfg, flops, merges, merge_ids):
    n = T.n
    if n <= cfg.base_size:
        res = base_case_eig(T)
        return res.lam, res.Q

    ksplit = n // 2
    T1, T2, rho, theta = split(T, ksplit)
    L1, Q1 = _solve_rec(T1, cfg, flops, merges, merge_ids)
    L2, Q2 = _solve_rec(T2, cfg, flops, merges, merge_ids)
    mid = next(merge_ids)

    if rho == 0.0:
        # exactly decoupled: interleave the two sorted spectra
        d = np.concatenate([L1, L2])
        order = np.argsort(d, kind="stable")
        Q = np.zeros((n, n))
        Q[:ksplit, :ksplit] = Q1
        Q[ksplit:, ksplit:] = Q2
        return d[order], Q[:, order]

    d, z, rho_eff, perm = merge(Q1, L1, Q2, L2, rho, theta)
    out = deflate(d, z, rho_eff)
    k = out.kept.size
    record = MergeRecord(size=n, kept=k, n_deflated=out.n_deflated)
    merges.append(record)
    flops_before = flops.as_dict()

    Qblk = np.zeros((n, n))
    Qblk[:ksplit, :ksplit] = Q1
    Qblk[ksplit:, ksplit:] = Q2
    for i, j, c, s in out.rotations:
        a, b = perm[i], perm[j]
        ca = Qblk[:, a].copy()
        cb = Qblk[:, b].copy()
        Qblk[:, a] = c * ca + s * cb
        Qblk[:, b] = -s * ca + c * cb

    cols_kept = perm[out.permutation[:k]]
    cols_defl = perm[out.permutation[k:]]
    lam_defl = np.array([v for _, v in out.deflated_eigenvalues])

    if k > 0:
        sys = out.kept
        sol = solve_secular(sys, flops=flops)
        recompute_weights(sys.d, sol, sys.z, rho=rho_eff, flops=flops)
        C = CauchyEvecMatrix.from_secular(sys, sol, flops=flops)
        Qk = np.ascontiguousarray(Qblk[:, cols_kept])
        if cfg.method == "adc-rand" and k > cfg.hss_threshold:
            Qk = update_vectors_hss(Qk, C, cfg, seed=[cfg.seed, mid], flops=flops,
                                    record=record)
        else:
            Qk = update_vectors_dense(Qk, C.to_dense(flops=flops, phase="update_dense"),
                                      flops=flops)
        lam_k = sol.lam
    else:
        Qk = np.zeros((n, 0))
        lam_k = np.zeros(0)

    record.flops = {p: v - flops_before[p] for p, v in flops.as_dict().items()}
    lam_cat = np.concatenate([lam_k, lam_defl])
    Q_cat = np.hstack([Qk, Qblk[:, cols_defl]])
    order = np.argsort(lam_cat, kind="stable")
    return lam_cat[order], np.ascontiguousarray(Q_cat[:, order])
