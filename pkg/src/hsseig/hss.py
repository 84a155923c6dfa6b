"""Hierarchically semiseparable approximation of the merge eigenvector matrix.

A postordered full binary tree partitions the index range; each node carries
generators (D on leaves, interpolation factors U/V, skeleton blocks B) such
that every off-diagonal block is represented through nested low-rank
factors.  Construction is randomized: the matrix is sampled with one
Gaussian block, and interpolative decompositions of the compressed block
rows/columns pick real rows and columns of the matrix as skeletons, so D
and B are re-evaluated directly from the Cauchy-like generators.
"""
import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .flops import cpqr_flops, gemm_flops

DIST_SHIFT_THRESHOLD = 1e-10   # boundary gap below which the split is moved
MAX_BOUNDARY_SHIFT = 5
DEFAULT_RANK_CAP = 100
DEFAULT_ID_TOL = 1e-15
DENSE_BOUND = 4096


@dataclass(frozen=True)
class HssPartition:
    """Contiguous leaf ranges covering 0..k; the leaf count is a power of two."""

    ranges: tuple
    leaf_size: int
    depth: int

    @property
    def k(self):
        return self.ranges[-1][1]

    @property
    def n_leaves(self):
        return len(self.ranges)

    @property
    def min_leaf(self):
        return min(hi - lo for lo, hi in self.ranges)


def build_partition(k, m, d=None, gamma=None, mu=None):
    """Near-equal leaf ranges; clustered boundaries move by up to 5 slots.

    The number of leaves is the smallest power of two covering k/m.  When
    gap data is supplied and the pole interval distance at a boundary
    (mu at the last index of the left leaf) falls under 1e-10, the boundary
    slides within +-5 positions to the widest local gap.
    """
    if k < 2 * m:
        raise ValueError(f"order {k} below twice the leaf size {m}")
    n_leaves = 1
    while n_leaves * m < k:
        n_leaves *= 2
    base, extra = divmod(k, n_leaves)
    sizes = [base + 1] * extra + [base] * (n_leaves - extra)
    starts = np.concatenate([[0], np.cumsum(sizes)])

    if mu is not None and n_leaves > 1:
        starts = starts.copy()
        for b in range(1, n_leaves):
            s = starts[b]
            if mu[s - 1] >= DIST_SHIFT_THRESHOLD:
                continue
            lo = max(starts[b - 1] + 1, s - MAX_BOUNDARY_SHIFT)
            hi = min(starts[b + 1] - 1, s + MAX_BOUNDARY_SHIFT)
            cand = np.arange(lo, hi + 1)
            best = float(mu[cand - 1].max())
            if best > mu[s - 1]:  # keep the even split unless a shift helps
                starts[b] = cand[np.argmax(mu[cand - 1])]

    ranges = tuple((int(starts[i]), int(starts[i + 1])) for i in range(n_leaves))
    return HssPartition(ranges=ranges, leaf_size=m, depth=int(math.log2(n_leaves)))


def rank_bound(R, eps):
    """Terms needed for a sum-of-exponentials fit of 1/x on [1, R] to error eps."""
    return int(math.ceil(math.log(16.0 / eps) * math.log(8.0 * R) / math.pi**2))


def estimate_rank(partition, d, gamma, mu, eps=1e-16, cap=DEFAULT_RANK_CAP):
    """Off-diagonal rank estimate from the pole distribution.

    For each pair of neighbouring leaf segments the ratio of the total
    spectrum span to the boundary gap bounds the argument range of 1/x;
    the largest resulting term count is the estimate, capped at `cap`.
    Returns 0 for a degenerate single-leaf partition (dense fallback).
    """
    if partition.n_leaves < 2:
        return 0
    span = (d[-1] + gamma[-1]) - d[0]
    r = 0
    for lo, _ in partition.ranges[1:]:
        dist = mu[lo - 1]
        R = max(span / dist, 1.0)
        r = max(r, rank_bound(R, eps))
    return min(max(r, 1), cap)


def interpolative_decomp(M, tol, max_rank):
    """Row interpolative decomposition M ~= X @ M[J, :].

    X carries an identity on the selected rows J; the selection comes from
    a column-pivoted QR of M^T truncated once the trailing Frobenius mass
    drops below tol * ||M||_F, or at max_rank.
    """
    X, J, _, _ = _interp_rows(M, tol, max_rank)
    return X, J


FLAG_TOL = 1e-12   # trailing-direction mass that marks a rank-starved sample


def _interp_rows(M, tol, max_rank):
    """Row ID with residual estimate and a saturation signal.

    A sampled block always has rank at most the sample width, so its
    residual at full width is exactly zero; the only observable sign of an
    undersized sample is that the tolerance rule consumes every available
    direction while the last one still carries significant mass.  That is
    what `saturated` reports.
    """
    p = M.shape[0]
    normf = float(np.linalg.norm(M, "fro"))
    if normf == 0.0 or p == 0 or M.shape[1] == 0 or max_rank == 0:
        return np.zeros((p, 0)), np.zeros(0, dtype=np.intp), 0.0, False
    _, R, piv = scipy.linalg.qr(M.T, mode="economic", pivoting=True)
    row_sq = (R * R).sum(axis=1)
    tail = np.concatenate([np.cumsum(row_sq[::-1])[::-1], [0.0]])
    cutoff = (tol * normf) ** 2
    wanted = int(np.searchsorted(-tail, -cutoff))
    r = min(wanted, max_rank, int(np.count_nonzero(np.abs(np.diag(R)) > 0.0)))
    saturated = bool(
        wanted >= max_rank
        and math.sqrt(max(tail[max_rank - 1], 0.0)) > FLAG_TOL * normf
    )
    resid = math.sqrt(max(tail[r], 0.0)) / normf
    T = scipy.linalg.solve_triangular(R[:r, :r], R[:r, r:])
    X = np.zeros((p, r))
    X[piv[:r], :] = np.eye(r)
    X[piv[r:], :] = T.T
    return X, piv[:r].astype(np.intp), resid, saturated


class HssNode:
    __slots__ = (
        "index", "level", "lo", "hi", "left", "right", "parent", "sibling",
        "D", "U", "V", "B", "rows_sel", "cols_sel", "rows_local", "cols_local",
        "row_resid", "col_resid",
    )

    def __init__(self, index, level, lo, hi):
        self.index = index
        self.level = level
        self.lo = lo
        self.hi = hi
        self.left = self.right = self.parent = self.sibling = -1
        self.D = self.U = self.V = self.B = None
        self.rows_sel = self.cols_sel = None
        self.rows_local = self.cols_local = None
        self.row_resid = self.col_resid = 0.0

    @property
    def is_leaf(self):
        return self.left < 0


@dataclass
class HssTree:
    nodes: list
    root: int
    partition: HssPartition
    k: int
    r_used: int = 0
    flagged: bool = False
    flags: list = field(default_factory=list)
    seed: object = None

    def levels(self):
        """Node indices grouped by level, root level first."""
        depth = max(n.level for n in self.nodes)
        by = [[] for _ in range(depth + 1)]
        for n in self.nodes:
            by[n.level].append(n.index)
        return by


def _build_skeleton(partition):
    nodes = []

    def rec(lo_leaf, hi_leaf, level):
        if hi_leaf - lo_leaf == 1:
            lo, hi = partition.ranges[lo_leaf]
            nodes.append(HssNode(len(nodes), level, lo, hi))
            return len(nodes) - 1
        mid = (lo_leaf + hi_leaf) // 2
        li = rec(lo_leaf, mid, level + 1)
        ri = rec(mid, hi_leaf, level + 1)
        node = HssNode(len(nodes), level, nodes[li].lo, nodes[ri].hi)
        node.left, node.right = li, ri
        nodes.append(node)
        idx = len(nodes) - 1
        nodes[li].parent = nodes[ri].parent = idx
        nodes[li].sibling, nodes[ri].sibling = ri, li
        return idx

    root = rec(0, partition.n_leaves, 0)
    return nodes, root


def rand_hss_construct(A, partition, r, p=10, seed=0, id_tol=DEFAULT_ID_TOL, flops=None):
    """Randomized bottom-up HSS construction from a single Gaussian sample.

    One k x (r+p) sample block serves both the row side (Y = A @ Omega) and
    the column side (Z = A^T @ Omega).  Leaves compress their block row and
    column after subtracting the diagonal part; parents stack the selected
    rows of their children minus the sibling skeleton contribution, so each
    interpolative decomposition sees only an O(r) x (r+p) matrix.  If any
    decomposition stops at the sample width with residual above id_tol the
    tree is flagged and the caller decides what to do.
    """
    if partition.n_leaves < 2:
        raise ValueError("need at least two leaves; use the dense path instead")
    if r < 1 or p < 0:
        raise ValueError("need rank estimate >= 1 and oversampling >= 0")
    w = r + p
    if w > partition.min_leaf:
        raise ValueError(f"sample width {w} exceeds smallest leaf {partition.min_leaf}")

    rng = np.random.default_rng(seed)
    Omega = rng.standard_normal((A.k, w))
    Y = A.multiply(Omega, flops=flops)
    Z = A.transpose_multiply(Omega, flops=flops)

    nodes, root = _build_skeleton(partition)
    tree = HssTree(nodes=nodes, root=root, partition=partition, k=A.k, seed=seed)
    phi_sel = {}
    theta_sel = {}
    yhat = {}
    zhat = {}

    def run_id(Mat, kind, node):
        X, sel, resid, saturated = _interp_rows(Mat, id_tol, w)
        if flops is not None:
            flops.hss_construct += cpqr_flops(Mat.shape[1], Mat.shape[0], max(X.shape[1], 1))
        if saturated:
            tree.flagged = True
            tree.flags.append((node.index, kind, float(resid)))
        return X, sel, resid

    order = [n.index for n in nodes if n.index != root]
    order.sort(key=lambda i: -nodes[i].level)
    for idx in order:
        node = nodes[idx]
        if node.is_leaf:
            t = np.arange(node.lo, node.hi)
            node.D = A.block(t, t, flops=flops)
            Om = Omega[node.lo:node.hi]
            Phi = Y[node.lo:node.hi] - node.D @ Om
            Theta = Z[node.lo:node.hi] - node.D.T @ Om
            if flops is not None:
                flops.hss_construct += 2 * gemm_flops(t.size, t.size, w)
            node.U, rl, node.row_resid = run_id(Phi, "row", node)
            node.V, cl, node.col_resid = run_id(Theta, "col", node)
            node.rows_local, node.cols_local = rl, cl
            node.rows_sel = node.lo + rl
            node.cols_sel = node.lo + cl
            phi_sel[idx] = Phi[rl]
            theta_sel[idx] = Theta[cl]
            yhat[idx] = node.V.T @ Om
            zhat[idx] = node.U.T @ Om
        else:
            l, rg = nodes[node.left], nodes[node.right]
            l.B = A.block(l.rows_sel, rg.cols_sel, flops=flops)
            rg.B = A.block(rg.rows_sel, l.cols_sel, flops=flops)
            Phi = np.vstack([phi_sel[l.index] - l.B @ yhat[rg.index],
                             phi_sel[rg.index] - rg.B @ yhat[l.index]])
            Theta = np.vstack([theta_sel[l.index] - rg.B.T @ zhat[rg.index],
                               theta_sel[rg.index] - l.B.T @ zhat[l.index]])
            if flops is not None:
                flops.hss_construct += 2 * gemm_flops(Phi.shape[0], w, max(l.B.shape))
            node.U, rl, node.row_resid = run_id(Phi, "row", node)
            node.V, cl, node.col_resid = run_id(Theta, "col", node)
            node.rows_local, node.cols_local = rl, cl
            node.rows_sel = np.concatenate([l.rows_sel, rg.rows_sel])[rl]
            node.cols_sel = np.concatenate([l.cols_sel, rg.cols_sel])[cl]
            phi_sel[idx] = Phi[rl]
            theta_sel[idx] = Theta[cl]
            yhat[idx] = node.V.T @ np.vstack([yhat[l.index], yhat[rg.index]])
            zhat[idx] = node.U.T @ np.vstack([zhat[l.index], zhat[rg.index]])

    rn = nodes[root]
    l, rg = nodes[rn.left], nodes[rn.right]
    l.B = A.block(l.rows_sel, rg.cols_sel, flops=flops)
    rg.B = A.block(rg.rows_sel, l.cols_sel, flops=flops)

    ranks = [n.U.shape[1] for n in nodes if n.U is not None]
    ranks += [n.V.shape[1] for n in nodes if n.V is not None]
    tree.r_used = max(ranks) if ranks else 0
    return tree


def hss_matmul_right(X, H, flops=None):
    """Structured product X @ H for a row-block X of width H.k.

    Upsweep folds X into the nested row bases (G per node), the downsweep
    pushes sibling skeleton products back down through the column bases,
    and the leaves finish with their dense diagonal blocks.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != H.k:
        raise ValueError(f"X has {X.shape[1]} columns, tree order is {H.k}")
    P = X.shape[0]
    nodes = H.nodes
    levels = H.levels()
    depth = len(levels) - 1

    G = {}
    for lev in range(depth, 0, -1):
        for idx in levels[lev]:
            node = nodes[idx]
            if node.is_leaf:
                G[idx] = X[:, node.lo:node.hi] @ node.U
                if flops is not None:
                    flops.hss_mult += gemm_flops(P, node.hi - node.lo, node.U.shape[1])
            else:
                stacked = np.hstack([G[node.left], G[node.right]])
                G[idx] = stacked @ node.U
                if flops is not None:
                    flops.hss_mult += gemm_flops(P, stacked.shape[1], node.U.shape[1])

    out = np.empty_like(X)
    inherit = {}
    for lev in range(1, depth + 1):
        for idx in levels[lev]:
            node = nodes[idx]
            sib = nodes[node.sibling]
            F = G[node.sibling] @ sib.B
            if flops is not None:
                flops.hss_mult += gemm_flops(P, sib.B.shape[0], sib.B.shape[1])
            if idx in inherit:
                F = F + inherit.pop(idx)
            if node.is_leaf:
                out[:, node.lo:node.hi] = X[:, node.lo:node.hi] @ node.D + F @ node.V.T
                if flops is not None:
                    ni = node.hi - node.lo
                    flops.hss_mult += gemm_flops(P, ni, ni) + gemm_flops(P, F.shape[1], ni)
            else:
                down = F @ node.V.T
                if flops is not None:
                    flops.hss_mult += gemm_flops(P, F.shape[1], node.V.shape[0])
                cl = nodes[node.left].V.shape[1]
                inherit[node.left] = down[:, :cl]
                inherit[node.right] = down[:, cl:]
    return out


def _hier_bases(H):
    Uh, Vh = {}, {}
    for node in H.nodes:
        if node.index == H.root:
            continue
        if node.is_leaf:
            Uh[node.index] = node.U
            Vh[node.index] = node.V
        else:
            l, r = node.left, node.right
            Uh[node.index] = scipy.linalg.block_diag(Uh[l], Uh[r]) @ node.U
            Vh[node.index] = scipy.linalg.block_diag(Vh[l], Vh[r]) @ node.V
    return Uh, Vh


def hss_to_dense(H, bound=DENSE_BOUND):
    """Recursive dense reconstruction (testing utility)."""
    if H.k > bound:
        raise ValueError(f"order {H.k} above the dense reconstruction bound {bound}")
    Uh, Vh = _hier_bases(H)
    dense = {}
    for node in H.nodes:
        if node.is_leaf:
            dense[node.index] = node.D
        else:
            l, r = H.nodes[node.left], H.nodes[node.right]
            upper = Uh[l.index] @ l.B @ Vh[r.index].T
            lower = Uh[r.index] @ r.B @ Vh[l.index].T
            dense[node.index] = np.block([[dense[l.index], upper],
                                          [lower, dense[r.index]]])
    return dense[H.root]


def audit_tree(H):
    """Assert the structural invariants; raises AssertionError with context."""
    nodes = H.nodes
    root = nodes[H.root]
    assert H.root == len(nodes) - 1, "root must be last in postorder"
    leaves = []
    for node in nodes:
        if not node.is_leaf:
            l, r = nodes[node.left], nodes[node.right]
            assert node.left < node.right < node.index, f"postorder violated at {node.index}"
            assert l.parent == node.index and r.parent == node.index
            assert l.sibling == node.right and r.sibling == node.left
            assert (l.lo, r.hi) == (node.lo, node.hi) and l.hi == r.lo, \
                f"children ranges must tile node {node.index}"
            assert l.level == r.level == node.level + 1
        else:
            leaves.append(node)
    leaves.sort(key=lambda n: n.lo)
    assert leaves[0].lo == 0 and leaves[-1].hi == H.k
    for a, b in zip(leaves, leaves[1:]):
        assert a.hi == b.lo, "leaf ranges must be contiguous"
    assert (root.lo, root.hi) == (0, H.k)
    for node in nodes:
        if node.U is not None:
            r = node.U.shape[1]
            assert np.array_equal(node.U[node.rows_local], np.eye(r)), \
                f"U of node {node.index} lost its identity submatrix"
        if node.V is not None:
            c = node.V.shape[1]
            assert np.array_equal(node.V[node.cols_local], np.eye(c)), \
                f"V of node {node.index} lost its identity submatrix"
        if node.rows_sel is not None and node.rows_sel.size:
            assert node.lo <= node.rows_sel.min() and node.rows_sel.max() < node.hi
        if node.cols_sel is not None and node.cols_sel.size:
            assert node.lo <= node.cols_sel.min() and node.cols_sel.max() < node.hi


def dump_tree_csv(H, path):
    """Debug dump: one row per node with ranges, ranks, and residual flags."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["node", "level", "lo", "hi", "row_rank", "col_rank",
                     "row_resid", "col_resid", "flagged"])
        flagged = {i for i, _, _ in H.flags}
        for node in H.nodes:
            wr.writerow([
                node.index, node.level, node.lo, node.hi,
                node.U.shape[1] if node.U is not None else "",
                node.V.shape[1] if node.V is not None else "",
                repr(node.row_resid), repr(node.col_resid),
                int(node.index in flagged),
            ])
