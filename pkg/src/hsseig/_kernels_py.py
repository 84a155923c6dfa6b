"""Pure-NumPy fallback implementations of the hot kernels.

The compiled extension ``hsseig._kernels`` provides the same four entry
points with identical signatures and semantics; ``hsseig.backend`` picks
whichever is available.  Keep the two modules in sync.
"""
import numpy as np

EPS = float(np.finfo(np.float64).eps)

# Secular-equation iteration caps: rational-interpolant steps, then bisection.
MAX_SECULAR_ITERS = 60
MAX_BISECT_ITERS = 200


# ---------------------------------------------------------------------------
# secular equation
# ---------------------------------------------------------------------------

def _eta_interior(a, b, c):
    """Stable root of c*eta^2 - a*eta + b = 0 for an interior secular root."""
    disc = a * a - 4.0 * b * c
    if disc < 0.0:
        disc = 0.0
    sq = np.sqrt(disc)
    if c == 0.0:
        return b / a if a != 0.0 else None
    if a <= 0.0:
        return (a - sq) / (2.0 * c)
    den = a + sq
    return 2.0 * b / den if den != 0.0 else None


def _eta_last(a, b, c):
    """Stable root selection for the rightmost secular root."""
    disc = a * a - 4.0 * b * c
    if disc < 0.0:
        disc = 0.0
    sq = np.sqrt(disc)
    if a >= 0.0:
        return (a + sq) / (2.0 * c) if c != 0.0 else None
    den = a - sq
    return 2.0 * b / den if den != 0.0 else None


def _solve_one_root(d, z2, rho, i, sumz2):
    """Root of 1 + rho*sum(z2/(d - lam)) in (d[i], d[i+1]) (or above d[k-1]).

    Works in a coordinate shifted to the nearer pole so the gap pair
    (lam - d[i], d[i+1] - lam) comes out without cancellation.
    Returns (origin_index, x, lo, hi, iters) with lam = d[origin] + x.
    """
    k = d.shape[0]
    last = i == k - 1
    if last:
        orig = k - 1
        ds = d - d[orig]
        lo, hi = 0.0, rho * sumz2
        jlo, jhi = k - 2, k - 1  # poles of the rational model
    else:
        delta = d[i + 1] - d[i]
        dsl = d - d[i]
        fmid = 1.0 + rho * np.sum(z2 / (dsl - 0.5 * delta))
        if fmid > 0.0:  # root in the left half, nearer d[i]
            orig = i
            ds = dsl
            lo, hi = 0.0, 0.5 * delta
        else:
            orig = i + 1
            ds = d - d[i + 1]
            lo, hi = -0.5 * delta, 0.0
        jlo, jhi = i, i + 1

    x = 0.5 * (lo + hi)
    iters = 0
    converged = False
    for _ in range(MAX_SECULAR_ITERS):
        iters += 1
        dx = ds - x
        inv = z2 / dx
        inv2 = inv / dx
        if last:
            psi = rho * np.sum(inv[: k - 1])
            phi = rho * inv[k - 1]
            psip = rho * np.sum(inv2[: k - 1])
            phip = rho * inv2[k - 1]
            asum = rho * np.sum(np.abs(inv))
        else:
            psi = rho * np.sum(inv[: i + 1])
            phi = rho * np.sum(inv[i + 1:])
            psip = rho * np.sum(inv2[: i + 1])
            phip = rho * np.sum(inv2[i + 1:])
            asum = rho * (np.sum(np.abs(inv[: i + 1])) + np.sum(np.abs(inv[i + 1:])))
        f = 1.0 + psi + phi
        if f > 0.0:
            hi = x
        else:
            lo = x
        # stop at the evaluation-noise floor of f
        if abs(f) <= EPS * (1.0 + 8.0 * asum):
            converged = True
            break
        di, di1 = dx[jlo], dx[jhi]
        a = (di + di1) * f - di * di1 * (psip + phip)
        b = di * di1 * f
        c = f - di * psip - di1 * phip
        eta = _eta_last(a, b, c) if last else _eta_interior(a, b, c)
        xn = x + eta if eta is not None else 0.5 * (lo + hi)
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x:
            converged = True
            break
        x = xn

    if not converged:
        for _ in range(MAX_BISECT_ITERS):
            iters += 1
            x = 0.5 * (lo + hi)
            if x <= lo or x >= hi:
                break
            f = 1.0 + rho * np.sum(z2 / (ds - x))
            if f > 0.0:
                hi = x
            else:
                lo = x
        x = 0.5 * (lo + hi)
    return orig, x, iters


def secular_all(d, z, rho):
    """All k roots of the secular equation of diag(d) + rho*z*z^T.

    Parameters are the post-deflation system: d strictly ascending, z with
    no zero entries, rho > 0.  Returns (lam, gamma, mu, iters) where
    gamma[i] = lam[i] - d[i] > 0, mu[i] = d[i+1] - lam[i] > 0 with the
    virtual pole d[k] = d[k-1] + rho*sum(z^2) closing the last interval.
    """
    d = np.ascontiguousarray(d, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    k = d.shape[0]
    z2 = z * z
    sumz2 = float(z2.sum())
    lam = np.empty(k)
    gamma = np.empty(k)
    mu = np.empty(k)
    total = 0
    if k == 1:
        g = rho * sumz2
        lam[0] = d[0] + g
        gamma[0] = g
        mu[0] = 0.0
        return lam, gamma, mu, 1

    for i in range(k - 1):
        orig, x, it = _solve_one_root(d, z2, rho, i, sumz2)
        total += it
        delta = d[i + 1] - d[i]
        if orig == i:
            gamma[i] = x
            mu[i] = delta - x
        else:
            gamma[i] = delta + x
            mu[i] = -x
        lam[i] = d[orig] + x

    orig, x, it = _solve_one_root(d, z2, rho, k - 1, sumz2)
    total += it
    gamma[k - 1] = x
    mu[k - 1] = rho * sumz2 - x
    lam[k - 1] = d[k - 1] + x
    return lam, gamma, mu, total


# ---------------------------------------------------------------------------
# two-sided Jacobi (round-robin parallel ordering)
# ---------------------------------------------------------------------------

_rr_cache = {}


def _round_robin(n):
    """Disjoint pair rounds covering all index pairs of 0..n-1 once."""
    if n in _rr_cache:
        return _rr_cache[n]
    m = n if n % 2 == 0 else n + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for t in range(m // 2):
            a, b = players[t], players[m - 1 - t]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.asarray(ps, dtype=np.intp), np.asarray(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    _rr_cache[n] = rounds
    return rounds


def _rotation_cs(app, aqq, apq):
    tau = (aqq - app) / (2.0 * apq)
    sgn = np.where(tau >= 0.0, 1.0, -1.0)
    t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    return c, t * c


def _off_fro(A):
    # summed directly off the diagonal; total-minus-diagonal cancels badly
    B = A.copy()
    np.fill_diagonal(B, 0.0)
    return float(np.linalg.norm(B, "fro"))


def jacobi_run(A, V, off_target, max_sweeps):
    """Diagonalize symmetric A in place, accumulating rotations into V.

    Sweeps disjoint-pair rounds until the off-diagonal Frobenius norm drops
    to off_target.  Returns the sweep count, or -1 if max_sweeps was hit.
    """
    n = A.shape[0]
    if n < 2 or _off_fro(A) <= off_target:
        return 0
    for sweep in range(1, max_sweeps + 1):
        for ps, qs in _round_robin(n):
            apq = A[ps, qs]
            mask = apq != 0.0
            if not mask.any():
                continue
            p = ps[mask]
            q = qs[mask]
            c, s = _rotation_cs(A[p, p], A[q, q], apq[mask])
            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = c * Ap - s * Aq
            A[:, q] = s * Ap + c * Aq
            Ap, Aq = A[p, :], A[q, :]
            cc, ss = c[:, None], s[:, None]
            A[p, :] = cc * Ap - ss * Aq
            A[q, :] = ss * Ap + cc * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = c * Vp - s * Vq
            V[:, q] = s * Vp + c * Vq
        if _off_fro(A) <= off_target:
            return sweep
    return -1


# ---------------------------------------------------------------------------
# one-sided Jacobi (column orthogonalization; implicit Gram matrix)
# ---------------------------------------------------------------------------

def onesided_orthogonalize(M, max_sweeps):
    """Rotate row pairs of M until mutually orthogonal (Hestenes sweep).

    Equivalent to Jacobi on M M^T without ever forming the Gram matrix, so
    small singular values survive at absolute accuracy ~eps*||M||.  Row
    norms of the result are the singular values.  The pair tolerance is
    sqrt(len)*eps relative, the usual one-sided Jacobi stopping level.
    Returns sweeps or -1.
    """
    q, veclen = M.shape
    if q < 2:
        return 0
    tol = np.sqrt(veclen) * EPS
    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        floor = (EPS * np.linalg.norm(M, axis=1).max()) ** 2
        for ps, qs in _round_robin(q):
            Mp, Mq = M[ps, :], M[qs, :]
            app = np.einsum("ij,ij->i", Mp, Mp)
            aqq = np.einsum("ij,ij->i", Mq, Mq)
            apq = np.einsum("ij,ij->i", Mp, Mq)
            mask = np.abs(apq) > tol * np.sqrt(app * aqq)
            # pairs entirely at the eps*||M|| floor cannot move any
            # singular value that floor resolves; skip them
            mask &= np.maximum(app, aqq) > floor
            if not mask.any():
                continue
            rotated += int(mask.sum())
            p = ps[mask]
            q_ = qs[mask]
            c, s = _rotation_cs(app[mask], aqq[mask], apq[mask])
            cc, ss = c[:, None], s[:, None]
            Mp, Mq = M[p, :], M[q_, :]
            M[p, :] = cc * Mp - ss * Mq
            M[q_, :] = ss * Mp + cc * Mq
        if rotated == 0:
            return sweep
    return -1


# ---------------------------------------------------------------------------
# implicit-shift QL for small tridiagonals
# ---------------------------------------------------------------------------

def tql2(d, e, Z, max_iter=30):
    """Implicit QL with Wilkinson shift on a tridiagonal (d, e).

    d (n,) and e (n-1,) are overwritten; rotations accumulate into the
    columns of Z (normally the identity).  Eigenvalues land in d unsorted.
    Returns 0 on success, or 1 + l if eigenvalue l failed to converge.
    """
    n = d.shape[0]
    if n == 1:
        return 0
    ee = np.zeros(n)
    ee[: n - 1] = e
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                return 1 + l
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = np.hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + np.copysign(r, g))
            s = c = 1.0
            p = 0.0
            clean = True
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = np.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    clean = False
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = Z[:, i].copy()
                zi1 = Z[:, i + 1].copy()
                Z[:, i + 1] = s * zi + c * zi1
                Z[:, i] = c * zi - s * zi1
            if clean:
                d[l] -= p
                ee[l] = g
                ee[m] = 0.0
    return 0
