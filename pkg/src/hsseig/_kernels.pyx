# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels.

Semantics mirror hsseig._kernels_py exactly; keep the two in sync.
"""
import numpy as np

from libc.math cimport fabs, sqrt, hypot, copysign

cdef double EPS = 2.220446049250313e-16
cdef int MAX_SECULAR_ITERS = 60
cdef int MAX_BISECT_ITERS = 200


# ---------------------------------------------------------------------------
# secular equation
# ---------------------------------------------------------------------------

cdef double _eta_interior(double a, double b, double c) except? -1e308:
    cdef double disc = a * a - 4.0 * b * c
    cdef double sq, den
    if disc < 0.0:
        disc = 0.0
    sq = sqrt(disc)
    if c == 0.0:
        if a != 0.0:
            return b / a
        return -1e308
    if a <= 0.0:
        return (a - sq) / (2.0 * c)
    den = a + sq
    if den != 0.0:
        return 2.0 * b / den
    return -1e308


cdef double _eta_last(double a, double b, double c) except? -1e308:
    cdef double disc = a * a - 4.0 * b * c
    cdef double sq, den
    if disc < 0.0:
        disc = 0.0
    sq = sqrt(disc)
    if a >= 0.0:
        if c != 0.0:
            return (a + sq) / (2.0 * c)
        return -1e308
    den = a - sq
    if den != 0.0:
        return 2.0 * b / den
    return -1e308


cdef int _solve_one_root(double[::1] d, double[::1] z2, double rho, int i,
                         double sumz2, double[::1] ds,
                         double* orig_out, double* x_out) :
    """Returns the iteration count; fills origin index (via ds) and root x."""
    cdef int k = d.shape[0]
    cdef bint last = i == k - 1
    cdef int orig, j, it, jlo, jhi
    cdef double delta, fmid, lo, hi, x, dxj, t
    cdef double psi, phi, psip, phip, asum, f, di, di1, a, b, c, eta, xn

    if last:
        orig = k - 1
        for j in range(k):
            ds[j] = d[j] - d[orig]
        lo = 0.0
        hi = rho * sumz2
        jlo = k - 2
        jhi = k - 1
    else:
        delta = d[i + 1] - d[i]
        fmid = 1.0
        for j in range(k):
            fmid += rho * z2[j] / ((d[j] - d[i]) - 0.5 * delta)
        if fmid > 0.0:
            orig = i
            lo = 0.0
            hi = 0.5 * delta
        else:
            orig = i + 1
            lo = -0.5 * delta
            hi = 0.0
        for j in range(k):
            ds[j] = d[j] - d[orig]
        jlo = i
        jhi = i + 1

    x = 0.5 * (lo + hi)
    it = 0
    cdef bint converged = False
    cdef int step
    for step in range(MAX_SECULAR_ITERS):
        it += 1
        psi = 0.0
        phi = 0.0
        psip = 0.0
        phip = 0.0
        asum = 0.0
        if last:
            for j in range(k - 1):
                dxj = ds[j] - x
                t = z2[j] / dxj
                psi += t
                psip += t / dxj
                asum += fabs(t)
            dxj = ds[k - 1] - x
            t = z2[k - 1] / dxj
            phi = t
            phip = t / dxj
            asum += fabs(t)
        else:
            for j in range(i + 1):
                dxj = ds[j] - x
                t = z2[j] / dxj
                psi += t
                psip += t / dxj
                asum += fabs(t)
            for j in range(i + 1, k):
                dxj = ds[j] - x
                t = z2[j] / dxj
                phi += t
                phip += t / dxj
                asum += fabs(t)
        psi *= rho
        phi *= rho
        psip *= rho
        phip *= rho
        asum *= rho
        f = 1.0 + psi + phi
        if f > 0.0:
            hi = x
        else:
            lo = x
        if fabs(f) <= EPS * (1.0 + 8.0 * asum):
            converged = True
            break
        di = ds[jlo] - x
        di1 = ds[jhi] - x
        a = (di + di1) * f - di * di1 * (psip + phip)
        b = di * di1 * f
        c = f - di * psip - di1 * phip
        if last:
            eta = _eta_last(a, b, c)
        else:
            eta = _eta_interior(a, b, c)
        if eta == -1e308:
            xn = 0.5 * (lo + hi)
        else:
            xn = x + eta
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if xn == x:
            converged = True
            break
        x = xn

    if not converged:
        for step in range(MAX_BISECT_ITERS):
            it += 1
            x = 0.5 * (lo + hi)
            if x <= lo or x >= hi:
                break
            f = 1.0
            for j in range(k):
                f += rho * z2[j] / (ds[j] - x)
            if f > 0.0:
                hi = x
            else:
                lo = x
        x = 0.5 * (lo + hi)

    orig_out[0] = <double> orig
    x_out[0] = x
    return it


def secular_all(d_in, z_in, double rho):
    """All k roots of the secular equation of diag(d) + rho*z*z^T.

    Returns (lam, gamma, mu, iters); see the fallback module for the
    contract.
    """
    d_arr = np.ascontiguousarray(d_in, dtype=np.float64)
    z_arr = np.ascontiguousarray(z_in, dtype=np.float64)
    cdef double[::1] d = d_arr
    cdef double[::1] z = z_arr
    cdef int k = d.shape[0]
    cdef int i, j
    z2_arr = np.empty(k)
    cdef double[::1] z2 = z2_arr
    cdef double sumz2 = 0.0
    for j in range(k):
        z2[j] = z[j] * z[j]
        sumz2 += z2[j]

    lam_arr = np.empty(k)
    gam_arr = np.empty(k)
    mu_arr = np.empty(k)
    cdef double[::1] lam = lam_arr
    cdef double[::1] gam = gam_arr
    cdef double[::1] mu = mu_arr
    cdef long total = 0
    cdef double g

    if k == 1:
        g = rho * sumz2
        lam[0] = d[0] + g
        gam[0] = g
        mu[0] = 0.0
        return lam_arr, gam_arr, mu_arr, 1

    scratch_arr = np.empty(k)
    cdef double[::1] ds = scratch_arr
    cdef double origf, x, delta
    cdef int orig

    for i in range(k - 1):
        total += _solve_one_root(d, z2, rho, i, sumz2, ds, &origf, &x)
        orig = <int> origf
        delta = d[i + 1] - d[i]
        if orig == i:
            gam[i] = x
            mu[i] = delta - x
        else:
            gam[i] = delta + x
            mu[i] = -x
        lam[i] = d[orig] + x

    total += _solve_one_root(d, z2, rho, k - 1, sumz2, ds, &origf, &x)
    gam[k - 1] = x
    mu[k - 1] = rho * sumz2 - x
    lam[k - 1] = d[k - 1] + x
    return lam_arr, gam_arr, mu_arr, total


# ---------------------------------------------------------------------------
# two-sided Jacobi
# ---------------------------------------------------------------------------

cdef double _off_fro_c(double[:, ::1] A):
    cdef int n = A.shape[0]
    cdef int i, j
    cdef double s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += A[i, j] * A[i, j]
    return sqrt(s)


def jacobi_run(double[:, ::1] A, double[:, ::1] V, double off_target, int max_sweeps):
    """Row-cyclic Jacobi diagonalization in place; rotations accumulate in V."""
    cdef int n = A.shape[0]
    cdef int sweep, p, q, r
    cdef double apq, tau, sgn, t, c, s, xp, xq
    if n < 2 or _off_fro_c(A) <= off_target:
        return 0
    for sweep in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                sgn = 1.0 if tau >= 0.0 else -1.0
                t = sgn / (fabs(tau) + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for r in range(n):
                    xp = A[r, p]
                    xq = A[r, q]
                    A[r, p] = c * xp - s * xq
                    A[r, q] = s * xp + c * xq
                for r in range(n):
                    xp = A[p, r]
                    xq = A[q, r]
                    A[p, r] = c * xp - s * xq
                    A[q, r] = s * xp + c * xq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for r in range(n):
                    xp = V[r, p]
                    xq = V[r, q]
                    V[r, p] = c * xp - s * xq
                    V[r, q] = s * xp + c * xq
        if _off_fro_c(A) <= off_target:
            return sweep
    return -1


# ---------------------------------------------------------------------------
# one-sided Jacobi
# ---------------------------------------------------------------------------

def onesided_orthogonalize(double[:, ::1] M, int max_sweeps):
    """Rotate row pairs of M in place until mutually orthogonal."""
    cdef int nvec = M.shape[0]
    cdef int veclen = M.shape[1]
    cdef int sweep, p, q, r
    cdef long rotated
    cdef double tol, floor, mx, app, aqq, apq, tau, sgn, t, c, s, xp, xq
    if nvec < 2:
        return 0
    tol = sqrt(<double> veclen) * EPS
    for sweep in range(1, max_sweeps + 1):
        rotated = 0
        mx = 0.0
        for p in range(nvec):
            app = 0.0
            for r in range(veclen):
                app += M[p, r] * M[p, r]
            if app > mx:
                mx = app
        floor = EPS * EPS * mx
        for p in range(nvec - 1):
            for q in range(p + 1, nvec):
                app = 0.0
                aqq = 0.0
                apq = 0.0
                for r in range(veclen):
                    xp = M[p, r]
                    xq = M[q, r]
                    app += xp * xp
                    aqq += xq * xq
                    apq += xp * xq
                if fabs(apq) <= tol * sqrt(app * aqq):
                    continue
                # both rows at the eps*||M|| floor: cannot affect resolvable values
                if app <= floor and aqq <= floor:
                    continue
                rotated += 1
                tau = (aqq - app) / (2.0 * apq)
                sgn = 1.0 if tau >= 0.0 else -1.0
                t = sgn / (fabs(tau) + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for r in range(veclen):
                    xp = M[p, r]
                    xq = M[q, r]
                    M[p, r] = c * xp - s * xq
                    M[q, r] = s * xp + c * xq
        if rotated == 0:
            return sweep
    return -1


# ---------------------------------------------------------------------------
# implicit-shift QL for small tridiagonals
# ---------------------------------------------------------------------------

def tql2(double[::1] d, double[::1] e, double[:, ::1] Z, int max_iter=30):
    """Implicit QL with Wilkinson shift; see the fallback module."""
    cdef int n = d.shape[0]
    cdef int l, m, i, it, rr
    cdef double dd, g, r, s, c, p, f, b, zi, zi1
    cdef bint clean
    if n == 1:
        return 0
    ee_arr = np.zeros(n)
    cdef double[::1] ee = ee_arr
    for i in range(n - 1):
        ee[i] = e[i]
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(ee[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                return 1 + l
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + copysign(r, g))
            s = 1.0
            c = 1.0
            p = 0.0
            clean = True
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = hypot(f, g)
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
                for rr in range(n):
                    zi = Z[rr, i]
                    zi1 = Z[rr, i + 1]
                    Z[rr, i + 1] = s * zi + c * zi1
                    Z[rr, i] = c * zi - s * zi1
            if clean:
                d[l] -= p
                ee[l] = g
                ee[m] = 0.0
    return 0
