"""Backend parity: the compiled kernels must match the NumPy fallback."""
import numpy as np
import pytest

from hsseig.backend import load_kernels

from conftest import random_system

kp = load_kernels("python")
try:
    kc = load_kernels("c")
except ImportError:
    kc = None

needs_c = pytest.mark.skipif(kc is None, reason="compiled kernels not built")

EPS = np.finfo(np.float64).eps


@needs_c
def test_secular_parity(rng):
    for k in (1, 2, 3, 17, 150):
        sys = random_system(rng, k)
        lc, gc, mc, ic = kc.secular_all(sys.d, sys.z, sys.rho)
        lp, gp, mp, ip = kp.secular_all(sys.d, sys.z, sys.rho)
        scale = np.abs(lp).max()
        # summation order differs between the backends, so iteration counts
        # may drift by a step or two; the roots themselves must agree
        assert abs(ic - ip) <= max(2, k // 20)
        assert np.abs(lc - lp).max() <= 64 * EPS * scale
        assert np.abs(gc - gp).max() <= 64 * EPS * scale
        assert np.abs(mc - mp).max() <= 64 * EPS * scale


@needs_c
def test_jacobi_parity_contract(rng):
    n = 60
    A0 = rng.standard_normal((n, n))
    A0 = np.ascontiguousarray(A0 + A0.T)
    target = n * EPS * np.linalg.norm(A0, "fro")
    out = {}
    for name, kk in (("c", kc), ("py", kp)):
        A = A0.copy()
        V = np.eye(n)
        sweeps = kk.jacobi_run(A, V, target, 50)
        assert 0 < sweeps < 50
        resid = np.abs(A0 @ V - V * np.diag(A)).max()
        assert resid <= 100 * n * EPS * np.abs(A0).max()
        out[name] = np.sort(np.diag(A))
    assert np.abs(out["c"] - out["py"]).max() <= 1e-12 * np.abs(A0).max()


@needs_c
def test_onesided_parity_contract(rng):
    M0 = rng.standard_normal((40, 11)) @ rng.standard_normal((11, 90))
    ref = np.linalg.svd(M0, compute_uv=False)
    for kk in (kc, kp):
        M = np.ascontiguousarray(M0.copy())
        sweeps = kk.onesided_orthogonalize(M, 50)
        assert sweeps > 0
        sv = np.sort(np.linalg.norm(M, axis=1))[::-1]
        assert np.abs(sv[:40] - ref).max() <= 1e-12 * ref[0]


@needs_c
def test_tql2_parity(rng):
    n = 24
    a = rng.standard_normal(n)
    b = rng.standard_normal(n - 1)
    out = {}
    for name, kk in (("c", kc), ("py", kp)):
        d, e, Q = a.copy(), b.copy(), np.eye(n)
        assert kk.tql2(d, e, Q, 30) == 0
        out[name] = (d, Q)
    np.testing.assert_array_equal(out["c"][0], out["py"][0])
    np.testing.assert_array_equal(out["c"][1], out["py"][1])


def test_python_kernels_standalone(rng):
    # the fallback must carry the full contract on its own
    sys = random_system(rng, 64)
    lam, gamma, mu, _ = kp.secular_all(sys.d, sys.z, sys.rho)
    M = np.diag(sys.d) + sys.rho * np.outer(sys.z, sys.z)
    ref = np.linalg.eigvalsh(M)
    assert np.abs(lam - ref).max() <= 1e-13 * np.abs(ref).max()
