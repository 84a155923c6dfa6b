import numpy as np
import pytest

from hsseig import matgen
from hsseig.dc import SolverConfig, adc_solve
from hsseig.matgen import MatrixFormatError, SymTridiagonal
from hsseig.oracle import DenseSym, jacobi_eig

EPS = np.finfo(np.float64).eps


def test_clement_small_values():
    T = matgen.gen_clement(2)
    np.testing.assert_array_equal(T.a, [0.0, 0.0])
    np.testing.assert_allclose(T.b, [np.sqrt(2.0)], rtol=0)


def test_clement_2x2_eigenvalues():
    T = matgen.gen_clement(2)
    lam, _ = jacobi_eig(DenseSym.from_tridiagonal(T))
    np.testing.assert_allclose(lam, [-np.sqrt(2.0), np.sqrt(2.0)], atol=1e-15)


def test_clement_solver_matches_oracle():
    T = matgen.gen_clement(200)
    res = adc_solve(T, SolverConfig(method="dense-dc"))
    lam_o, _ = jacobi_eig(DenseSym.from_tridiagonal(T))
    assert np.abs(res.lam - lam_o).max() <= 1e-11 * T.norm_max()


def test_legendre_values():
    np.testing.assert_allclose(matgen.gen_legendre(2).b, [2.0 / np.sqrt(15.0)], rtol=0)
    np.testing.assert_allclose(
        matgen.gen_legendre(3).b, [2.0 / np.sqrt(15.0), 3.0 / np.sqrt(35.0)], rtol=0
    )


def test_legendre_spectrum_inside_unit_interval():
    # Gershgorin only gives |lam| <~ 1 here (row sums slightly exceed one),
    # so containment is checked through the solvers; the margin to +-1 at
    # n = 500 is ~1e-5, far above solver error.
    res = adc_solve(matgen.gen_legendre(500), SolverConfig(method="dense-dc"))
    assert res.lam.min() > -1.0 and res.lam.max() < 1.0
    lam, _ = jacobi_eig(DenseSym.from_tridiagonal(matgen.gen_legendre(120)))
    assert lam.min() > -1.0 and lam.max() < 1.0


def test_laguerre_values():
    T = matgen.gen_laguerre(3)
    np.testing.assert_array_equal(T.a, [3.0, 5.0, 7.0])
    np.testing.assert_array_equal(T.b, [2.0, 3.0])
    T1 = matgen.gen_laguerre(1)
    np.testing.assert_array_equal(T1.a, [3.0])
    assert T1.b.size == 0


def test_laguerre_positive_definite_at_1000():
    T = matgen.gen_laguerre(1000)
    # independent check: the LDL^T pivot recurrence stays positive
    piv = T.a[0]
    assert piv > 0
    for i in range(1, T.n):
        piv = T.a[i] - T.b[i - 1] ** 2 / piv
        assert piv > 0
    res = adc_solve(T, SolverConfig(method="dense-dc"))
    assert res.lam.min() > 0


def test_hermite_values():
    T = matgen.gen_hermite(3)
    np.testing.assert_allclose(T.b, [1.0, np.sqrt(2.0)], rtol=0)
    np.testing.assert_array_equal(T.a, np.zeros(3))


@pytest.mark.parametrize("gen", [matgen.gen_clement, matgen.gen_hermite])
def test_zero_diagonal_spectra_symmetric(gen):
    for n in (8, 63, 200):
        lam, _ = jacobi_eig(DenseSym.from_tridiagonal(gen(n)))
        np.testing.assert_allclose(lam, -lam[::-1], atol=1e-12 * max(abs(lam).max(), 1))


def test_toeplitz_small():
    T = matgen.gen_toeplitz(3)
    np.testing.assert_array_equal(T.a, [2.0, 2.0, 2.0])
    np.testing.assert_array_equal(T.b, [1.0, 1.0])
    lam, _ = jacobi_eig(DenseSym.from_tridiagonal(T))
    np.testing.assert_allclose(lam, [2 - np.sqrt(2), 2.0, 2 + np.sqrt(2)], atol=1e-14)
    np.testing.assert_array_equal(matgen.gen_toeplitz(1).a, [2.0])


def test_toeplitz_closed_form_512():
    T = matgen.gen_toeplitz(512)
    res = adc_solve(T, SolverConfig(method="dense-dc"))
    closed = np.sort(2.0 + 2.0 * np.cos(np.arange(1, 513) * np.pi / 513.0))
    assert np.abs(res.lam - closed).max() <= 1e-12


@pytest.mark.parametrize("name,gen", sorted(matgen.FAMILIES.items()))
def test_generators_deterministic_and_valid(name, gen):
    n = 57 if name != "legendre" else 57
    T1, T2 = gen(n), gen(n)
    np.testing.assert_array_equal(T1.a, T2.a)
    np.testing.assert_array_equal(T1.b, T2.b)
    assert T1.n == n and T1.b.size == n - 1
    assert np.all(np.isfinite(T1.a)) and np.all(np.isfinite(T1.b))


def test_invalid_orders_rejected():
    with pytest.raises(ValueError):
        matgen.gen_clement(0)
    with pytest.raises(ValueError):
        matgen.gen_legendre(1)
    with pytest.raises(ValueError):
        matgen.gen_toeplitz(-3)


def test_roundtrip_bit_exact(tmp_path):
    T = matgen.gen_clement(10)
    path = tmp_path / "c10.mtx"
    matgen.write_matrix(T, path)
    R = matgen.read_matrix(path)
    np.testing.assert_array_equal(T.a, R.a)
    np.testing.assert_array_equal(T.b, R.b)


def test_roundtrip_random_payload(tmp_path, rng):
    T = SymTridiagonal(rng.standard_normal(33), rng.standard_normal(32) * 1e-7)
    path = tmp_path / "r.mtx"
    matgen.write_matrix(T, path)
    R = matgen.read_matrix(path)
    np.testing.assert_array_equal(T.a, R.a)
    np.testing.assert_array_equal(T.b, R.b)


def test_handwritten_file_matches_generator(tmp_path):
    path = tmp_path / "t4.mtx"
    path.write_text("symtridiag 4\n2 2 2 2\n1 1 1\n", encoding="utf-8")
    R = matgen.read_matrix(path)
    T = matgen.gen_toeplitz(4)
    np.testing.assert_array_equal(R.a, T.a)
    np.testing.assert_array_equal(R.b, T.b)


def test_malformed_wrong_count(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("symtridiag 3\n1 2 3\n1\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError) as err:
        matgen.read_matrix(path)
    assert err.value.line == 3


def test_malformed_header_and_nonfinite(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("tridiag 3\n1 2 3\n1 1\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError) as err:
        matgen.read_matrix(path)
    assert err.value.line == 1
    path.write_text("symtridiag 2\n1 nan\n1\n", encoding="utf-8")
    with pytest.raises(MatrixFormatError) as err:
        matgen.read_matrix(path)
    assert err.value.line == 2


def test_write_rejects_nonfinite(tmp_path):
    T = SymTridiagonal(np.array([1.0, np.inf]), np.array([0.5]))
    with pytest.raises(ValueError):
        matgen.write_matrix(T, tmp_path / "x.mtx")
