"""Generators for the named tridiagonal test families and matrix file I/O."""
from dataclasses import dataclass

import numpy as np


class MatrixFormatError(ValueError):
    """Raised for malformed matrix files; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix: diagonal a (n,), off-diagonal b (n-1,)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.a, dtype=np.float64)
        b = np.ascontiguousarray(self.b, dtype=np.float64)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        if a.ndim != 1 or b.ndim != 1:
            raise ValueError("diagonals must be one-dimensional")
        if a.size < 1:
            raise ValueError("order must be at least 1")
        if b.size != a.size - 1:
            raise ValueError(f"need {a.size - 1} off-diagonal entries, got {b.size}")

    @property
    def n(self):
        return self.a.size

    def to_dense(self):
        A = np.diag(self.a)
        idx = np.arange(self.n - 1)
        A[idx, idx + 1] = self.b
        A[idx + 1, idx] = self.b
        return A

    def norm_max(self):
        m = float(np.abs(self.a).max())
        if self.b.size:
            m = max(m, float(np.abs(self.b).max()))
        return m


def _check_order(n, minimum=1):
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise ValueError(f"order must be an integer >= {minimum}, got {n!r}")


def gen_clement(n):
    """Zero diagonal, off-diagonal b_i = sqrt(i*(n+1-i)); spectrum symmetric."""
    _check_order(n)
    i = np.arange(1, n, dtype=np.float64)
    return SymTridiagonal(np.zeros(n), np.sqrt(i * (n + 1 - i)))


def gen_legendre(n):
    """Zero diagonal, off-diagonal i/sqrt((2i-1)(2i+1)) for i = 2..n."""
    _check_order(n, minimum=2)
    i = np.arange(2, n + 1, dtype=np.float64)
    return SymTridiagonal(np.zeros(n), i / np.sqrt((2 * i - 1) * (2 * i + 1)))


def gen_laguerre(n):
    """Diagonal 3, 5, ..., 2n+1 with off-diagonal 2, 3, ..., n."""
    _check_order(n)
    a = 2.0 * np.arange(1, n + 1) + 1.0
    b = np.arange(2, n + 1, dtype=np.float64)
    return SymTridiagonal(a, b)


def gen_hermite(n):
    """Zero diagonal, off-diagonal sqrt(1), sqrt(2), ..., sqrt(n-1)."""
    _check_order(n)
    return SymTridiagonal(np.zeros(n), np.sqrt(np.arange(1, n, dtype=np.float64)))


def gen_toeplitz(n):
    """Constant diagonal 2 and off-diagonal 1 (eigenvalues 2 + 2cos(k*pi/(n+1)))."""
    _check_order(n)
    return SymTridiagonal(np.full(n, 2.0), np.ones(n - 1))


FAMILIES = {
    "clement": gen_clement,
    "legendre": gen_legendre,
    "laguerre": gen_laguerre,
    "hermite": gen_hermite,
    "toeplitz": gen_toeplitz,
}


def uniform_pole_system(n, lo=1.0, hi=9.0, seed=0):
    """Rank-one update test system: poles d_i = i*(hi-lo)/n, random unit weight.

    Returns (d, u) for the eigenproblem of diag(d) + u u^T; the eigenvector
    matrix of this system is the standard off-diagonally low-rank probe.
    """
    d = np.arange(1, n + 1, dtype=np.float64) * ((hi - lo) / n)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    return d, u


def _fmt(x):
    return repr(float(x))


def write_matrix(T, path):
    """Write a SymTridiagonal to the plain-text format (bit-exact round trip)."""
    if not np.all(np.isfinite(T.a)) or not np.all(np.isfinite(T.b)):
        raise ValueError("refusing to write non-finite matrix entries")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"symtridiag {T.n}\n")
        fh.write(" ".join(_fmt(x) for x in T.a) + "\n")
        fh.write(" ".join(_fmt(x) for x in T.b) + "\n")


def _parse_floats(text, count, line_no, what):
    parts = text.split()
    if len(parts) != count:
        raise MatrixFormatError(f"expected {count} {what} values, got {len(parts)}", line_no)
    try:
        vals = np.array([float(p) for p in parts], dtype=np.float64)
    except ValueError as exc:
        raise MatrixFormatError(f"bad {what} value ({exc})", line_no) from None
    if not np.all(np.isfinite(vals)):
        raise MatrixFormatError(f"non-finite {what} value", line_no)
    return vals


def read_matrix(path):
    """Read a matrix file written by write_matrix; raises MatrixFormatError."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixFormatError("empty file", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "symtridiag":
        raise MatrixFormatError("expected header 'symtridiag <n>'", 1)
    try:
        n = int(head[1])
    except ValueError:
        raise MatrixFormatError(f"bad order {head[1]!r}", 1) from None
    if n < 1:
        raise MatrixFormatError(f"order must be positive, got {n}", 1)
    if len(lines) < 3:
        raise MatrixFormatError("missing diagonal/off-diagonal lines", len(lines) + 1)
    a = _parse_floats(lines[1], n, 2, "diagonal")
    b = _parse_floats(lines[2], n - 1, 3, "off-diagonal")
    return SymTridiagonal(a, b)
