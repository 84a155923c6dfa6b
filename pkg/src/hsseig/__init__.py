"""Symmetric tridiagonal eigensolver with HSS-accelerated eigenvector updates."""
from .backend import BACKEND
from .dc import EigenResult, SolverConfig, adc_solve
from .matgen import (
    FAMILIES,
    SymTridiagonal,
    gen_clement,
    gen_hermite,
    gen_laguerre,
    gen_legendre,
    gen_toeplitz,
    read_matrix,
    write_matrix,
)

__all__ = [
    "BACKEND",
    "EigenResult",
    "FAMILIES",
    "SolverConfig",
    "SymTridiagonal",
    "adc_solve",
    "gen_clement",
    "gen_hermite",
    "gen_laguerre",
    "gen_legendre",
    "gen_toeplitz",
    "read_matrix",
    "write_matrix",
]

__version__ = "0.1.0"
