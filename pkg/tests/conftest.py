import numpy as np
import pytest

from hsseig import matgen
from hsseig.cauchy import CauchyEvecMatrix
from hsseig.secular import RankOneSystem, recompute_weights, solve_secular


def random_system(rng, k, span=4.0, min_gap_frac=0.25, rho=None):
    """Well-separated rank-one test system: poles on a jittered uniform grid."""
    gap = span / k
    jitter = rng.uniform(-0.5 + min_gap_frac, 0.5 - min_gap_frac, k)
    d = (np.arange(k) + 0.5 + jitter) * gap
    z = rng.standard_normal(k)
    z[np.abs(z) < 0.05] += 0.1  # keep weights clear of the deflation scale
    if rho is None:
        rho = 0.5 + rng.random()
    return RankOneSystem(d, z, float(rho))


def solved_cauchy(sys, flops=None):
    """Pipeline helper: roots, recomputed weights, generator matrix."""
    sol = solve_secular(sys, flops=flops)
    recompute_weights(sys.d, sol, sys.z, rho=sys.rho, flops=flops)
    return sol, CauchyEvecMatrix.from_secular(sys, sol, flops=flops)


def example1_cauchy(n, seed=0):
    """Eigenvector matrix of the uniformly spread rank-one benchmark system."""
    d, u = matgen.uniform_pole_system(n, seed=seed)
    sys = RankOneSystem(d, u, 1.0)
    sol, C = solved_cauchy(sys)
    return sys, sol, C


def align_columns(Q, ref):
    """Flip column signs of Q to match ref (eigenvectors are sign-ambiguous)."""
    signs = np.sign((Q * ref).sum(axis=0))
    signs[signs == 0.0] = 1.0
    return Q * signs


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
