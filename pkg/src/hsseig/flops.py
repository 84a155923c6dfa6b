"""Multiply-add flop accounting for the solver phases.

Conventions (one fused multiply-add = 2 flops):
  * dense product (m x n)(n x p): 2*m*n*p
  * Cauchy-like entry evaluation (gap + reciprocal + two products): 6 per entry
  * column-pivoted QR of an (m x n) block truncated at rank r: 4*m*n*r
  * secular iteration: 10*k per root iteration (function + derivative sums)

Counts are derived from problem sizes and iteration counts, never from
hardware sampling, so identical inputs and seed give identical counters.
"""


class FlopCounter:
    """Integer counters for the four instrumented phases."""

    PHASES = ("secular", "update_dense", "hss_construct", "hss_mult")

    def __init__(self):
        self.secular = 0
        self.update_dense = 0
        self.hss_construct = 0
        self.hss_mult = 0

    def as_dict(self):
        return {p: getattr(self, p) for p in self.PHASES}

    def total(self):
        return sum(self.as_dict().values())

    def __repr__(self):
        inner = ", ".join(f"{p}={getattr(self, p)}" for p in self.PHASES)
        return f"FlopCounter({inner})"


def gemm_flops(m, n, p):
    return 2 * m * n * p


def cauchy_eval_flops(entries):
    return 6 * entries


def cpqr_flops(m, n, r):
    return 4 * m * n * r


def secular_flops(k, iters):
    return 10 * k * iters
