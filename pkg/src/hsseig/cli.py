"""Command-line harness: generate, solve, verify, rank profiles, benchmarks.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O or parse
error.  All CSV outputs are deterministic functions of the inputs, flags,
and seed (wall-clock columns aside).
"""
import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import matgen
from .cauchy import CauchyEvecMatrix
from .dc import METHODS, SolverConfig, adc_solve
from .matgen import MatrixFormatError
from .oracle import DenseSym, jacobi_eig, numerical_rank
from .secular import RankOneSystem, recompute_weights, solve_secular

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

ORACLE_BOUND = 4096
BENCH_BOUND = 8192

REPORT_FIELDS = ("family", "n", "method", "seed", "wall_s", "flops_secular",
                 "flops_update_dense", "flops_hss_construct", "flops_hss_mult",
                 "deflated_frac", "orth_metric", "backward_metric", "max_eig_dev")
REPORT_NORM_NOTE = ("# orth_metric = max|I - Q^T Q|/n, backward_metric = "
                    "max|T - Q L Q^T|/(max|T| * n); entrywise max norms throughout")


@dataclass
class RunReport:
    family: str
    n: int
    method: str
    seed: int
    wall_s: float
    flops_secular: int
    flops_update_dense: int
    flops_hss_construct: int
    flops_hss_mult: int
    deflated_frac: float
    orth_metric: float
    backward_metric: float
    max_eig_dev: float | None = None

    def row(self):
        vals = [self.family, self.n, self.method, self.seed, repr(self.wall_s),
                self.flops_secular, self.flops_update_dense,
                self.flops_hss_construct, self.flops_hss_mult,
                repr(self.deflated_frac), repr(self.orth_metric),
                repr(self.backward_metric),
                "" if self.max_eig_dev is None else repr(self.max_eig_dev)]
        return ",".join(str(v) for v in vals)


def orthogonality_metric(Q):
    n = Q.shape[0]
    return float(np.abs(Q.T @ Q - np.eye(n)).max()) / n


def backward_metric(T, lam, Q):
    A = T.to_dense()
    R = A - (Q * lam) @ Q.T
    return float(np.abs(R).max()) / (T.norm_max() * T.n)


def write_report_csv(path, reports):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REPORT_NORM_NOTE + "\n")
        fh.write(",".join(REPORT_FIELDS) + "\n")
        for rep in reports:
            fh.write(rep.row() + "\n")


def write_eigs_csv(path, lam):
    with open(path, "w", encoding="utf-8") as fh:
        for x in lam:
            fh.write(repr(float(x)) + "\n")


def read_eigs_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        return np.array([float(line) for line in fh.read().split()])


def write_qmat(path, Q):
    n = Q.shape[0]
    with open(path, "wb") as fh:
        np.array([n], dtype=np.int64).tofile(fh)
        np.asarray(Q, dtype=np.float64).T.tofile(fh)  # column-major payload


def read_qmat(path):
    with open(path, "rb") as fh:
        n = int(np.fromfile(fh, dtype=np.int64, count=1)[0])
        data = np.fromfile(fh, dtype=np.float64, count=n * n)
    if data.size != n * n:
        raise MatrixFormatError(f"eigenvector dump truncated (expected {n}x{n})")
    return data.reshape(n, n).T.copy()


def _config_from_args(args):
    return SolverConfig(
        base_size=args.base_size,
        hss_threshold=args.hss_threshold,
        leaf_size=args.leaf_size,
        oversample=args.oversample,
        rank_eps=args.rank_eps,
        seed=args.seed,
        method=args.method,
    )


def _solve_matrix(T, family, args):
    cfg = _config_from_args(args)
    t0 = time.perf_counter()
    res = adc_solve(T, cfg)
    wall = time.perf_counter() - t0
    dev = None
    if args.oracle:
        if T.n > ORACLE_BOUND:
            raise ValueError(f"--oracle limited to n <= {ORACLE_BOUND}")
        lam_o, _ = jacobi_eig(DenseSym.from_tridiagonal(T))
        dev = float(np.abs(res.lam - lam_o).max())
    rep = RunReport(
        family=family, n=T.n, method=args.method, seed=args.seed, wall_s=wall,
        flops_secular=res.flops.secular,
        flops_update_dense=res.flops.update_dense,
        flops_hss_construct=res.flops.hss_construct,
        flops_hss_mult=res.flops.hss_mult,
        deflated_frac=res.max_deflation_fraction(),
        orth_metric=orthogonality_metric(res.Q),
        backward_metric=backward_metric(T, res.lam, res.Q),
        max_eig_dev=dev,
    )
    return res, rep


def cmd_gen(args):
    gen = matgen.FAMILIES[args.family]
    T = gen(args.n)
    matgen.write_matrix(T, args.out_path)
    return EXIT_OK


def cmd_solve(args):
    T = matgen.read_matrix(args.matrix)
    family = Path(args.matrix).stem
    res, rep = _solve_matrix(T, family, args)
    prefix = args.out if args.out else str(Path(args.matrix).with_suffix(""))
    write_eigs_csv(prefix + ".eigs.csv", res.lam)
    write_report_csv(prefix + ".report.csv", [rep])
    if args.dump_vectors:
        write_qmat(prefix + ".qmat.bin", res.Q)
    return EXIT_OK


def cmd_verify(args):
    T = matgen.read_matrix(args.matrix)
    lam = read_eigs_csv(args.prefix + ".eigs.csv")
    Q = read_qmat(args.prefix + ".qmat.bin")
    if lam.size != T.n or Q.shape != (T.n, T.n):
        raise ValueError(
            f"dimension mismatch: matrix order {T.n}, {lam.size} eigenvalues, Q {Q.shape}"
        )
    orth = orthogonality_metric(Q)
    backward = backward_metric(T, lam, Q)
    lines = [REPORT_NORM_NOTE, "metric,value",
             f"orth_metric,{orth!r}", f"backward_metric,{backward!r}"]
    if args.oracle:
        if T.n > ORACLE_BOUND:
            raise ValueError(f"--oracle limited to n <= {ORACLE_BOUND}")
        lam_o, _ = jacobi_eig(DenseSym.from_tridiagonal(T))
        lines.append(f"max_eig_dev,{float(np.abs(np.sort(lam) - lam_o).max())!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_ranktable(args):
    if args.n > ORACLE_BOUND:
        raise ValueError(f"ranktable limited to n <= {ORACLE_BOUND}")
    if args.m_list:
        ms = [int(tok) for tok in args.m_list.split(",")]
    else:
        step = max(args.n // 20, 1)
        ms = list(range(step, args.n // 2 + 1, step))
    if any(not 0 < m < args.n for m in ms):
        raise ValueError("block splits must satisfy 0 < m < n")
    d, u = matgen.uniform_pole_system(args.n, args.a, args.b, seed=args.seed)
    sys_ = RankOneSystem(d, u, 1.0)
    sol = solve_secular(sys_)
    recompute_weights(d, sol, u, rho=1.0)
    Q = CauchyEvecMatrix.from_secular(sys_, sol).to_dense()
    lines = ["m,rank"]
    for m in ms:
        lines.append(f"{m},{numerical_rank(Q[:m, m:], args.threshold)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args):
    sizes = [int(tok) for tok in args.sizes.split(",")]
    if any(n > BENCH_BOUND for n in sizes):
        raise ValueError(f"bench sizes limited to {BENCH_BOUND}")
    methods = args.methods.split(",")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    gen = matgen.FAMILIES[args.family]
    reports = []
    for n in sizes:
        T = gen(n)
        for method in methods:
            sub = argparse.Namespace(**vars(args))
            sub.method = method
            _, rep = _solve_matrix(T, args.family, sub)
            reports.append(rep)
    if args.out:
        write_report_csv(args.out, reports)
    else:
        sys.stdout.write(REPORT_NORM_NOTE + "\n" + ",".join(REPORT_FIELDS) + "\n")
        for rep in reports:
            sys.stdout.write(rep.row() + "\n")
    return EXIT_OK


def _add_solver_flags(p):
    p.add_argument("--method", choices=METHODS, default="adc-rand")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--leaf-size", type=int, default=200, dest="leaf_size")
    p.add_argument("--hss-threshold", type=int, default=2000, dest="hss_threshold")
    p.add_argument("--oversample", type=int, default=10)
    p.add_argument("--rank-eps", type=float, default=1e-16, dest="rank_eps")
    p.add_argument("--base-size", type=int, default=25, dest="base_size")
    p.add_argument("--out", default=None)
    p.add_argument("--oracle", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hss-eig",
        description="Symmetric tridiagonal eigensolver with HSS-accelerated updates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a named test matrix to a file")
    p.add_argument("family", choices=sorted(matgen.FAMILIES))
    p.add_argument("n", type=int)
    p.add_argument("out_path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve a matrix file; writes eigenvalue and report CSVs")
    p.add_argument("matrix")
    p.add_argument("--dump-vectors", action="store_true", dest="dump_vectors")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="accuracy metrics for a solve output prefix")
    p.add_argument("matrix")
    p.add_argument("prefix")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ranktable", help="off-diagonal rank profile of a rank-one eigenvector matrix")
    p.add_argument("n", type=int)
    p.add_argument("a", type=float)
    p.add_argument("b", type=float)
    p.add_argument("threshold", type=float)
    p.add_argument("--m-list", default=None, dest="m_list")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_ranktable)

    p = sub.add_parser("bench", help="flop-count scaling runs over a size sweep")
    p.add_argument("family", choices=sorted(matgen.FAMILIES))
    p.add_argument("--sizes", default="1024,2048,4096")
    p.add_argument("--methods", default="dense-dc,adc-rand")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except MatrixFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
