"""Command line entry point.

Exit codes: 0 success, 1 usage error, 2 infeasible compression,
3 container format error, 4 oracle check failed.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys

import numpy as np

from . import bench
from .container import load_container, save_container
from .errors import FormatError, InfeasibleError, ParameterError
from .linalg import DenseMatrix, dense_matvec
from .lstm import (SCHEMES, LstmCell, cell_param_count, cell_weight_count, compress_cell,
                   compress_operator, densify_cell, lstm_forward)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_FORMAT, EXIT_CHECK = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_source(src: str, seed: int):
    match = re.fullmatch(r"random:(\d+)x(\d+)", src)
    if match:
        m, n = int(match[1]), int(match[2])
        return DenseMatrix(np.random.default_rng(seed).standard_normal((m, n)))
    return load_container(src)


def cmd_compress(args) -> int:
    src = _load_source(args.src, args.seed)
    if isinstance(src, LstmCell):
        out = compress_cell(src, args.scheme, args.factor)
        base, weights = cell_weight_count(src), cell_weight_count(out)
        params = cell_param_count(out)
    elif isinstance(src, DenseMatrix):
        out = compress_operator(src, args.scheme, args.factor)
        base, weights = src.param_count(), out.param_count()
        params = weights
    else:
        raise UsageError(f"compress needs a dense matrix or dense cell, got {src.kind}")
    save_container(args.out, out)
    print(f"wrote {args.out}: scheme={args.scheme} params={params} "
          f"achieved_factor={base / weights:.4f}")
    return EXIT_OK


def _check_operator(op, trials: int, rng) -> bool:
    dense = op.to_dense()
    scale = float(np.abs(dense.data).max())
    worst = 0.0
    ok = True
    for _ in range(trials):
        x = rng.uniform(-1.0, 1.0, op.in_dim)
        diff = float(np.abs(op.matvec(x) - dense_matvec(dense, x)).max())
        tol = 1e-12 * op.in_dim * max(scale * float(np.abs(x).max()), np.finfo(float).tiny)
        worst = max(worst, diff / tol)
        ok &= diff < tol
    print(f"oracle {op.kind} {op.out_dim}x{op.in_dim}: worst diff/tol = {worst:.3e} "
          f"-> {'PASS' if ok else 'FAIL'}")
    return ok


def _check_cell(cell: LstmCell, steps: int, rng) -> bool:
    seq = rng.standard_normal((steps, cell.input_dim))
    ref = lstm_forward(densify_cell(cell), seq)
    got = lstm_forward(cell, seq)
    worst = max((float(np.abs(a.h - b.h).max()) for a, b in zip(got, ref)), default=0.0)
    ok = worst < 1e-10
    print(f"oracle lstm {cell.input_dim}->{cell.hidden_dim} ({cell.w_x.kind}/{cell.w_h.kind}), "
          f"{steps} steps: max |dh| = {worst:.3e} -> {'PASS' if ok else 'FAIL'}")
    return ok


def cmd_check(args) -> int:
    obj = load_container(args.a)
    if isinstance(obj, LstmCell):
        print(f"lstm cell input={obj.input_dim} hidden={obj.hidden_dim} "
              f"w_x={obj.w_x.kind} w_h={obj.w_h.kind} params={cell_param_count(obj)}")
    else:
        print(f"{obj.kind} {obj.out_dim}x{obj.in_dim} params={obj.param_count()} "
              f"macs={obj.mac_count()}")
    if not args.oracle:
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    ok = _check_cell(obj, args.steps, rng) if isinstance(obj, LstmCell) \
        else _check_operator(obj, args.trials, rng)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_bench(args) -> int:
    if (args.preset is None) == (args.dims is None):
        raise UsageError("give exactly one of --preset or --dims")
    dims = bench.preset_dims(args.preset, args.mode) if args.preset else tuple(args.dims)
    config = bench.BenchConfig(
        dims=dims, schemes=tuple(args.schemes), factors=tuple(args.factors),
        warmup_iters=args.warmup, measure_iters=args.iters, seq_len=args.seq_len,
        seed=args.seed)
    run = bench.run_cell_bench if args.mode == "cell" else bench.run_matvec_bench
    results = run(config)
    if args.out:
        with open(args.out, "w", newline="") as f:
            f.write(bench.emit_report(results, "csv"))
    sys.stdout.write(bench.emit_report(results, args.format))
    return EXIT_OK


def cmd_report(args) -> int:
    with open(args.src, newline="") as f:
        results = bench.read_report(f.read())
    sys.stdout.write(bench.emit_report(results, args.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hmdkit", description="Hybrid matrix decomposition toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compress", help="compress a dense matrix or cell into a container")
    c.add_argument("--in", dest="src", required=True, help="container path or random:MxN")
    c.add_argument("--scheme", choices=SCHEMES, required=True)
    c.add_argument("--factor", type=float, required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_compress)

    k = sub.add_parser("check", help="describe a container, optionally run the dense oracle")
    k.add_argument("--a", required=True, help="container path")
    k.add_argument("--oracle", action="store_true")
    k.add_argument("--trials", type=int, default=100)
    k.add_argument("--steps", type=int, default=81)
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="time compressed kernels against the dense baseline")
    b.add_argument("mode", choices=("matvec", "cell"))
    b.add_argument("--preset", choices=sorted(bench.PRESETS))
    b.add_argument("--dims", type=int, nargs=2, metavar=("A", "B"),
                   help="matvec: M N; cell: INPUT HIDDEN")
    b.add_argument("--schemes", nargs="+", choices=SCHEMES, default=list(SCHEMES))
    b.add_argument("--factors", type=float, nargs="+", default=list(bench.DEFAULT_FACTORS))
    b.add_argument("--warmup", type=int, default=10)
    b.add_argument("--iters", type=int, default=100)
    b.add_argument("--seq-len", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--format", choices=("csv", "table"), default="csv")
    b.add_argument("--out", help="also write CSV here")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("report", help="re-render a saved CSV report")
    r.add_argument("--in", dest="src", required=True)
    r.add_argument("--format", choices=("csv", "table"), default="table")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except FormatError as exc:
        print(f"format error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (UsageError, ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
