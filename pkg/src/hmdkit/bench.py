"""Single-thread, batch-1 runtime comparison of the compression schemes.

Each row times one operator (``matvec`` mode) or one LSTM cell over
``seq_len`` steps (``cell`` mode) built from a seeded random dense baseline,
after ``warmup_iters`` untimed calls.  Wall time is reported as the 10th,
50th and 90th percentile of ``measure_iters`` samples.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import InfeasibleError, ParameterError
from .linalg import DenseMatrix
from .lstm import (SCHEMES, LstmCell, cell_mac_count, cell_param_count,
                   cell_weight_count, compress_cell, compress_operator, lstm_forward)
from .sparse import CsrMatrix, csr_param_count

log = logging.getLogger(__name__)

DEFAULT_FACTORS = (2.0, 2.5, 3.33, 5.0)

# (input_dim, hidden_dim) of the benchmarked LSTM layers
PRESETS = {
    "har1": (77, 179),
    "har2": (113, 128),
    "ptb": (200, 200),
}

COLUMNS = ("scheme", "requested_factor", "achieved_factor", "params", "macs",
           "median_ns", "p10_ns", "p90_ns", "speedup", "index_overhead", "status")


def preset_dims(name: str, mode: str) -> tuple[int, int]:
    """Shape for a preset: the cell's (input, hidden) or, in matvec mode,
    its fused recurrent matrix (4*hidden, hidden)."""
    try:
        input_dim, hidden = PRESETS[name]
    except KeyError:
        raise ParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return (input_dim, hidden) if mode == "cell" else (4 * hidden, hidden)


@dataclass
class BenchConfig:
    dims: tuple[int, int]
    schemes: tuple[str, ...] = SCHEMES
    factors: tuple[float, ...] = DEFAULT_FACTORS
    warmup_iters: int = 10
    measure_iters: int = 100
    seq_len: int = 1
    seed: int = 0

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        self.schemes = tuple(s for s in self.schemes if s != "dense")
        self.factors = tuple(float(f) for f in self.factors)
        if len(self.dims) != 2 or min(self.dims) < 2:
            raise ParameterError(f"dims must be two sizes >= 2, got {self.dims}")
        if self.warmup_iters < 0 or self.measure_iters < 1 or self.seq_len < 1:
            raise ParameterError("need warmup >= 0, measure iters >= 1, seq_len >= 1")
        if any(not f > 1 for f in self.factors):
            raise ParameterError(f"compression factors must exceed 1, got {self.factors}")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ParameterError(f"unknown schemes {sorted(unknown)}")


@dataclass
class BenchResult:
    scheme: str
    factor: float
    achieved_factor: float | None = None
    params: int | None = None
    macs: int | None = None
    median_ns: float | None = None
    p10_ns: float | None = None
    p90_ns: float | None = None
    speedup_vs_dense: float | None = None
    index_overhead: int = 0
    error: str | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None


def _percentiles(fn, warmup: int, iters: int):
    for _ in range(warmup):
        fn()
    samples = np.empty(iters)
    clock = time.perf_counter_ns
    for k in range(iters):
        t0 = clock()
        fn()
        samples[k] = clock() - t0
    p10, p50, p90 = np.percentile(samples, [10, 50, 90])
    return float(p50), float(p10), float(p90)


def _index_overhead(*ops) -> int:
    return sum(csr_param_count(op).index_overhead for op in ops if isinstance(op, CsrMatrix))


def _run(config, rows_for):
    """Shared driver: ``rows_for(scheme, factor)`` returns
    (callable, weight_count, params, macs, index_overhead)."""
    results = []
    with threadpool_limits(limits=1):
        fn, base_weights, params, macs, _ = rows_for("dense", 1.0)
        median, p10, p90 = _percentiles(fn, config.warmup_iters, config.measure_iters)
        dense = BenchResult("dense", 1.0, 1.0, params, macs, median, p10, p90, 1.0)
        results.append(dense)
        for scheme in config.schemes:
            for factor in config.factors:
                try:
                    fn, weights, params, macs, overhead = rows_for(scheme, factor)
                except InfeasibleError as exc:
                    log.warning("%s at %gx skipped: %s", scheme, factor, exc)
                    results.append(BenchResult(scheme, factor, error=str(exc)))
                    continue
                median, p10, p90 = _percentiles(fn, config.warmup_iters, config.measure_iters)
                results.append(BenchResult(
                    scheme, factor, base_weights / weights if weights else math.inf,
                    params, macs, median, p10, p90, dense.median_ns / median, overhead))
    return results


def run_matvec_bench(config: BenchConfig) -> list[BenchResult]:
    """Time ``matvec`` of each compressed form of one random ``m x n`` matrix."""
    rng = np.random.default_rng(config.seed)
    m, n = config.dims
    a = DenseMatrix(rng.standard_normal((m, n)))
    x = rng.standard_normal(n)

    def rows_for(scheme, factor):
        op = compress_operator(a, scheme, factor)
        return (lambda: op.matvec(x)), op.param_count(), op.param_count(), op.mac_count(), \
            _index_overhead(op)

    return _run(config, rows_for)


def run_cell_bench(config: BenchConfig) -> list[BenchResult]:
    """Time ``lstm_forward`` over ``seq_len`` steps for each compressed cell."""
    rng = np.random.default_rng(config.seed)
    input_dim, hidden = config.dims
    base = LstmCell.random(input_dim, hidden, rng)
    seq = rng.standard_normal((config.seq_len, input_dim))

    def rows_for(scheme, factor):
        cell = base if scheme == "dense" else compress_cell(base, scheme, factor)
        return ((lambda: lstm_forward(cell, seq)), cell_weight_count(cell),
                cell_param_count(cell), cell_mac_count(cell, config.seq_len),
                _index_overhead(cell.w_x, cell.w_h))

    return _run(config, rows_for)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _row(r: BenchResult) -> list[str]:
    return [r.scheme, _fmt(r.factor), _fmt(r.achieved_factor), _fmt(r.params), _fmt(r.macs),
            _fmt(r.median_ns), _fmt(r.p10_ns), _fmt(r.p90_ns), _fmt(r.speedup_vs_dense),
            _fmt(r.index_overhead), "ok" if r.ok else "infeasible"]


def emit_report(results: list[BenchResult], format: str = "csv") -> str:
    if not results:
        raise ParameterError("no results to report")
    rows = [_row(r) for r in results]
    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(COLUMNS)
        writer.writerows(rows)
        return buf.getvalue()
    if format == "table":
        return _table(rows)
    raise ParameterError(f"unknown report format {format!r}")


def _table(rows: list[list[str]]) -> str:
    def short(col, cell):
        if not cell or col in ("scheme", "status", "params", "macs", "index_overhead"):
            return cell
        v = float(cell)
        return f"{v:.0f}" if col.endswith("_ns") else f"{v:.3f}"

    body = [[short(c, cell) for c, cell in zip(COLUMNS, row)] for row in rows]
    widths = [max(len(c), *(len(r[i]) for r in body)) for i, c in enumerate(COLUMNS)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(COLUMNS, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in body]
    return "\n".join(lines) + "\n"


def read_report(text: str) -> list[BenchResult]:
    """Parse CSV written by :func:`emit_report` back into results."""
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ParameterError(f"unexpected report header {reader.fieldnames}")

    def num(s, kind=float):
        return kind(s) if s != "" else None

    out = []
    for rec in reader:
        out.append(BenchResult(
            scheme=rec["scheme"], factor=float(rec["requested_factor"]),
            achieved_factor=num(rec["achieved_factor"]), params=num(rec["params"], int),
            macs=num(rec["macs"], int), median_ns=num(rec["median_ns"]),
            p10_ns=num(rec["p10_ns"]), p90_ns=num(rec["p90_ns"]),
            speedup_vs_dense=num(rec["speedup"]), index_overhead=int(rec["index_overhead"]),
            error=None if rec["status"] == "ok" else rec["status"]))
    return out
