"""Magnitude pruning into compressed sparse row storage."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ShapeError
from .linalg import DenseMatrix, as_vector, frozen


class CsrCounts(NamedTuple):
    weights: int
    index_overhead: int


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    values: np.ndarray
    col_idx: np.ndarray
    row_ptr: np.ndarray
    n: int
    _rows: np.ndarray = field(init=False, repr=False)

    kind = "csr"

    def __post_init__(self):
        values = frozen(self.values, ndim=1, name="values")
        col_idx = frozen(self.col_idx, ndim=1, name="col_idx", dtype=np.int64)
        row_ptr = frozen(self.row_ptr, ndim=1, name="row_ptr", dtype=np.int64)
        n = int(self.n)
        nnz = values.size
        if n < 1 or row_ptr.size < 2:
            raise ShapeError("CsrMatrix needs at least one row and one column")
        if col_idx.size != nnz:
            raise ShapeError(f"{col_idx.size} column indices for {nnz} values")
        counts = np.diff(row_ptr)
        if row_ptr[0] != 0 or row_ptr[-1] != nnz or np.any(counts < 0):
            raise ShapeError("row_ptr must rise monotonically from 0 to nnz")
        if nnz:
            if col_idx.min() < 0 or col_idx.max() >= n:
                raise ShapeError(f"column index out of range [0, {n})")
            rows = np.repeat(np.arange(row_ptr.size - 1), counts)
            same_row = rows[1:] == rows[:-1]
            if np.any(np.diff(col_idx)[same_row] <= 0):
                raise ShapeError("column indices must increase strictly within a row")
            if np.any(values == 0.0):
                raise ShapeError("explicit zeros are not stored")
        else:
            rows = np.zeros(0, dtype=np.int64)
        rows.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "_rows", rows)

    @property
    def m(self) -> int:
        return self.row_ptr.size - 1

    @property
    def nnz(self) -> int:
        return self.values.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    out_dim = m

    @property
    def in_dim(self) -> int:
        return self.n

    def matvec(self, x) -> np.ndarray:
        return csr_matvec(self, x)

    def param_count(self) -> int:
        """Stored weights only; see :func:`csr_param_count` for index storage."""
        return self.nnz

    def mac_count(self) -> int:
        return self.nnz

    def to_dense(self) -> DenseMatrix:
        out = np.zeros((self.m, self.n))
        out[self._rows, self.col_idx] = self.values
        return DenseMatrix(out)

    @classmethod
    def from_dense(cls, a, keep=None) -> "CsrMatrix":
        """Store the nonzeros of ``a`` (restricted to the boolean ``keep`` mask)."""
        arr = a.data if isinstance(a, DenseMatrix) else np.asarray(a, dtype=np.float64)
        mask = arr != 0.0 if keep is None else (keep & (arr != 0.0))
        rows, cols = np.nonzero(mask)
        row_ptr = np.zeros(arr.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=arr.shape[0]), out=row_ptr[1:])
        return cls(arr[rows, cols], cols, row_ptr, arr.shape[1])


def csr_matvec(s: CsrMatrix, x) -> np.ndarray:
    """Row-wise sparse product; gathers ``x`` through ``col_idx``."""
    x = as_vector(x, s.n)
    # trailing zero keeps every row start a valid index for reduceat
    prod = np.zeros(s.nnz + 1)
    np.multiply(s.values, x[s.col_idx], out=prod[:-1])
    starts = s.row_ptr[:-1]
    out = np.add.reduceat(prod, starts)
    # reduceat yields a stray element for empty rows, so mask them out
    out[starts == s.row_ptr[1:]] = 0.0
    return out


def csr_param_count(s: CsrMatrix) -> CsrCounts:
    return CsrCounts(weights=s.nnz, index_overhead=s.nnz + s.m + 1)


def prune_by_magnitude(a: DenseMatrix, target_compression: float) -> CsrMatrix:
    """Keep the ``floor(m*n / target)`` largest-magnitude entries.

    Equal magnitudes are ranked in row-major order, so earlier entries win.
    Zero entries are never stored, so a matrix with fewer nonzeros than the
    budget keeps all of them.
    """
    if not target_compression >= 1:
        raise ParameterError(f"target must be >= 1, got {target_compression}")
    m, n = a.shape
    k = math.floor(m * n / target_compression)
    flat = a.flat
    order = np.argsort(-np.abs(flat), kind="stable")[:k]
    keep = np.zeros(m * n, dtype=bool)
    keep[order] = True
    return CsrMatrix.from_dense(a, keep.reshape(m, n))
