"""Dense matrix type, the reference matvec and the SVD-based fitters.

Everything here works in float64.  Vectors are plain 1-D numpy arrays; the
helpers :func:`as_vector` and :func:`frozen` enforce the finiteness and
immutability rules the rest of the package relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ShapeError

# Fixed seed for the power-iteration start vector so fitted factors are
# reproducible run to run and machine to machine.
POWER_SEED = 20190101
POWER_TOL = 1e-12
POWER_MAX_ITER = 10_000


def frozen(values, *, ndim: int, name: str, dtype=np.float64) -> np.ndarray:
    """Return a read-only C-contiguous copy of ``values``.

    Raises ``ShapeError`` on the wrong number of dimensions and
    ``ParameterError`` on NaN/Inf entries.
    """
    arr = np.array(values, dtype=dtype, copy=True, order="C")
    if arr.ndim != ndim:
        raise ShapeError(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name}: non-finite entries")
    arr.setflags(write=False)
    return arr


def as_vector(x, length: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce ``x`` to a finite float64 vector, optionally of a given length."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"{name}: expected a vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise ShapeError(f"{name}: expected length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ParameterError(f"{name}: non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Row-major ``rows x cols`` real matrix.

    ``data`` is held as a read-only 2-D array; ``flat`` exposes the row-major
    storage order used by the container format.
    """

    data: np.ndarray

    kind = "dense"

    def __post_init__(self):
        arr = frozen(self.data, ndim=2, name="DenseMatrix")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"DenseMatrix: empty shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, rows: int, cols: int, values) -> "DenseMatrix":
        flat = np.asarray(values, dtype=np.float64)
        if flat.ndim != 1 or flat.size != rows * cols:
            raise ShapeError(f"expected {rows * cols} values, got {flat.size}")
        return cls(flat.reshape(rows, cols))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    out_dim = rows
    in_dim = cols

    @property
    def flat(self) -> np.ndarray:
        return self.data.reshape(-1)

    def matvec(self, x) -> np.ndarray:
        """Fast (BLAS) product; see :func:`dense_matvec` for the reference."""
        x = as_vector(x, self.cols)
        return self.data @ x

    def param_count(self) -> int:
        return self.rows * self.cols

    def mac_count(self) -> int:
        return self.rows * self.cols

    def to_dense(self) -> "DenseMatrix":
        return self


def dense_matvec(a: DenseMatrix, x) -> np.ndarray:
    """Reference product ``y = a @ x``.

    Each ``y[i]`` is accumulated left to right over the columns with one
    rounding per multiply and per add, so the result is bit-identical to the
    textbook scalar double loop.  This is the oracle the structured kernels
    are checked against, not the fast path.
    """
    x = as_vector(x, a.cols)
    y = np.zeros(a.rows)
    cols = a.data.T
    for j in range(a.cols):
        y += cols[j] * x[j]
    return y


def frobenius_norm(a) -> float:
    arr = a.data if isinstance(a, DenseMatrix) else np.asarray(a, dtype=np.float64)
    flat = arr.reshape(-1)
    return math.sqrt(float(flat @ flat))


def rank1_fit(a: DenseMatrix, *, tol: float = POWER_TOL,
              max_iter: int = POWER_MAX_ITER, seed: int = POWER_SEED):
    """Best rank-1 approximation ``outer(u, v)`` by power iteration.

    ``v`` has unit norm and ``u = a @ v`` carries the singular value.
    Iteration runs on ``a.T @ a`` from a seeded Gaussian start and stops once
    the Rayleigh quotient changes by less than ``tol`` relative to its value,
    or after ``max_iter`` rounds.  A zero matrix gives zero vectors.
    """
    A = a.data
    m, n = A.shape
    if not A.any():
        return np.zeros(m), np.zeros(n)

    v = np.random.default_rng(seed).standard_normal(n)
    v /= np.linalg.norm(v)
    if not (A @ v).any():
        # start vector orthogonal to the row space; restart from the heaviest row
        row = A[np.argmax(np.einsum("ij,ij->i", A, A))]
        v = row / np.linalg.norm(row)

    lam_prev = -1.0
    for _ in range(max_iter):
        u = A @ v
        lam = float(u @ u)
        w = A.T @ u
        v = w / np.linalg.norm(w)
        if abs(lam - lam_prev) < tol * lam:
            break
        lam_prev = lam
    return A @ v, v


def truncated_svd(a: DenseMatrix, d: int):
    """Best rank-``d`` factor pair ``(u, v)`` with ``u @ v`` approximating ``a``.

    ``u`` is ``rows x d`` and absorbs the singular values, ``v`` is ``d x cols``
    with orthonormal rows.
    """
    if not 1 <= d <= min(a.shape):
        raise ParameterError(f"rank {d} outside [1, {min(a.shape)}]")
    U, s, Vt = np.linalg.svd(a.data, full_matrices=False)
    return DenseMatrix(U[:, :d] * s[:d]), DenseMatrix(Vt[:d])


def singular_values(a) -> np.ndarray:
    arr = a.data if isinstance(a, DenseMatrix) else np.asarray(a, dtype=np.float64)
    return np.linalg.svd(arr, compute_uv=False)


def numerical_rank(a, tol: float = 1e-10) -> int:
    """Count singular values above ``tol * sigma_max``."""
    if tol <= 0:
        raise ParameterError("tol must be positive")
    s = singular_values(a)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))
