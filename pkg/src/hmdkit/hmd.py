"""Hybrid matrix decomposition.

An ``m x n`` matrix is stored as a dense top block ``a_prime`` (``r x n``)
over a bottom strip of ``m - r`` rows built from two side-by-side rank-1
blocks::

    [        a_prime        ]   r rows
    [ outer(b, c) | outer(d, e) ]   m - r rows
      ceil(n/2) cols  floor(n/2) cols

For odd ``n`` the left block takes the extra column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InfeasibleError, ParameterError, ShapeError
from .linalg import DenseMatrix, as_vector, frozen, rank1_fit


def split_point(n: int) -> int:
    """Column count of the left rank-1 block (``ceil(n / 2)``)."""
    return (n + 1) // 2


def _check_dims(m: int, n: int, r: int):
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not 0 <= r < m:
        raise ParameterError(f"r must satisfy 0 <= r < m={m}, got {r}")


@dataclass(frozen=True, eq=False)
class HmdMatrix:
    a_prime: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray

    kind = "hmd"

    def __post_init__(self):
        a_prime = frozen(self.a_prime, ndim=2, name="a_prime")
        b, c, d, e = (frozen(getattr(self, k), ndim=1, name=k) for k in "bcde")
        n = c.size + e.size
        if n < 2 or c.size != split_point(n):
            raise ShapeError(f"c/e lengths {c.size}/{e.size} are not a ceil/floor split")
        if a_prime.shape[1] != n:
            raise ShapeError(f"a_prime has {a_prime.shape[1]} columns, expected {n}")
        if b.size < 1 or d.size != b.size:
            raise ShapeError(f"b and d must share a positive length, got {b.size}/{d.size}")
        for name, arr in zip(("a_prime", "b", "c", "d", "e"), (a_prime, b, c, d, e)):
            object.__setattr__(self, name, arr)

    @property
    def r(self) -> int:
        return self.a_prime.shape[0]

    @property
    def n(self) -> int:
        return self.a_prime.shape[1]

    @property
    def m(self) -> int:
        return self.r + self.b.size

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    out_dim = m
    in_dim = n

    def matvec(self, x) -> np.ndarray:
        return hmd_matvec(self, x)

    def param_count(self) -> int:
        return hmd_param_count(self)

    def mac_count(self) -> int:
        return hmd_mac_count(self)

    def to_dense(self) -> DenseMatrix:
        return hmd_reconstruct(self)

    @classmethod
    def random(cls, m: int, n: int, r: int, rng: np.random.Generator) -> "HmdMatrix":
        _check_dims(m, n, r)
        h = split_point(n)
        return cls(
            a_prime=rng.standard_normal((r, n)),
            b=rng.standard_normal(m - r),
            c=rng.standard_normal(h),
            d=rng.standard_normal(m - r),
            e=rng.standard_normal(n - h),
        )


def hmd_reconstruct(h: HmdMatrix) -> DenseMatrix:
    """Expand to the full ``m x n`` matrix."""
    lower = np.concatenate((np.outer(h.b, h.c), np.outer(h.d, h.e)), axis=1)
    return DenseMatrix(np.concatenate((h.a_prime, lower), axis=0))


def hmd_matvec(h: HmdMatrix, x) -> np.ndarray:
    """Product with ``x`` without forming the full matrix.

    The top ``r`` outputs come from ``a_prime @ x``.  The bottom strip needs
    just two dot products, one per half of ``x``, which then scale ``b``
    and ``d``.
    """
    x = as_vector(x, h.n)
    half = h.c.size
    top = h.a_prime @ x
    left = h.c @ x[:half]
    right = h.e @ x[half:]
    return np.concatenate((top, h.b * left + h.d * right))


def hmd_param_count(h: HmdMatrix) -> int:
    return h.r * h.n + 2 * (h.m - h.r) + h.n


def hmd_mac_count(h: HmdMatrix) -> int:
    # a_prime rows, two half-length dots, two scalings and the final add
    return h.r * h.n + h.n + 2 * (h.m - h.r) + (h.m - h.r)


def hmd_storage_ratio(m: int, n: int, r: int) -> float:
    """Dense parameter count over hybrid parameter count."""
    _check_dims(m, n, r)
    return (m * n) / (r * n + 2 * (m - r + n / 2))


def hmd_rank_for_compression(m: int, n: int, target: float) -> int:
    """Largest ``r`` whose storage ratio is at least ``target``.

    Raises ``InfeasibleError`` when even ``r = 0`` is too large.
    """
    if not target > 1:
        raise ParameterError(f"target must exceed 1, got {target}")
    _check_dims(m, n, 0)

    exact = Fraction(target)

    def meets(r):
        # exact rational test so the guarantee holds as an integer inequality
        return m * n >= exact * (r * n + 2 * (m - r) + n)

    if not meets(0):
        raise InfeasibleError(
            f"{m}x{n} cannot reach {target}x with HMD "
            f"(r=0 gives {hmd_storage_ratio(m, n, 0):.4f}x)"
        )
    # params(r) = r*(n-2) + 2m + n, so solve the linear budget then fix rounding
    if n == 2:
        r = m - 1
    else:
        r = math.floor((m * n / target - 2 * m - n) / (n - 2))
        r = max(0, min(r, m - 1))
    while r < m - 1 and meets(r + 1):
        r += 1
    while not meets(r):
        r -= 1
    return r


def _canonical(u: np.ndarray, v: np.ndarray):
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -u, -v
    return u, v


def hmd_fit_from_dense(a: DenseMatrix, r: int) -> HmdMatrix:
    """Project a dense matrix onto the hybrid structure.

    The top ``r`` rows are copied verbatim; each bottom block is replaced
    by its best rank-1 approximation.  ``c`` and ``e`` come out unit-norm
    with a nonnegative leading entry.
    """
    m, n = a.shape
    _check_dims(m, n, r)
    half = split_point(n)
    lower = a.data[r:]
    b, c = _canonical(*rank1_fit(DenseMatrix(lower[:, :half])))
    d, e = _canonical(*rank1_fit(DenseMatrix(lower[:, half:])))
    return HmdMatrix(a_prime=a.data[:r], b=b, c=c, d=d, e=e)
