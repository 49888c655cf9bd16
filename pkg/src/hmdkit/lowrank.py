"""Low-rank factorization baseline: ``A ~ u @ v`` with inner rank ``d``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InfeasibleError, ParameterError, ShapeError
from .linalg import DenseMatrix, as_vector, frozen, truncated_svd


@dataclass(frozen=True, eq=False)
class LmfMatrix:
    u: np.ndarray  # m x d
    v: np.ndarray  # d x n

    kind = "lmf"

    def __post_init__(self):
        u = frozen(self.u, ndim=2, name="u")
        v = frozen(self.v, ndim=2, name="v")
        if u.shape[1] != v.shape[0]:
            raise ShapeError(f"inner dims differ: u {u.shape}, v {v.shape}")
        if not 1 <= u.shape[1] <= min(u.shape[0], v.shape[1]):
            raise ShapeError(f"rank {u.shape[1]} outside [1, min(m, n)]")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def m(self) -> int:
        return self.u.shape[0]

    @property
    def n(self) -> int:
        return self.v.shape[1]

    @property
    def d(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    out_dim = m
    in_dim = n

    def matvec(self, x) -> np.ndarray:
        return lmf_matvec(self, x)

    def param_count(self) -> int:
        return lmf_param_count(self)

    def mac_count(self) -> int:
        return lmf_mac_count(self)

    def to_dense(self) -> DenseMatrix:
        return DenseMatrix(self.u @ self.v)


def lmf_matvec(l: LmfMatrix, x) -> np.ndarray:
    x = as_vector(x, l.n)
    return l.u @ (l.v @ x)


def lmf_param_count(l: LmfMatrix) -> int:
    return l.d * (l.m + l.n)


def lmf_mac_count(l: LmfMatrix) -> int:
    return l.d * (l.m + l.n)


def lmf_rank_for_compression(m: int, n: int, target: float) -> int:
    """Largest ``d`` with ``m*n / (d*(m+n)) >= target``."""
    if not target > 0:
        raise ParameterError(f"target must be positive, got {target}")
    d = math.floor(Fraction(m * n) / (Fraction(target) * (m + n)))
    if d < 1:
        raise InfeasibleError(f"{m}x{n} cannot reach {target}x with rank >= 1")
    return min(d, m, n)


def lmf_fit_from_dense(a: DenseMatrix, d: int) -> LmfMatrix:
    u, v = truncated_svd(a, d)
    return LmfMatrix(u.data, v.data)
