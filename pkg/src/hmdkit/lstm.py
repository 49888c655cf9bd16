"""LSTM cell whose two weight matrices are interchangeable operators.

Gate rows are fused in the order ``i, f, g, o``: ``w_x`` is ``4h x input``
and ``w_h`` is ``4h x h``, and each is compressed as one matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, Union, runtime_checkable

import numpy as np

from .errors import ParameterError, ShapeError
from .hmd import HmdMatrix, hmd_fit_from_dense, hmd_rank_for_compression
from .linalg import DenseMatrix, as_vector, frozen
from .lowrank import LmfMatrix, lmf_fit_from_dense, lmf_rank_for_compression
from .sparse import CsrMatrix, prune_by_magnitude

GATE_ORDER = "ifgo"
SCHEMES = ("hmd", "lmf", "csr")


@runtime_checkable
class WeightOperator(Protocol):
    kind: str

    @property
    def out_dim(self) -> int: ...

    @property
    def in_dim(self) -> int: ...

    def matvec(self, x) -> np.ndarray: ...

    def param_count(self) -> int: ...

    def mac_count(self) -> int: ...

    def to_dense(self) -> DenseMatrix: ...


Operator = Union[DenseMatrix, HmdMatrix, LmfMatrix, CsrMatrix]


def sigmoid(z):
    # tanh form avoids overflow in exp for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True, eq=False)
class LstmState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden_dim: int) -> "LstmState":
        return cls(np.zeros(hidden_dim), np.zeros(hidden_dim))


@dataclass(frozen=True, eq=False)
class LstmCell:
    w_x: Operator
    w_h: Operator
    bias: np.ndarray

    def __post_init__(self):
        hidden = self.w_h.in_dim
        if hidden < 1:
            raise ShapeError("hidden_dim must be >= 1")
        if self.w_h.out_dim != 4 * hidden:
            raise ShapeError(f"w_h is {self.w_h.shape}, expected ({4 * hidden}, {hidden})")
        if self.w_x.out_dim != 4 * hidden:
            raise ShapeError(f"w_x has {self.w_x.out_dim} rows, expected {4 * hidden}")
        bias = frozen(self.bias, ndim=1, name="bias")
        if bias.size != 4 * hidden:
            raise ShapeError(f"bias has {bias.size} entries, expected {4 * hidden}")
        object.__setattr__(self, "bias", bias)

    @property
    def input_dim(self) -> int:
        return self.w_x.in_dim

    @property
    def hidden_dim(self) -> int:
        return self.w_h.in_dim

    @classmethod
    def random(cls, input_dim: int, hidden_dim: int, rng: np.random.Generator,
               scale: float = 1.0) -> "LstmCell":
        """Dense cell with N(0, scale^2 / fan_in) weights and N(0, 0.01) biases."""
        w_x = rng.standard_normal((4 * hidden_dim, input_dim)) * scale / np.sqrt(input_dim)
        w_h = rng.standard_normal((4 * hidden_dim, hidden_dim)) * scale / np.sqrt(hidden_dim)
        bias = 0.1 * rng.standard_normal(4 * hidden_dim)
        return cls(DenseMatrix(w_x), DenseMatrix(w_h), bias)


def lstm_step(cell: LstmCell, x_t, state: LstmState) -> LstmState:
    x_t = as_vector(x_t, cell.input_dim, name="x_t")
    hd = cell.hidden_dim
    z = cell.w_x.matvec(x_t) + cell.w_h.matvec(state.h) + cell.bias
    i = sigmoid(z[:hd])
    f = sigmoid(z[hd:2 * hd])
    g = np.tanh(z[2 * hd:3 * hd])
    o = sigmoid(z[3 * hd:])
    c = f * state.c + i * g
    return LstmState(o * np.tanh(c), c)


def lstm_forward(cell: LstmCell, sequence: Sequence, init: LstmState | None = None) -> list[LstmState]:
    """Run the cell over ``sequence`` and return the state after every step."""
    state = LstmState.zeros(cell.hidden_dim) if init is None else init
    states = []
    for x_t in sequence:
        state = lstm_step(cell, x_t, state)
        states.append(state)
    return states


def compress_operator(a: DenseMatrix, scheme: str, target: float) -> Operator:
    """Fit one dense matrix with the scheme's planner at ``target``."""
    m, n = a.shape
    if scheme == "hmd":
        return hmd_fit_from_dense(a, hmd_rank_for_compression(m, n, target))
    if scheme == "lmf":
        return lmf_fit_from_dense(a, lmf_rank_for_compression(m, n, target))
    if scheme == "csr":
        return prune_by_magnitude(a, target)
    if scheme == "dense":
        return a
    raise ParameterError(f"unknown scheme {scheme!r}")


def compress_cell(cell: LstmCell, scheme: str, target: float) -> LstmCell:
    """Compress ``w_x`` and ``w_h`` independently; biases are kept as is."""
    if not (isinstance(cell.w_x, DenseMatrix) and isinstance(cell.w_h, DenseMatrix)):
        raise ParameterError("compress_cell expects dense weight operators")
    return LstmCell(
        compress_operator(cell.w_x, scheme, target),
        compress_operator(cell.w_h, scheme, target),
        cell.bias,
    )


def densify_cell(cell: LstmCell) -> LstmCell:
    """Same cell with every operator expanded to a dense matrix."""
    return LstmCell(cell.w_x.to_dense(), cell.w_h.to_dense(), cell.bias)


def cell_weight_count(cell: LstmCell) -> int:
    return cell.w_x.param_count() + cell.w_h.param_count()


def cell_param_count(cell: LstmCell) -> int:
    return cell_weight_count(cell) + cell.bias.size


def cell_mac_count(cell: LstmCell, seq_len: int) -> int:
    """Weight multiply-accumulates over ``seq_len`` steps."""
    return seq_len * (cell.w_x.mac_count() + cell.w_h.mac_count())


def cell_elementwise_ops(cell: LstmCell, seq_len: int) -> int:
    """Non-matvec work per the step above, one unit per element per operation.

    Per step: summing the two products and the bias (8h), four activations
    (4h), the cell update (3h), ``tanh(c)`` (h) and the output product (h).
    """
    return seq_len * 17 * cell.hidden_dim
