"""Hybrid matrix decomposition and baseline compressed operators for RNN inference."""

from .errors import (BadMagicError, FormatError, HmdError, InfeasibleError,
                     LengthMismatchError, ManifestError, ParameterError, ShapeError,
                     TruncatedError, UnknownKindError)
from .hmd import (HmdMatrix, hmd_fit_from_dense, hmd_mac_count, hmd_matvec,
                  hmd_param_count, hmd_rank_for_compression, hmd_reconstruct,
                  hmd_storage_ratio)
from .linalg import (DenseMatrix, as_vector, dense_matvec, frobenius_norm,
                     numerical_rank, rank1_fit, truncated_svd)
from .lowrank import (LmfMatrix, lmf_fit_from_dense, lmf_mac_count, lmf_matvec,
                      lmf_param_count, lmf_rank_for_compression)
from .lstm import (LstmCell, LstmState, WeightOperator, cell_elementwise_ops,
                   cell_mac_count, cell_param_count, compress_cell, densify_cell,
                   lstm_forward, lstm_step)
from .sparse import CsrMatrix, csr_matvec, csr_param_count, prune_by_magnitude

__version__ = "0.1.0"

__all__ = [
    "as_vector",
    "BadMagicError",
    "cell_elementwise_ops",
    "cell_mac_count",
    "cell_param_count",
    "compress_cell",
    "csr_matvec",
    "csr_param_count",
    "CsrMatrix",
    "dense_matvec",
    "DenseMatrix",
    "densify_cell",
    "FormatError",
    "frobenius_norm",
    "hmd_fit_from_dense",
    "hmd_mac_count",
    "hmd_matvec",
    "hmd_param_count",
    "hmd_rank_for_compression",
    "hmd_reconstruct",
    "hmd_storage_ratio",
    "HmdError",
    "HmdMatrix",
    "InfeasibleError",
    "LengthMismatchError",
    "lmf_fit_from_dense",
    "lmf_mac_count",
    "lmf_matvec",
    "lmf_param_count",
    "lmf_rank_for_compression",
    "LmfMatrix",
    "lstm_forward",
    "lstm_step",
    "LstmCell",
    "LstmState",
    "ManifestError",
    "numerical_rank",
    "ParameterError",
    "prune_by_magnitude",
    "rank1_fit",
    "ShapeError",
    "truncated_svd",
    "TruncatedError",
    "UnknownKindError",
    "WeightOperator",
]
