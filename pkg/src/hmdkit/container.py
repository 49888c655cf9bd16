"""``HMDC1`` weight container.

Layout (all integers little-endian)::

    0   5 bytes   magic b"HMDC1"
    5   3 bytes   zero padding
    8   uint64    manifest length L in bytes
    16  L bytes   manifest, UTF-8 JSON
        ...       zero padding to an 8-byte boundary
        payload   arrays in manifest order, each zero-padded to 8 bytes

Float arrays are IEEE-754 binary64 (``<f8``); CSR index arrays are unsigned
32-bit (``<u4``).  The manifest records kind, dimensions, the array list with
shapes and dtypes, the index width, the gate order (cells) and the total
payload size, which must match the bytes that follow exactly.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .errors import (BadMagicError, HmdError, LengthMismatchError, ManifestError,
                     TruncatedError, UnknownKindError)
from .hmd import HmdMatrix
from .linalg import DenseMatrix
from .lowrank import LmfMatrix
from .lstm import GATE_ORDER, LstmCell
from .sparse import CsrMatrix

MAGIC = b"HMDC1"
HEADER = struct.Struct("<5s3xQ")
ALIGN = 8
INDEX_WIDTH = 32
OPERATOR_KINDS = ("dense", "hmd", "lmf", "csr")
DTYPES = {"f64": np.dtype("<f8"), "u32": np.dtype("<u4")}


def _pad(size: int) -> int:
    return -size % ALIGN


def _operator_parts(op):
    """(dims, [(name, dtype_tag, array)]) for one operator."""
    if isinstance(op, DenseMatrix):
        return {"rows": op.rows, "cols": op.cols}, [("data", "f64", op.data)]
    if isinstance(op, HmdMatrix):
        dims = {"m": op.m, "n": op.n, "r": op.r}
        return dims, [(k, "f64", getattr(op, k)) for k in ("a_prime", "b", "c", "d", "e")]
    if isinstance(op, LmfMatrix):
        return {"m": op.m, "n": op.n, "d": op.d}, [("u", "f64", op.u), ("v", "f64", op.v)]
    if isinstance(op, CsrMatrix):
        if op.n > 2**32 or op.nnz >= 2**32:
            raise ValueError("CSR too large for 32-bit indices")
        dims = {"m": op.m, "n": op.n, "nnz": op.nnz}
        return dims, [("values", "f64", op.values), ("col_idx", "u32", op.col_idx),
                      ("row_ptr", "u32", op.row_ptr)]
    raise TypeError(f"cannot serialize {type(op).__name__}")


def to_bytes(obj) -> bytes:
    """Encode an operator or an :class:`LstmCell`."""
    if isinstance(obj, LstmCell):
        ops = {}
        arrays = []
        for slot in ("w_x", "w_h"):
            op = getattr(obj, slot)
            dims, parts = _operator_parts(op)
            ops[slot] = {"kind": op.kind, "dims": dims}
            arrays += [(f"{slot}.{name}", tag, arr) for name, tag, arr in parts]
        arrays.append(("bias", "f64", obj.bias))
        manifest = {"kind": "lstm", "gate_order": GATE_ORDER,
                    "dims": {"input_dim": obj.input_dim, "hidden_dim": obj.hidden_dim},
                    "operators": ops}
    else:
        dims, arrays = _operator_parts(obj)
        manifest = {"kind": obj.kind, "dims": dims}

    chunks = []
    entries = []
    for name, tag, arr in arrays:
        raw = np.ascontiguousarray(arr, dtype=DTYPES[tag]).tobytes()
        entries.append({"name": name, "dtype": tag, "shape": list(arr.shape)})
        chunks.append(raw + b"\0" * _pad(len(raw)))
    payload = b"".join(chunks)
    manifest.update(byte_order="little", index_width=INDEX_WIDTH, arrays=entries,
                    payload_bytes=len(payload))
    text = json.dumps(manifest, sort_keys=True).encode()
    head = HEADER.pack(MAGIC, len(text)) + text
    return head + b"\0" * _pad(len(head)) + payload


def _array_nbytes(entry) -> int:
    try:
        dtype = DTYPES[entry["dtype"]]
        shape = [int(s) for s in entry["shape"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ManifestError(f"bad array entry {entry!r}") from exc
    if any(s < 0 for s in shape):
        raise ManifestError(f"negative shape in {entry!r}")
    return int(np.prod(shape, dtype=np.int64)) * dtype.itemsize


def _build_operator(kind, dims, arrays):
    if kind not in OPERATOR_KINDS:
        raise UnknownKindError(f"unknown operator kind {kind!r}")
    try:
        if kind == "dense":
            op = DenseMatrix(arrays["data"])
            expect = {"rows": op.rows, "cols": op.cols}
        elif kind == "hmd":
            op = HmdMatrix(*(arrays[k] for k in ("a_prime", "b", "c", "d", "e")))
            expect = {"m": op.m, "n": op.n, "r": op.r}
        elif kind == "lmf":
            op = LmfMatrix(arrays["u"], arrays["v"])
            expect = {"m": op.m, "n": op.n, "d": op.d}
        else:
            op = CsrMatrix(arrays["values"], arrays["col_idx"], arrays["row_ptr"], dims["n"])
            expect = {"m": op.m, "n": op.n, "nnz": op.nnz}
    except KeyError as exc:
        raise ManifestError(f"{kind}: missing {exc}") from exc
    except (ValueError, HmdError) as exc:
        raise ManifestError(f"{kind}: {exc}") from exc
    if dims != expect:
        raise ManifestError(f"{kind}: manifest dims {dims} disagree with arrays {expect}")
    return op


def from_bytes(buf: bytes):
    if len(buf) < len(MAGIC) or buf[:len(MAGIC)] != MAGIC:
        raise BadMagicError("not an HMDC1 container")
    if len(buf) < HEADER.size:
        raise TruncatedError("file ends inside the header")
    _, mlen = HEADER.unpack_from(buf)
    start = HEADER.size + mlen
    if len(buf) < start:
        raise TruncatedError("file ends inside the manifest")
    try:
        manifest = json.loads(buf[HEADER.size:start].decode())
        kind = manifest["kind"]
        entries = manifest["arrays"]
        declared = int(manifest["payload_bytes"])
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
        raise ManifestError(f"unreadable manifest: {exc}") from exc
    if kind != "lstm" and kind not in OPERATOR_KINDS:
        raise UnknownKindError(f"unknown kind {kind!r}")
    if manifest.get("index_width", INDEX_WIDTH) != INDEX_WIDTH:
        raise ManifestError(f"unsupported index width {manifest['index_width']}")

    sizes = [_array_nbytes(e) for e in entries]
    if sum(s + _pad(s) for s in sizes) != declared:
        raise ManifestError("array list does not add up to payload_bytes")
    start += _pad(start)
    payload = buf[start:]
    if len(payload) != declared:
        raise LengthMismatchError(f"payload is {len(payload)} bytes, manifest declares {declared}")

    arrays = {}
    offset = 0
    for entry, size in zip(entries, sizes):
        dtype = DTYPES[entry["dtype"]]
        raw = np.frombuffer(payload, dtype=dtype, count=size // dtype.itemsize, offset=offset)
        native = np.float64 if entry["dtype"] == "f64" else np.int64
        arrays[entry["name"]] = raw.astype(native).reshape(entry["shape"])
        offset += size + _pad(size)

    if kind != "lstm":
        return _build_operator(kind, manifest.get("dims"), arrays)

    if manifest.get("gate_order") != GATE_ORDER:
        raise ManifestError(f"unsupported gate order {manifest.get('gate_order')!r}")
    try:
        ops = {}
        for slot in ("w_x", "w_h"):
            spec = manifest["operators"][slot]
            prefix = slot + "."
            sub = {k[len(prefix):]: v for k, v in arrays.items() if k.startswith(prefix)}
            ops[slot] = _build_operator(spec["kind"], spec["dims"], sub)
        cell = LstmCell(ops["w_x"], ops["w_h"], arrays["bias"])
    except (KeyError, TypeError) as exc:
        raise ManifestError(f"lstm: missing {exc}") from exc
    except ValueError as exc:
        raise ManifestError(f"lstm: {exc}") from exc
    if manifest.get("dims") != {"input_dim": cell.input_dim, "hidden_dim": cell.hidden_dim}:
        raise ManifestError("lstm: manifest dims disagree with operators")
    return cell


def save_container(path, obj) -> None:
    data = to_bytes(obj)
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def load_container(path):
    with open(path, "rb") as f:
        return from_bytes(f.read())
