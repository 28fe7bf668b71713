"""NPY v1.0 reading and writing for float32 feature tensors.

Only the subset this package produces is supported: little-endian float32,
C order, rank 1 to 3. Tensors are plain ``numpy.float32`` arrays.
"""

import ast
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, IoError

MAGIC = b"\x93NUMPY"
VERSION = b"\x01\x00"
ALIGN = 64
MAX_RANK = 3


def as_tensor(data, shape=None):
    """Build a float32 tensor, checking rank and finiteness."""
    t = np.ascontiguousarray(data, dtype=np.float32)
    if shape is not None:
        t = t.reshape(shape)
    if not 1 <= t.ndim <= MAX_RANK:
        raise ValueError(f"tensor rank must be 1..{MAX_RANK}, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor contains non-finite values")
    return t


def _shape_repr(shape):
    if len(shape) == 1:
        return f"({shape[0]},)"
    return "(" + ", ".join(str(d) for d in shape) + ")"


def header_bytes(shape):
    """Full preamble (magic, version, length field, padded header) for ``shape``."""
    text = "{'descr': '<f4', 'fortran_order': False, 'shape': %s, }" % _shape_repr(shape)
    fixed = len(MAGIC) + len(VERSION) + 2
    total = fixed + len(text) + 1
    pad = (-total) % ALIGN
    text = text + " " * pad + "\n"
    return MAGIC + VERSION + struct.pack("<H", len(text)) + text.encode("ascii")


def to_bytes(t):
    t = as_tensor(t)
    return header_bytes(t.shape) + t.astype("<f4", copy=False).tobytes(order="C")


def write_npy(t, path):
    payload = to_bytes(t)
    try:
        with open(path, "wb") as fh:
            fh.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def from_bytes(buf):
    buf = bytes(buf)
    if len(buf) < 10 or buf[:6] != MAGIC:
        raise FormatError("not an NPY file (bad magic)", field="magic")
    if buf[6:8] != VERSION:
        raise FormatError(f"unsupported NPY version {buf[6]}.{buf[7]}", field="version")
    (hlen,) = struct.unpack("<H", buf[8:10])
    if len(buf) < 10 + hlen:
        raise FormatError("truncated NPY header", field="header")
    try:
        header = ast.literal_eval(buf[10:10 + hlen].decode("latin1"))
    except (SyntaxError, ValueError) as exc:
        raise FormatError(f"unparseable NPY header: {exc}", field="header") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise FormatError("NPY header must hold exactly descr, fortran_order, shape", field="header")
    if header["descr"] != "<f4":
        raise FormatError(f"unsupported descr {header['descr']!r}", field="descr")
    if header["fortran_order"] is not False:
        raise FormatError("fortran_order arrays are not supported", field="fortran_order")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or not 1 <= len(shape) <= MAX_RANK
        or not all(isinstance(d, int) and d >= 0 for d in shape)
    ):
        raise FormatError(f"unsupported shape {shape!r}", field="shape")
    payload = buf[10 + hlen:]
    expected = 4 * int(np.prod(shape, dtype=np.int64))
    if len(payload) != expected:
        raise FormatError(
            f"payload is {len(payload)} bytes, shape {shape} needs {expected}", field="payload"
        )
    return np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(shape)


def read_npy(path):
    try:
        buf = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return from_bytes(buf)
