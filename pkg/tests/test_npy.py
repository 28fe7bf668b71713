import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from mmfeat.errors import FormatError, IoError
from mmfeat.npy import as_tensor, from_bytes, header_bytes, read_npy, to_bytes, write_npy
from tools import ref_npy_reader

GOLDEN_HEADER = "{'descr': '<f4', 'fortran_order': False, 'shape': (3,), }"


def test_golden_shape3_layout(tmp_path):
    path = tmp_path / "g.npy"
    write_npy(np.array([1.0, 2.0, 3.0], np.float32), path)
    blob = path.read_bytes()
    # 10 fixed bytes + 57-char header + newline = 68, padded to 128
    assert len(blob) == 128 + 12
    assert blob[:8] == bytes([0x93, 0x4E, 0x55, 0x4D, 0x50, 0x59, 0x01, 0x00])
    assert struct.unpack("<H", blob[8:10])[0] == 118
    assert blob[10:128] == (GOLDEN_HEADER.ljust(117) + "\n").encode()
    assert blob[128:] == bytes.fromhex("0000803f" "00000040" "00004040")


def test_empty_tensor(tmp_path):
    path = tmp_path / "e.npy"
    write_npy(np.zeros(0, np.float32), path)
    assert len(path.read_bytes()) == 128
    assert read_npy(path).shape == (0,)


def test_row_major_layout():
    blob = to_bytes(np.array([[1, 2], [3, 4]], np.float32))
    assert b"'shape': (2, 2), }" in blob[:128]
    assert struct.unpack("<f", blob[128 + 8:128 + 12])[0] == 3.0  # element [1][0]


@pytest.mark.parametrize("shape", [(1,), (5,), (2, 3), (4, 1, 2), (1000, 1000, 1000)])
def test_preamble_alignment(shape):
    pre = header_bytes(shape)
    assert len(pre) % 64 == 0 and pre[-1:] == b"\n"


def test_matches_numpy_writer():
    for arr in (np.arange(3, dtype=np.float32), np.ones((2, 5), np.float32), np.zeros((3, 1, 4), np.float32)):
        buf = io.BytesIO()
        np.save(buf, arr)
        assert to_bytes(arr) == buf.getvalue()


tensors = hnp.arrays(
    np.float32,
    hnp.array_shapes(min_dims=1, max_dims=3, min_side=0, max_side=6),
    elements=st.floats(-1e6, 1e6, width=32),
)


@settings(max_examples=100, deadline=None)
@given(tensors)
def test_round_trip(tmp_path_factory, t):
    path = tmp_path_factory.mktemp("rt") / "t.npy"
    write_npy(t, path)
    back = read_npy(path)
    assert back.shape == t.shape and back.tobytes() == t.tobytes()
    shape, values, offset = ref_npy_reader.read(path)
    assert shape == t.shape and values == t.reshape(-1).tolist() and offset % 64 == 0
    assert path.read_bytes() == to_bytes(t.copy())


def _with_header(text, payload=b""):
    text = text + " " * ((-(10 + len(text) + 1)) % 64) + "\n"
    return b"\x93NUMPY\x01\x00" + struct.pack("<H", len(text)) + text.encode() + payload


@pytest.mark.parametrize(
    "blob, field",
    [
        (_with_header("{'descr': '<f8', 'fortran_order': False, 'shape': (1,), }", b"\0" * 8), "descr"),
        (_with_header("{'descr': '<f4', 'fortran_order': True, 'shape': (1,), }", b"\0" * 4), "fortran_order"),
        (_with_header("{'descr': '<f4', 'fortran_order': False, 'shape': (2,), }", b"\0" * 4), "payload"),
        (_with_header("{'descr': '<f4', 'fortran_order': False, 'shape': (1, 1, 1, 1), }", b"\0" * 4), "shape"),
        (b"\x93NUMPY\x02\x00" + b"\0" * 60, "version"),
        (b"PK\x03\x04" + b"\0" * 60, "magic"),
    ],
)
def test_rejections(blob, field):
    with pytest.raises(FormatError) as info:
        from_bytes(blob)
    assert info.value.field == field
    assert field in str(info.value) or field in ("payload", "magic", "version")


def test_unwritable_path(tmp_path):
    with pytest.raises(IoError):
        write_npy(np.ones(2, np.float32), tmp_path / "missing" / "x.npy")


def test_tensor_invariants():
    with pytest.raises(ValueError):
        as_tensor(np.ones((1, 1, 1, 1)))
    with pytest.raises(ValueError):
        as_tensor([1.0, float("nan")])
    assert as_tensor([1, 2, 3, 4], shape=(2, 2)).dtype == np.float32
