"""Numeric kernels with a compiled fast path.

The Cython extension ``mmfeat._kernels`` is used when it was built; otherwise
(or when ``MMFEAT_PURE_PYTHON=1``) the numpy implementations in
``mmfeat._kernels_py`` are used. ``BACKEND`` tells which one is active.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("MMFEAT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def available_backends():
    """Map backend name -> kernel module for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels
        found["cython"] = _kernels
    except ImportError:
        pass
    return found


def resize_bilinear(img, out_h, out_w, impl=None):
    impl = impl or _impl
    img = np.ascontiguousarray(img, dtype=np.float64)
    return impl.resize_bilinear(img, int(out_h), int(out_w))


def resample_count(n, src_rate, dst_rate):
    """Output length round(n * dst / src), halves rounded up, in exact integer math."""
    return (2 * n * dst_rate + src_rate) // (2 * src_rate)


def resample_linear(x, src_rate, dst_rate, impl=None):
    impl = impl or _impl
    x = np.ascontiguousarray(x, dtype=np.float64)
    m = resample_count(x.shape[0], src_rate, dst_rate)
    return impl.resample_linear(x, int(src_rate), int(dst_rate), m)


def linear(weight, bias, x, impl=None):
    """Dense layer over the last axis of a rank-1 or rank-2 float32 input."""
    impl = impl or _impl
    x = np.asarray(x, dtype=np.float32)
    rows = np.ascontiguousarray(x.reshape(-1, x.shape[-1]) if x.ndim == 2 else x.reshape(1, -1))
    out = impl.linear(
        np.ascontiguousarray(weight, dtype=np.float32),
        np.ascontiguousarray(bias, dtype=np.float32),
        rows,
    )
    return out if x.ndim == 2 else out[0]


def frame_rms(x, frame, hop, impl=None):
    impl = impl or _impl
    return impl.frame_rms(np.ascontiguousarray(x, dtype=np.float32), int(frame), int(hop))


def png_unfilter(data, height, stride, bpp, impl=None):
    impl = impl or _impl
    return impl.png_unfilter(bytes(data), int(height), int(stride), int(bpp))
