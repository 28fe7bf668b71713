"""Reference (numpy / pure Python) implementations of the numeric kernels.

Used when the compiled extension is unavailable or disabled. Contracts match
``_kernels.pyx`` exactly; see ``mmfeat.kernels`` for the public wrappers.
"""

import numpy as np


def _axis_weights(n_in, n_out):
    scale = n_in / n_out
    pos = (np.arange(n_out, dtype=np.float64) + 0.5) * scale - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize_bilinear(img, out_h, out_w):
    """float64 (H, W, C) -> float64 (out_h, out_w, C), center-aligned, edge-clamped."""
    h, w, _ = img.shape
    y0, y1, fy = _axis_weights(h, out_h)
    x0, x1, fx = _axis_weights(w, out_w)
    fx = fx[None, :, None]
    fy = fy[:, None, None]
    top = img[y0][:, x0] * (1.0 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1.0 - fx) + img[y1][:, x1] * fx
    return np.ascontiguousarray(top * (1.0 - fy) + bottom * fy)


def resample_linear(x, src_rate, dst_rate, m):
    n = x.shape[0]
    pos = (np.arange(m, dtype=np.float64) * src_rate) / dst_rate
    lo = np.floor(pos).astype(np.intp)
    edge = lo >= n - 1
    lo_c = np.minimum(lo, n - 1)
    hi_c = np.minimum(lo + 1, n - 1)
    frac = pos - lo
    out = x[lo_c] * (1.0 - frac) + x[hi_c] * frac
    out[edge] = x[n - 1]
    return out


def linear(weight, bias, x):
    """float32 (m, k), (m,), (r, k) -> float32 (r, m); float64 accumulation."""
    acc = np.dot(x.astype(np.float64), weight.astype(np.float64).T)
    acc += bias.astype(np.float64)
    with np.errstate(over="ignore"):  # overflow becomes inf; the engine rejects it
        return acc.astype(np.float32)


def frame_rms(x, frame, hop):
    n = x.shape[0]
    if n < frame:
        return np.zeros(0, dtype=np.float32)
    sq = x.astype(np.float64) ** 2
    windows = np.lib.stride_tricks.sliding_window_view(sq, frame)[::hop]
    return np.sqrt(windows.sum(axis=1) / frame).astype(np.float32)


def _paeth(a, b, c):
    p = a + b - c
    pa = abs(p - a)
    pb = abs(p - b)
    pc = abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def png_unfilter(data, height, stride, bpp):
    """Undo PNG scanline filters. ``data`` holds ``height`` rows of 1 + stride bytes.

    Returns the raw pixel bytes, or raises ValueError on an unknown filter type.
    """
    out = bytearray(height * stride)
    prev = bytearray(stride)
    for row in range(height):
        base = row * (stride + 1)
        ftype = data[base]
        line = bytearray(data[base + 1:base + 1 + stride])
        if ftype == 0:
            pass
        elif ftype == 1:
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:
            for i in range(stride):
                line[i] = (line[i] + prev[i]) & 0xFF
        elif ftype == 3:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                upleft = prev[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + _paeth(left, prev[i], upleft)) & 0xFF
        else:
            raise ValueError(f"unknown PNG filter type {ftype} on row {row}")
        out[row * stride:(row + 1) * stride] = line
        prev = line
    return bytes(out)
