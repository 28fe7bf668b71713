"""Naive, independently written reference implementations used as test oracles.

Nothing here imports the package under test. Resampling is done by direct
summation over every source sample with a triangular (tent) weight, which is
mathematically equal to clamped linear interpolation but shares no code path.
"""

import math
import struct


def f32(x):
    return struct.unpack("<f", struct.pack("<f", x))[0]


def _tent(d):
    return max(0.0, 1.0 - abs(d))


def bilinear_direct(img, out_h, out_w):
    """img: nested lists [H][W][C] -> [out_h][out_w][C] via direct tent summation."""
    h, w, c = len(img), len(img[0]), len(img[0][0])
    out = []
    for i in range(out_h):
        sy = min(max((i + 0.5) * h / out_h - 0.5, 0.0), h - 1)
        row = []
        for j in range(out_w):
            sx = min(max((j + 0.5) * w / out_w - 0.5, 0.0), w - 1)
            px = []
            for ch in range(c):
                total = 0.0
                for y in range(h):
                    wy = _tent(sy - y)
                    if wy == 0.0:
                        continue
                    for x in range(w):
                        total += wy * _tent(sx - x) * img[y][x][ch]
                px.append(total)
            row.append(px)
        out.append(row)
    return out


def resample_direct(x, src, dst):
    n = len(x)
    m = math.floor(n * dst / src + 0.5)
    out = []
    for j in range(m):
        pos = min(j * src / dst, n - 1)
        out.append(sum(_tent(pos - i) * x[i] for i in range(n)))
    return out


def _rank(v):
    r = 0
    while isinstance(v, list):
        r += 1
        v = v[0] if v else None
    return r


def _flatten(v):
    if isinstance(v, list):
        return [e for item in v for e in _flatten(item)]
    return [v]


def naive_layer(kind, params, x):
    """One layer on nested Python lists, float64 accumulation, float32 results."""
    if kind == "flatten":
        return [f32(e) for e in _flatten(x)]
    if kind == "linear":
        weight, bias = params["weight"], params["bias"]

        def dense(vec):
            return [f32(sum(weight[i][j] * vec[j] for j in range(len(vec))) + bias[i]) for i in range(len(weight))]

        return dense(x) if _rank(x) == 1 else [dense(r) for r in x]
    if kind == "relu":
        return [naive_layer(kind, params, e) for e in x] if _rank(x) > 1 else [e if e > 0 else 0.0 for e in x]
    if kind == "tanh":
        return [naive_layer(kind, params, e) for e in x] if _rank(x) > 1 else [f32(math.tanh(e)) for e in x]
    if kind == "mean_pool":
        return [f32(sum(r[j] for r in x) / len(x)) for j in range(len(x[0]))]
    if kind == "l2_normalize":
        if _rank(x) > 1:
            return [naive_layer(kind, params, r) for r in x]
        norm = math.sqrt(sum(e * e for e in x) + params.get("eps", 1e-12))
        return [f32(e / norm) for e in x]
    if kind == "embedding":
        return [[f32(v) for v in params["table"][t]] for t in x]
    if kind == "frame_rms":
        frame, hop = params["frame"], params["hop"]
        out = []
        t = 0
        while t * hop + frame <= len(x):
            seg = x[t * hop:t * hop + frame]
            out.append(f32(math.sqrt(sum(e * e for e in seg) / frame)))
            t += 1
        return out
    raise ValueError(kind)


def naive_forward(layers, x):
    """layers: list of (name, kind, params). Returns {name: nested lists}."""
    acts = {}
    for name, kind, params in layers:
        x = naive_layer(kind, params, x)
        acts[name] = x
    return acts
