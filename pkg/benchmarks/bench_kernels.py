"""Time every hot kernel under each available backend.

    python benchmarks/bench_kernels.py [--repeat N] [--json]

Inputs are sized like a realistic single sample: a 640x480 photo resized to
224x224, one second of 44.1 kHz audio, a 4096 -> 2048 dense layer. Results are
the best of N runs.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from mmfeat import kernels


def workloads(rng):
    img = rng.uniform(0, 255, (480, 640, 3))
    wave = rng.uniform(-1, 1, 44100)
    weight = rng.uniform(-1, 1, (2048, 4096)).astype(np.float32)
    bias = rng.uniform(-1, 1, 2048).astype(np.float32)
    x = rng.uniform(-1, 1, (1, 4096)).astype(np.float32)
    audio = rng.uniform(-1, 1, 160000).astype(np.float32)
    height, stride, bpp = 256, 256 * 3, 3
    png = bytearray(rng.integers(0, 256, height * (stride + 1), dtype=np.uint8).tobytes())
    for row in range(height):
        png[row * (stride + 1)] = row % 5
    png = bytes(png)
    return {
        "resize_bilinear 480x640 -> 224x224": lambda impl: kernels.resize_bilinear(img, 224, 224, impl=impl),
        "resample_linear 44.1k -> 16k": lambda impl: kernels.resample_linear(wave, 44100, 16000, impl=impl),
        "linear 4096 -> 2048": lambda impl: kernels.linear(weight, bias, x, impl=impl),
        "frame_rms 160k, 400/160": lambda impl: kernels.frame_rms(audio, 400, 160, impl=impl),
        "png_unfilter 256x256 RGB": lambda impl: kernels.png_unfilter(png, height, stride, bpp, impl=impl),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", action="store_true", help="print machine-readable results")
    ns = parser.parse_args(argv)

    backends = kernels.available_backends()
    results = {}
    for name, fn in workloads(np.random.default_rng(0)).items():
        row = {}
        for backend, impl in sorted(backends.items()):
            fn(impl)  # warm up
            row[backend] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=ns.repeat))
        results[name] = row

    if ns.json:
        json.dump(results, sys.stdout, indent=2)
        print()
        return 0
    names = sorted(backends)
    print(f"{'kernel':<38}" + "".join(f"{b + ' (ms)':>14}" for b in names)
          + ("   speedup" if len(names) > 1 else ""))
    for kernel, row in results.items():
        line = f"{kernel:<38}" + "".join(f"{row[b] * 1e3:>14.3f}" for b in names)
        if "cython" in row:
            line += f"   {row['python'] / row['cython']:>6.1f}x"
        print(line)
    if "cython" not in backends:
        print("compiled backend not built; only the fallback was timed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
