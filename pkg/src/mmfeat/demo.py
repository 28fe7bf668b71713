"""Synthetic demo datasets with a matching toy model registry.

    python -m mmfeat.demo {visual_text,audio_text,reviews} DIR

Each scenario writes its inputs, ``registry.json`` and ``config.yml`` into DIR.
Then run ``mmfeat extract --config DIR/config.yml``.

Generation rules (all values exact, so features can be checked by hand):

* Images ``item<k>.ppm``, k = 0..9: 4x4 binary PPM where the pixel at row y,
  column x is R = 10k + 20x, G = 10k + 20y, B = 10k + 5(x + y).
* Tracks ``track<k>.wav``, k = 0..4: 8000 Hz mono PCM-16, 512 samples of a
  1 kHz square wave (4 samples at +A, 4 at -A) with A = 4096 (k + 1), i.e.
  amplitude (k + 1) / 8 after decoding.
* Weights: ``toy_weight(rows, cols, seed)`` below; every entry is a multiple of
  1/20 so results are easy to reproduce.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
from pathlib import Path

import yaml

DESCRIPTIONS = [
    "Red cotton shirt for summer, size 42!",
    "Blue denim jeans; slim fit",
    "Black leather boots (winter)",
    "White linen dress 2023 collection",
    "Green wool sweater, warm and soft",
    "Yellow rain jacket with hood",
    "Grey running shoes - lightweight",
    "Brown leather belt #classic",
    "Pink silk scarf for spring",
    "Navy cotton shorts for summer",
]
GENRES = ["rock guitar song", "jazz piano trio", "classical string quartet", "electronic dance beat", "folk acoustic ballad"]
REVIEWS = [
    ("u1", "item0", "5", "great shirt, fits perfectly"),
    ("u1", "item2", "2", "boots broke after a week"),
    ("u2", "item0", "4", "good quality cotton"),
    ("u2", "item5", "1", "terrible jacket, not waterproof"),
    ("u3", "item9", "5", "love these shorts"),
    ("u3", "item2", "3", "boots are ok"),
]

EMBED_DIM = 8


def toy_weight(rows, cols, seed):
    return [[((seed + 7 * i + 3 * j) % 11 - 5) / 20 for j in range(cols)] for i in range(rows)]


def toy_bias(rows, seed):
    return [((seed + 3 * i) % 5 - 2) / 20 for i in range(rows)]


def image_pixel(k, y, x):
    return (10 * k + 20 * x, 10 * k + 20 * y, 10 * k + 5 * (x + y))


def ppm_bytes(k, size=4):
    body = bytes(c for y in range(size) for x in range(size) for c in image_pixel(k, y, x))
    return f"P6\n{size} {size}\n255\n".encode("ascii") + body


def square_tone(k, n=512):
    amp = 4096 * (k + 1)
    return [amp if (i % 8) < 4 else -amp for i in range(n)]


def wav_bytes(samples, rate=8000, channels=1):
    data = struct.pack(f"<{len(samples)}h", *samples)
    fmt = struct.pack("<HHIIHH", 1, channels, rate, rate * channels * 2, channels * 2, 16)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(data)) + data
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def _vocab():
    from .dataset import clean_text

    words = sorted({w for text in DESCRIPTIONS + GENRES + [r[3] for r in REVIEWS] for w in clean_text(text).split()})
    vocab = {"<unk>": 0}
    for word in words:
        vocab[word] = len(vocab)
    return vocab


def registry_doc():
    vocab = _vocab()
    rows = len(vocab)
    table = [[((5 * r + 3 * c) % 13 - 6) / 6 for c in range(EMBED_DIM)] for r in range(rows)]
    text_layers = [
        {"name": "emb", "kind": "embedding", "table": table},
        {"name": "pool", "kind": "mean_pool"},
        {"name": "norm", "kind": "l2_normalize"},
    ]

    def review_variant(seed):
        return {"layers": text_layers[:2] + [
            {"name": "head", "kind": "linear", "weight": toy_weight(3, EMBED_DIM, seed), "bias": toy_bias(3, seed)},
            {"name": "act", "kind": "tanh"},
        ]}

    return {
        "models": {
            "toy_visual": {
                "modality": "visual",
                "input": {"shape": [3, 3, 3], "mean": [0.5, 0.5, 0.5], "std": [0.25, 0.25, 0.25]},
                "variants": {"default": {"layers": [
                    {"name": "flat", "kind": "flatten"},
                    {"name": "fc1", "kind": "linear", "weight": toy_weight(4, 27, 0), "bias": toy_bias(4, 0)},
                    {"name": "relu1", "kind": "relu"},
                ]}},
            },
            "toy_text": {
                "modality": "textual",
                "input": {"vocab": vocab, "embedding_dim": EMBED_DIM},
                "variants": {"default": {"layers": text_layers}},
            },
            "toy_review": {
                "modality": "textual",
                "input": {"vocab": vocab, "embedding_dim": EMBED_DIM},
                "variants": {"default": review_variant(1), "sentiment": review_variant(4)},
            },
            "toy_audio": {
                "modality": "audio",
                "input": {"sample_rate": 4000},
                "variants": {"default": {"layers": [
                    {"name": "rms", "kind": "frame_rms", "frame": 64, "hop": 32},
                    {"name": "fc", "kind": "linear", "weight": toy_weight(3, 7, 2), "bias": toy_bias(3, 2)},
                ]}},
            },
        }
    }


def _write_common(root: Path, config: dict):
    root.mkdir(parents=True, exist_ok=True)
    (root / "registry.json").write_text(json.dumps(registry_doc(), indent=1), encoding="utf-8")
    config = {"dataset_path": str(root.resolve()), "gpu_list": -1, **config}
    (root / "config.yml").write_text(yaml.safe_dump(config, sort_keys=False), encoding="utf-8")
    return root / "config.yml"


def make_visual_text(root) -> Path:
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    for k in range(10):
        (root / "images" / f"item{k}.ppm").write_bytes(ppm_bytes(k))
    (root / "descriptions.tsv").write_text(
        "".join(f"item{k}\t{text}\n" for k, text in enumerate(DESCRIPTIONS)), encoding="utf-8")
    return _write_common(root, {
        "visual": {"items": {
            "input_folder": "images",
            "output_folder": "features/visual",
            "model": [{"name": "toy_visual", "backend": "toy", "output_layers": ["relu1"], "reshape": [3, 3]}],
        }},
        "textual": {"items": {
            "input_folder": "descriptions.tsv",
            "output_folder": "features/textual",
            "model": [{"name": "toy_text", "backend": "toy", "output_layers": ["norm"], "clear_text": True}],
        }},
    })


def make_audio_text(root) -> Path:
    root = Path(root)
    (root / "tracks").mkdir(parents=True, exist_ok=True)
    for k in range(5):
        (root / "tracks" / f"track{k}.wav").write_bytes(wav_bytes(square_tone(k)))
    (root / "genres.tsv").write_text(
        "".join(f"track{k}\t{text}\n" for k, text in enumerate(GENRES)), encoding="utf-8")
    return _write_common(root, {
        "audio": {"items": {
            "input_folder": "tracks",
            "output_folder": "features/audio",
            "model": [{"name": "toy_audio", "backend": "toy", "output_layers": ["fc"]}],
        }},
        "textual": {"items": {
            "input_folder": "genres.tsv",
            "output_folder": "features/textual",
            "model": [{"name": "toy_text", "backend": "toy", "output_layers": ["norm"], "clear_text": True}],
        }},
    })


def make_reviews(root) -> Path:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    items = sorted({r[1] for r in REVIEWS})
    lines = ["item_id\tcategory\tdescription"]
    lines += [f"{item}\tclothing\t{DESCRIPTIONS[int(item[4:])]}" for item in items]
    (root / "items.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    lines = ["user\titem\trating\treview"] + ["\t".join(r) for r in REVIEWS]
    (root / "reviews.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return _write_common(root, {
        "textual": {
            "items": {
                "input_folder": "items.tsv",
                "output_folder": "features/items",
                "item_column": "item_id",
                "text_column": "description",
                "model": [{"name": "toy_text", "backend": "toy", "output_layers": ["norm"], "clear_text": True}],
            },
            "interactions": {
                "input_folder": "reviews.tsv",
                "output_folder": "features/reviews",
                "user_column": "user",
                "item_column": "item",
                "text_column": "review",
                "model": [{"name": "toy_review", "backend": "toy", "output_layers": ["act"],
                           "clear_text": True, "task": "sentiment"}],
            },
        },
    })


SCENARIOS = {
    "visual_text": make_visual_text,
    "audio_text": make_audio_text,
    "reviews": make_reviews,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="python -m mmfeat.demo", description=__doc__.split("\n")[0])
    parser.add_argument("scenario", choices=sorted(SCENARIOS))
    parser.add_argument("directory", type=Path)
    ns = parser.parse_args(argv)
    config = SCENARIOS[ns.scenario](ns.directory)
    print(config)
    return 0


if __name__ == "__main__":
    sys.exit(main())
