"""Model registry: explicit-weight layer chains loaded from a JSON file.

The registry stands in for a zoo of pre-trained networks. Each model declares
its modality, the input contract used for preprocessing, and one or more task
variants (``"default"`` is mandatory), each an ordered list of named layers.
See ``docs/registry.md`` for the file grammar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ModelError

LAYER_KINDS = ("flatten", "linear", "relu", "tanh", "mean_pool", "l2_normalize", "embedding", "frame_rms")
DEFAULT_EPS = 1e-12
DEFAULT_TASK = "default"


@dataclass(frozen=True, eq=False)
class Layer:
    name: str
    kind: str
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class ModelEntry:
    name: str
    modality: str
    input: dict
    variants: dict  # task -> tuple[Layer, ...]


@dataclass(frozen=True, eq=False)
class ModelRegistry:
    models: dict

    def __contains__(self, name):
        return name in self.models

    def __getitem__(self, name) -> ModelEntry:
        return self.models[name]

    def names(self):
        return sorted(self.models)


def _matrix(value, ctx, ndim):
    try:
        arr = np.asarray(value, dtype=np.float32)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"{ctx}: not a numeric array: {exc}") from exc
    if arr.ndim != ndim:
        raise ModelError(f"{ctx}: expected a rank-{ndim} array, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def _positive_int(value, ctx):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ModelError(f"{ctx}: expected a positive integer, got {value!r}")
    return value


def _layer(raw, ctx) -> Layer:
    if not isinstance(raw, dict):
        raise ModelError(f"{ctx}: layer must be an object")
    name = raw.get("name")
    kind = raw.get("kind")
    if not isinstance(name, str) or not name or "/" in name or "\\" in name:
        raise ModelError(f"{ctx}: layer name must be a non-empty string without path separators, got {name!r}")
    if kind not in LAYER_KINDS:
        raise ModelError(f"{ctx} ({name}): unknown layer kind {kind!r}; expected one of {LAYER_KINDS}")
    ctx = f"{ctx} ({name})"
    params: dict[str, Any] = {}
    if kind == "linear":
        weight = _matrix(raw.get("weight"), f"{ctx}.weight", 2)
        bias = _matrix(raw.get("bias"), f"{ctx}.bias", 1)
        if weight.shape[0] != bias.shape[0]:
            raise ModelError(f"{ctx}: weight has {weight.shape[0]} rows but bias has {bias.shape[0]} entries")
        params = {"weight": weight, "bias": bias}
    elif kind == "embedding":
        params = {"table": _matrix(raw.get("table"), f"{ctx}.table", 2)}
    elif kind == "frame_rms":
        params = {"frame": _positive_int(raw.get("frame"), f"{ctx}.frame"),
                  "hop": _positive_int(raw.get("hop"), f"{ctx}.hop")}
    elif kind == "l2_normalize":
        eps = raw.get("eps", DEFAULT_EPS)
        if not isinstance(eps, (int, float)) or not eps > 0:
            raise ModelError(f"{ctx}: eps must be positive, got {eps!r}")
        params = {"eps": float(eps)}
    return Layer(name, kind, params)


def _input_block(raw, modality, ctx) -> dict:
    if not isinstance(raw, dict):
        raise ModelError(f"{ctx}: 'input' must be an object")
    if modality == "visual":
        shape = raw.get("shape")
        if (not isinstance(shape, list) or len(shape) != 3 or shape[2] != 3
                or not all(isinstance(d, int) and d >= 1 for d in shape)):
            raise ModelError(f"{ctx}: visual input shape must be [H, W, 3], got {shape!r}")
        mean = tuple(float(v) for v in raw.get("mean", [0.0, 0.0, 0.0]))
        std = tuple(float(v) for v in raw.get("std", [1.0, 1.0, 1.0]))
        if len(mean) != 3 or len(std) != 3 or min(std) <= 0:
            raise ModelError(f"{ctx}: mean/std need 3 components with std > 0")
        return {"shape": tuple(shape), "mean": mean, "std": std}
    if modality == "audio":
        return {"sample_rate": _positive_int(raw.get("sample_rate"), f"{ctx}.sample_rate")}
    vocab = raw.get("vocab")
    if not isinstance(vocab, dict):
        raise ModelError(f"{ctx}: textual input needs a 'vocab' object")
    if vocab.get("<unk>") != 0:
        raise ModelError(f"{ctx}: vocab must map '<unk>' to 0")
    for token, idx in vocab.items():
        if isinstance(idx, bool) or not isinstance(idx, int) or idx < 0:
            raise ModelError(f"{ctx}: vocab id for {token!r} must be a non-negative integer")
    block = {"vocab": dict(vocab)}
    if "embedding_dim" in raw:
        block["embedding_dim"] = _positive_int(raw["embedding_dim"], f"{ctx}.embedding_dim")
    return block


def _entry(name, raw) -> ModelEntry:
    ctx = f"model {name!r}"
    if not isinstance(raw, dict):
        raise ModelError(f"{ctx}: entry must be an object")
    modality = raw.get("modality")
    if modality not in ("visual", "audio", "textual"):
        raise ModelError(f"{ctx}: modality must be visual, audio or textual, got {modality!r}")
    block = _input_block(raw.get("input"), modality, f"{ctx}.input")
    raw_variants = raw.get("variants")
    if not isinstance(raw_variants, dict) or DEFAULT_TASK not in raw_variants:
        raise ModelError(f"{ctx}: 'variants' must be an object containing {DEFAULT_TASK!r}")
    variants = {}
    for task, body in raw_variants.items():
        vctx = f"{ctx}, variant {task!r}"
        layers_raw = body.get("layers") if isinstance(body, dict) else None
        if not isinstance(layers_raw, list) or not layers_raw:
            raise ModelError(f"{vctx}: needs a non-empty 'layers' list")
        layers = tuple(_layer(layer, f"{vctx}, layer {i}") for i, layer in enumerate(layers_raw))
        names = [layer.name for layer in layers]
        dupes = sorted({n for n in names if names.count(n) > 1})
        if dupes:
            raise ModelError(f"{vctx}: duplicate layer names {dupes}")
        if modality == "textual":
            max_id = max(block["vocab"].values())
            for layer in layers:
                if layer.kind != "embedding":
                    continue
                rows, dim = layer.params["table"].shape
                if rows < max_id + 1:
                    raise ModelError(f"{vctx}: embedding {layer.name!r} has {rows} rows, vocab needs {max_id + 1}")
                if block.get("embedding_dim", dim) != dim:
                    raise ModelError(f"{vctx}: embedding {layer.name!r} has dim {dim}, "
                                     f"input declares {block['embedding_dim']}")
        variants[task] = layers
    return ModelEntry(name, modality, block, variants)


def registry_from_dict(doc) -> ModelRegistry:
    if not isinstance(doc, dict) or not isinstance(doc.get("models"), dict):
        raise ModelError("registry must be an object with a 'models' object")
    return ModelRegistry({name: _entry(name, raw) for name, raw in doc["models"].items()})


def load_registry(path) -> ModelRegistry:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read model registry {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"model registry {path} is not valid JSON: {exc}") from exc
    return registry_from_dict(doc)
