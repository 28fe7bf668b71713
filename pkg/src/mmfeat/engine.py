"""Extractor: build a layer chain from the registry and run it on samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .dataset import AudioParams, TextParams, VisualParams
from .errors import ModelError
from .registry import DEFAULT_TASK, Layer

TOKENS = "tokens"


@dataclass(frozen=True, eq=False)
class ModelGraph:
    name: str
    backend: str
    modality: str
    task: str
    layers: tuple
    input_shape: tuple  # None marks a length only known per sample
    output_layers: tuple
    params: object  # VisualParams | AudioParams | TextParams

    def layer_index(self, name) -> int:
        for i, layer in enumerate(self.layers):
            if layer.name == name:
                return i
        raise KeyError(name)


def _dims(shape):
    return "(" + ", ".join("?" if d is None else str(d) for d in shape) + ")"


def infer_shape(layer: Layer, shape, ctx):
    """Output shape of ``layer`` for an input of ``shape``; ModelError when incompatible."""
    kind = layer.kind
    where = f"{ctx}, layer {layer.name!r} ({kind})"
    if shape == TOKENS:
        if kind != "embedding":
            raise ModelError(f"{where}: token input must go through an embedding layer first")
        return (None, layer.params["table"].shape[1])
    if kind == "embedding":
        raise ModelError(f"{where}: embedding only accepts token ids, got shape {_dims(shape)}")
    if kind == "flatten":
        if any(d is None for d in shape):
            return (None,)
        return (math.prod(shape),)
    if kind == "linear":
        m, k = layer.params["weight"].shape
        if len(shape) not in (1, 2):
            raise ModelError(f"{where}: needs a rank-1 or rank-2 input, got {_dims(shape)}; add a flatten layer")
        if shape[-1] is not None and shape[-1] != k:
            raise ModelError(f"{where}: input has {shape[-1]} features but the weight expects {k}")
        return shape[:-1] + (m,)
    if kind == "mean_pool":
        if len(shape) != 2:
            raise ModelError(f"{where}: needs a rank-2 input, got {_dims(shape)}")
        return (shape[1],)
    if kind == "frame_rms":
        if len(shape) != 1:
            raise ModelError(f"{where}: needs a rank-1 input, got {_dims(shape)}")
        n = shape[0]
        frame, hop = layer.params["frame"], layer.params["hop"]
        if n is None:
            return (None,)
        return (0 if n < frame else (n - frame) // hop + 1,)
    return shape  # relu, tanh, l2_normalize


def build_model(spec, modality: str, registry) -> ModelGraph:
    """Resolve ``spec`` against the registry and type-check the layer chain."""
    if spec.name not in registry:
        raise ModelError(f"unknown model {spec.name!r}; registry has {registry.names()}")
    entry = registry[spec.name]
    if entry.modality != modality:
        raise ModelError(f"model {spec.name!r} is a {entry.modality} model, used for {modality}")
    task = spec.task if spec.task in entry.variants else DEFAULT_TASK
    layers = entry.variants[task]
    names = [layer.name for layer in layers]
    for wanted in spec.output_layers:
        if wanted not in names:
            raise ModelError(f"model {spec.name!r} (variant {task!r}) has no layer {wanted!r}; "
                             f"available layers: {names}")

    if modality == "visual":
        h, w, c = entry.input["shape"]
        if spec.reshape is not None:
            h, w = spec.reshape
        shape = (h, w, c)
        params = VisualParams(h, w, entry.input["mean"], entry.input["std"])
    elif modality == "audio":
        shape = (None,)
        params = AudioParams(entry.input["sample_rate"])
        if layers[0].kind not in ("frame_rms", "flatten"):
            raise ModelError(f"model {spec.name!r}: audio chains must start with frame_rms or flatten")
    else:
        shape = TOKENS
        params = TextParams(entry.input["vocab"], spec.clear_text)

    input_shape = shape
    ctx = f"model {spec.name!r} (variant {task!r})"
    for layer in layers:
        shape = infer_shape(layer, shape, ctx)
    return ModelGraph(
        name=spec.name,
        backend=spec.backend,
        modality=modality,
        task=task,
        layers=layers,
        input_shape=input_shape,
        output_layers=tuple(spec.output_layers),
        params=params,
    )


def apply_layer(layer: Layer, x: np.ndarray) -> np.ndarray:
    kind = layer.kind
    if kind == "flatten":
        return np.ascontiguousarray(x, dtype=np.float32).reshape(-1)
    if kind == "linear":
        k = layer.params["weight"].shape[1]
        if x.shape[-1] != k:
            raise ModelError(f"layer {layer.name!r}: input has {x.shape[-1]} features, weight expects {k}")
        return kernels.linear(layer.params["weight"], layer.params["bias"], x)
    if kind == "relu":
        return np.maximum(x, np.float32(0.0))
    if kind == "tanh":
        return np.tanh(x.astype(np.float64)).astype(np.float32)
    if kind == "mean_pool":
        return x.astype(np.float64).mean(axis=0).astype(np.float32)
    if kind == "l2_normalize":
        x64 = x.astype(np.float64)
        norm = np.sqrt((x64 * x64).sum(axis=-1, keepdims=True) + layer.params["eps"])
        return (x64 / norm).astype(np.float32)
    if kind == "embedding":
        table = layer.params["table"]
        if x.min() < 0 or x.max() >= table.shape[0]:
            raise ModelError(f"layer {layer.name!r}: token id outside the {table.shape[0]}-row table")
        return table[x]
    if kind == "frame_rms":
        return kernels.frame_rms(x, layer.params["frame"], layer.params["hop"])
    raise AssertionError(f"unhandled layer kind {kind}")


def run_layers(layers, x, record=None):
    for layer in layers:
        x = apply_layer(layer, x)
        if x.dtype.kind == "f" and not np.all(np.isfinite(x)):
            raise ModelError(f"layer {layer.name!r} produced non-finite values")
        if record is not None:
            record[layer.name] = x
    return x


def _check_input(graph: ModelGraph, payload):
    if graph.modality == "textual":
        if payload.ndim != 1 or payload.dtype.kind not in "iu" or payload.shape[0] == 0:
            raise ModelError(f"model {graph.name!r} expects a non-empty token id sequence")
        return
    expected = graph.input_shape
    if payload.ndim != len(expected) or any(
        d is not None and d != got for d, got in zip(expected, payload.shape)
    ):
        raise ModelError(f"model {graph.name!r} expects input {_dims(expected)}, got {tuple(payload.shape)}")


def forward(graph: ModelGraph, sample, stop_at: Optional[str] = None) -> dict:
    """Run the chain, returning every layer's activation keyed by name (in order)."""
    _check_input(graph, sample.payload)
    end = len(graph.layers) if stop_at is None else graph.layer_index(stop_at) + 1
    acts: dict = {}
    run_layers(graph.layers[:end], sample.payload, acts)
    return acts


def extract_features(graph: ModelGraph, sample) -> list:
    """Activations for ``graph.output_layers``, in declared order."""
    last = max(graph.layer_index(name) for name in graph.output_layers)
    acts = forward(graph, sample, stop_at=graph.layers[last].name)
    return [(name, acts[name]) for name in graph.output_layers]
