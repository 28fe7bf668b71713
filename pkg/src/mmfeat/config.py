"""Configuration: YAML parsing, dot-path overrides and validation into a plan.

The raw configuration is a plain tree of dicts, lists and scalars. Command-line
overrides (``key1.key2.key3=value``) are merged into it, then
:func:`validate_config` cleans it up and produces an immutable
:class:`ExtractionPlan`.

Cleaning is deliberately limited to: trimming keys, case-insensitive matching of
known keys, wrapping a single model mapping into a list, coercing strings to
numbers/booleans/lists, and warning about unknown keys.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .errors import ConfigError

log = logging.getLogger(__name__)

MODALITIES = ("visual", "audio", "textual")
SOURCES = ("items", "interactions")

SETUP_KEYS = ("dataset_path", "gpu_list", "model_registry", "skip_errors", "log_dir")
JOB_KEYS = ("input_folder", "output_folder", "item_column", "user_column", "text_column", "model")
MODEL_KEYS = ("name", "backend", "output_layers", "reshape", "clear_text", "task")

DEFAULT_BACKEND = "toy"
DEFAULT_REGISTRY = "registry.json"
DEFAULT_LOG_DIR = "logs"


@dataclass(frozen=True)
class OverridePair:
    path: tuple[str, ...]
    value: str

    def __post_init__(self):
        if not self.path or any(not seg for seg in self.path):
            raise ConfigError(f"override path {'.'.join(self.path)!r} has an empty segment")


def parse_override(token: str) -> OverridePair:
    """Parse ``KEY(.KEY)*=VALUE``. The first '=' separates path from value."""
    key, sep, value = token.partition("=")
    if not sep:
        raise ConfigError(f"override {token!r} is not of the form key.path=value")
    return OverridePair(tuple(seg.strip() for seg in key.strip().split(".")), value)


@dataclass(frozen=True)
class ModelSpec:
    name: str
    output_layers: tuple[str, ...]
    backend: str = DEFAULT_BACKEND
    reshape: Optional[tuple[int, int]] = None
    clear_text: bool = False
    task: Optional[str] = None


@dataclass(frozen=True)
class ColumnSpec:
    item_column: Optional[str] = None
    user_column: Optional[str] = None
    text_column: Optional[str] = None


@dataclass(frozen=True)
class ExtractionJob:
    modality: str
    source: str
    input_path: str
    output_path: str
    models: tuple[ModelSpec, ...]
    columns: Optional[ColumnSpec] = None


@dataclass(frozen=True)
class ExtractionPlan:
    """Validated configuration.

    ``registry_path`` and ``log_dir`` are kept as written (relative paths are
    relative to ``dataset_path``); use :attr:`registry_file` and
    :attr:`log_path` for the resolved locations.
    """

    dataset_path: Path
    workers: int
    registry_path: Path
    skip_errors: bool
    log_dir: Path
    jobs: tuple[ExtractionJob, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def registry_file(self) -> Path:
        return self.dataset_path / self.registry_path

    @property
    def log_path(self) -> Path:
        return self.dataset_path / self.log_dir

    def jobs_for(self, modality: str) -> tuple[ExtractionJob, ...]:
        return tuple(job for job in self.jobs if job.modality == modality)


# -- parsing -----------------------------------------------------------------


class _UniqueKeyLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    loader.flatten_mapping(node)
    out = {}
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=deep)
        if not isinstance(key, str):
            key = str(key)
        if key.strip() in {k.strip() for k in out}:
            mark = key_node.start_mark
            raise ConfigError(
                f"duplicate key {key.strip()!r} at line {mark.line + 1}, column {mark.column + 1}"
            )
        out[key] = loader.construct_object(value_node, deep=deep)
    return out


_UniqueKeyLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def parse_yaml_config(text: str) -> dict:
    try:
        root = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"YAML syntax error{where}: {exc.problem or exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML error: {exc}") from exc
    if not isinstance(root, dict):
        raise ConfigError(f"configuration root must be a mapping, got {type(root).__name__}")
    return root


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return parse_yaml_config(text)


# -- overrides ---------------------------------------------------------------


def _norm(key) -> str:
    return str(key).strip().lower()


def _find_key(mapping: dict, segment: str):
    """Existing key addressed by ``segment``: exact match, else trimmed case-insensitive."""
    if segment in mapping:
        return segment
    matches = [k for k in mapping if _norm(k) == _norm(segment)]
    if len(matches) > 1:
        raise ConfigError(f"key {segment!r} is ambiguous: {matches}")
    return matches[0] if matches else None


def apply_overrides(root: dict, overrides) -> dict:
    """Return a copy of ``root`` with each override applied in order."""
    if not isinstance(root, dict):
        raise ConfigError("configuration root must be a mapping")
    merged = copy.deepcopy(root)
    for pair in overrides:
        node = merged
        for depth, segment in enumerate(pair.path[:-1]):
            key = _find_key(node, segment)
            if key is None:
                key = segment
                node[key] = {}
            elif not isinstance(node[key], dict):
                prefix = ".".join(pair.path[: depth + 1])
                raise ConfigError(
                    f"override {'.'.join(pair.path)!r} traverses {prefix!r}, "
                    f"which is a {type(node[key]).__name__}, not a mapping"
                )
            node = node[key]
        leaf = _find_key(node, pair.path[-1])
        node[pair.path[-1] if leaf is None else leaf] = pair.value
    return merged


# -- coercion ----------------------------------------------------------------

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _to_str(value, where):
    if isinstance(value, (dict, list)) or value is None:
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return str(value).strip()


def _to_bool(value, where):
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str):
        low = value.strip().lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
    raise ConfigError(f"{where}: expected a boolean, got {value!r}")


def _to_int(value, where):
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            pass
    raise ConfigError(f"{where}: expected an integer, got {value!r}")


def _split_list(value):
    """A string like '1,2', '[1, 2]' or 'a' as a list of trimmed items."""
    text = value.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    if not text.strip():
        return []
    return [part.strip().strip("'\"") for part in text.split(",")]


def _to_list(value, where):
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return _split_list(value)
    if isinstance(value, dict) or value is None:
        raise ConfigError(f"{where}: expected a list, got {value!r}")
    return [value]


def gpu_list_to_workers(value) -> int:
    """-1 or [-1] means one CPU worker; n non-negative device ids mean n workers."""
    where = "gpu_list"
    items = [_to_int(v, where) for v in _to_list(value, where)]
    if not items:
        raise ConfigError("gpu_list must not be empty")
    if items == [-1]:
        return 1
    if any(i < 0 for i in items):
        raise ConfigError(f"gpu_list {items} mixes -1 or negative ids with device ids")
    if len(set(items)) != len(items):
        raise ConfigError(f"gpu_list {items} repeats a device id")
    return len(items)


# -- validation --------------------------------------------------------------


class _Cleaner:
    def __init__(self):
        self.warnings: list[str] = []

    def warn(self, message):
        self.warnings.append(message)
        log.warning(message)

    def keys(self, mapping, vocabulary, where):
        """Trim keys, lowercase the known ones, warn about the rest."""
        if not isinstance(mapping, dict):
            raise ConfigError(f"{where}: expected a mapping, got {type(mapping).__name__}")
        out = {}
        for raw, value in mapping.items():
            key = str(raw).strip()
            if key.lower() in vocabulary:
                key = key.lower()
            else:
                self.warn(f"{where}: unknown key {key!r} ignored")
                continue
            if key in out:
                raise ConfigError(f"{where}: key {key!r} given more than once")
            out[key] = value
        return out


def _model_spec(raw, modality, where, cleaner) -> ModelSpec:
    entry = cleaner.keys(raw, MODEL_KEYS, where)
    if entry.get("name") is None:
        raise ConfigError(f"{where}: model entry is missing 'name'")
    if entry.get("output_layers") is None:
        raise ConfigError(f"{where}: model entry is missing 'output_layers'")
    name = _to_str(entry["name"], f"{where}.name")
    if not name:
        raise ConfigError(f"{where}: model name is empty")
    layers = tuple(_to_str(v, f"{where}.output_layers") for v in _to_list(entry["output_layers"], f"{where}.output_layers"))
    if not layers or any(not layer for layer in layers):
        raise ConfigError(f"{where}: output_layers must be a non-empty list of names")
    if len(set(layers)) != len(layers):
        raise ConfigError(f"{where}: output_layers {list(layers)} contains duplicates")
    backend = _to_str(entry["backend"], f"{where}.backend") if entry.get("backend") is not None else DEFAULT_BACKEND

    reshape = None
    if entry.get("reshape") is not None:
        if modality != "visual":
            cleaner.warn(f"{where}: 'reshape' only applies to visual models, ignored")
        else:
            dims = [_to_int(v, f"{where}.reshape") for v in _to_list(entry["reshape"], f"{where}.reshape")]
            if len(dims) != 2 or min(dims) < 1:
                raise ConfigError(f"{where}: reshape must be two positive integers, got {dims}")
            reshape = (dims[0], dims[1])

    clear_text = False
    if entry.get("clear_text") is not None:
        if modality != "textual":
            cleaner.warn(f"{where}: 'clear_text' only applies to textual models, ignored")
        else:
            clear_text = _to_bool(entry["clear_text"], f"{where}.clear_text")

    task = None
    if entry.get("task") is not None:
        if modality == "visual":
            cleaner.warn(f"{where}: 'task' does not apply to visual models, ignored")
        else:
            task = _to_str(entry["task"], f"{where}.task") or None

    return ModelSpec(name=name, output_layers=layers, backend=backend, reshape=reshape,
                     clear_text=clear_text, task=task)


def _job(modality, source, raw, cleaner) -> ExtractionJob:
    where = f"{modality}.{source}"
    section = cleaner.keys(raw, JOB_KEYS, where)
    for key in ("input_folder", "output_folder"):
        if section.get(key) is None:
            raise ConfigError(f"{where}: missing {key!r}")
    columns = None
    col_values = {k: section.get(k) for k in ("item_column", "user_column", "text_column")}
    if any(v is not None for v in col_values.values()):
        if modality != "textual":
            cleaner.warn(f"{where}: column names only apply to textual sections, ignored")
        else:
            columns = ColumnSpec(**{k: (_to_str(v, f"{where}.{k}") if v is not None else None)
                                    for k, v in col_values.items()})
    raw_models = section.get("model")
    if isinstance(raw_models, dict):
        raw_models = [raw_models]
    if not raw_models:
        raise ConfigError(f"{where}: no model entries")
    if not isinstance(raw_models, list):
        raise ConfigError(f"{where}: 'model' must be a mapping or a list of mappings")
    models = tuple(_model_spec(m, modality, f"{where}.model[{i}]", cleaner) for i, m in enumerate(raw_models))
    return ExtractionJob(
        modality=modality,
        source=source,
        input_path=_to_str(section["input_folder"], f"{where}.input_folder"),
        output_path=_to_str(section["output_folder"], f"{where}.output_folder"),
        models=models,
        columns=columns,
    )


def validate_config(root: dict) -> ExtractionPlan:
    if not isinstance(root, dict):
        raise ConfigError("configuration root must be a mapping")
    cleaner = _Cleaner()
    top = cleaner.keys(root, SETUP_KEYS + MODALITIES, "config")
    if top.get("dataset_path") is None:
        raise ConfigError("missing required key 'dataset_path'")
    dataset_path = _to_str(top["dataset_path"], "dataset_path")
    if not dataset_path:
        raise ConfigError("dataset_path is empty")
    if top.get("gpu_list") is None:
        raise ConfigError("missing required key 'gpu_list' (use -1 for CPU)")
    workers = gpu_list_to_workers(top["gpu_list"])

    registry = DEFAULT_REGISTRY
    if top.get("model_registry") is not None:
        registry = _to_str(top["model_registry"], "model_registry")
    log_dir = DEFAULT_LOG_DIR
    if top.get("log_dir") is not None:
        log_dir = _to_str(top["log_dir"], "log_dir")
    skip = _to_bool(top["skip_errors"], "skip_errors") if top.get("skip_errors") is not None else False

    jobs = []
    for modality in [k for k in top if k in MODALITIES]:
        if top[modality] is None:
            continue
        sources = cleaner.keys(top[modality], SOURCES, modality)
        for source, raw in sources.items():
            if raw is None:
                continue
            jobs.append(_job(modality, source, raw, cleaner))

    return ExtractionPlan(
        dataset_path=Path(dataset_path),
        workers=workers,
        registry_path=Path(registry),
        skip_errors=skip,
        log_dir=Path(log_dir),
        jobs=tuple(jobs),
        warnings=tuple(cleaner.warnings),
    )


def plan_to_tree(plan: ExtractionPlan) -> dict:
    """Canonical raw tree for ``plan``; validating it yields an equal plan."""
    tree: dict[str, Any] = {
        "dataset_path": str(plan.dataset_path),
        "gpu_list": -1 if plan.workers == 1 else list(range(plan.workers)),
        "model_registry": str(plan.registry_path),
        "skip_errors": plan.skip_errors,
        "log_dir": str(plan.log_dir),
    }
    for job in plan.jobs:
        section: dict[str, Any] = {
            "input_folder": job.input_path,
            "output_folder": job.output_path,
        }
        if job.columns is not None:
            for key in ("item_column", "user_column", "text_column"):
                value = getattr(job.columns, key)
                if value is not None:
                    section[key] = value
        models = []
        for spec in job.models:
            entry: dict[str, Any] = {
                "name": spec.name,
                "backend": spec.backend,
                "output_layers": list(spec.output_layers),
            }
            if spec.reshape is not None:
                entry["reshape"] = list(spec.reshape)
            if job.modality == "textual":
                entry["clear_text"] = spec.clear_text
            if spec.task is not None:
                entry["task"] = spec.task
            models.append(entry)
        section["model"] = models
        tree.setdefault(job.modality, {})[job.source] = section
    return tree
