"""Input indexing, per-sample decoding/preprocessing and output file layout.

Items are keyed by their id (a file stem, or the id column of a TSV);
interactions are keyed by a ``(user_id, item_id)`` tuple. An index is a tuple
of :class:`MediaEntry` or :class:`TextEntry` in processing order.
"""

from __future__ import annotations

import logging
import string
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np

from . import codecs, kernels
from .config import ColumnSpec
from .errors import DataError, IoError
from .npy import write_npy

log = logging.getLogger(__name__)

Key = Union[str, tuple]

SEPARATOR = "__"
VISUAL_EXTENSIONS = (".ppm", ".pgm", ".png")
AUDIO_EXTENSIONS = (".wav",)


class MediaEntry(NamedTuple):
    key: Key
    path: Path


class TextEntry(NamedTuple):
    key: Key
    text: str


@dataclass(frozen=True)
class VisualParams:
    height: int
    width: int
    mean: tuple = (0.0, 0.0, 0.0)
    std: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise ValueError(f"target size must be positive, got {self.height}x{self.width}")
        if len(self.mean) != 3 or len(self.std) != 3 or min(self.std) <= 0:
            raise ValueError("mean/std need 3 components and std must be positive")


@dataclass(frozen=True)
class AudioParams:
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate < 1:
            raise ValueError("sample_rate must be positive")


@dataclass(frozen=True)
class TextParams:
    vocab: dict
    clear_text: bool = False


@dataclass(frozen=True)
class Sample:
    key: Key
    payload: np.ndarray


def check_id(value: str, what: str = "id") -> str:
    if not value:
        raise DataError(f"empty {what}")
    if "/" in value or "\\" in value or SEPARATOR in value:
        raise DataError(f"{what} {value!r} must not contain '/', '\\' or {SEPARATOR!r}")
    return value


def key_to_name(key: Key) -> str:
    if isinstance(key, tuple):
        return f"{key[0]}{SEPARATOR}{key[1]}"
    return key


# -- indexing ----------------------------------------------------------------


def _media_key(stem: str, source: str) -> Key:
    if source == "items":
        return check_id(stem, "item id")
    user, sep, item = stem.partition(SEPARATOR)
    if not sep:
        raise DataError(f"interaction file {stem!r} must be named <user>{SEPARATOR}<item>")
    return (check_id(user, "user id"), check_id(item, "item id"))


def scan_media_folder(path, modality: str, source: str = "items") -> tuple:
    """Index the supported files of a folder, sorted by id.

    Visual accepts .ppm/.pgm/.png, audio accepts .wav; anything else is skipped
    with a warning. For interactions each stem must read ``<user>__<item>``.
    """
    folder = Path(path)
    if not folder.is_dir():
        raise DataError(f"input folder {folder} does not exist")
    exts = VISUAL_EXTENSIONS if modality == "visual" else AUDIO_EXTENSIONS
    found = {}
    for entry in folder.iterdir():
        if entry.is_dir():
            continue
        stem, dot, ext = entry.name.rpartition(".")
        if not dot or ("." + ext.lower()) not in exts:
            log.warning("skipping unsupported %s input %s", modality, entry.name)
            continue
        key = _media_key(stem, source)
        if key in found:
            raise DataError(f"id {key_to_name(key)!r} appears twice: {found[key].name}, {entry.name}")
        found[key] = entry
    return tuple(MediaEntry(key, found[key]) for key in sorted(found))


def _read_rows(path: Path):
    try:
        text = path.read_bytes().decode("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not valid UTF-8: {exc}") from exc
    for number, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if line:
            yield number, line.split("\t")


def load_text_table(path, source: str, columns: Optional[ColumnSpec] = None) -> tuple:
    """Read a TSV of items (id, text) or interactions (user, item, text).

    Without ``columns`` there is no header: the id(s) are the leading columns
    and the text is the last column. With ``columns`` the first row is a header
    and named columns are looked up in it (unnamed ones keep the positional
    defaults).
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input table {path} does not exist")
    rows = _read_rows(path)
    id_count = 1 if source == "items" else 2

    if columns is None:
        positions = list(range(id_count)) + [-1]
        min_fields = id_count + 1
    else:
        try:
            _, header = next(rows)
        except StopIteration:
            raise DataError(f"{path} is empty but a header was expected") from None
        header = [h.strip() for h in header]
        if source == "items":
            wanted = [columns.item_column, columns.text_column]
            defaults = [0, len(header) - 1]
        else:
            wanted = [columns.user_column, columns.item_column, columns.text_column]
            defaults = [0, 1, len(header) - 1]
        positions = []
        for name, default in zip(wanted, defaults):
            if name is None:
                positions.append(default)
            elif name in header:
                positions.append(header.index(name))
            else:
                raise DataError(f"column {name!r} not found in header {header} of {path}")
        min_fields = max(positions) + 1
        if len(header) < id_count + 1:
            raise DataError(f"header of {path} has too few columns")

    entries = []
    seen = set()
    for number, fields in rows:
        if len(fields) < min_fields:
            raise DataError(f"{path}, row {number}: {len(fields)} fields, need at least {min_fields}")
        ids = [fields[p].strip() for p in positions[:-1]]
        text = fields[positions[-1]]
        if source == "items":
            key = check_id(ids[0], f"item id on row {number}")
        else:
            key = (check_id(ids[0], f"user id on row {number}"), check_id(ids[1], f"item id on row {number}"))
        if key in seen:
            raise DataError(f"{path}, row {number}: duplicate key {key_to_name(key)!r}")
        seen.add(key)
        entries.append(TextEntry(key, text))
    return tuple(entries)


def build_index(job, dataset_path) -> tuple:
    location = Path(dataset_path) / job.input_path
    if job.modality == "textual":
        return load_text_table(location, job.source, job.columns)
    return scan_media_folder(location, job.modality, job.source)


# -- preprocessing -----------------------------------------------------------


def preprocess_visual(img, params: VisualParams) -> np.ndarray:
    """Bilinear resize to the target size, then per-channel (x/255 - mean) / std."""
    resized = kernels.resize_bilinear(img, params.height, params.width)
    mean = np.asarray(params.mean, dtype=np.float64)
    std = np.asarray(params.std, dtype=np.float64)
    return ((resized / 255.0 - mean) / std).astype(np.float32)


def preprocess_audio(wave, src_rate: int, params: AudioParams) -> np.ndarray:
    wave = np.asarray(wave, dtype=np.float32)
    if wave.shape[0] == 0:
        raise DataError("empty waveform")
    if src_rate < 1:
        raise DataError(f"invalid source sample rate {src_rate}")
    if src_rate == params.sample_rate:
        return wave
    return kernels.resample_linear(wave, src_rate, params.sample_rate).astype(np.float32)


_CLEAN_TABLE = str.maketrans(
    string.ascii_uppercase,
    string.ascii_lowercase,
    string.punctuation + string.digits,
)


def clean_text(s: str) -> str:
    return " ".join(s.translate(_CLEAN_TABLE).split())


def tokenize(s: str, vocab: dict) -> np.ndarray:
    ids = [vocab.get(token, 0) for token in s.split()]
    return np.asarray(ids or [0], dtype=np.int64)


def _read_media(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def decode_image(path: Path) -> np.ndarray:
    data = _read_media(path)
    if path.suffix.lower() == ".png":
        return codecs.decode_png(data)
    return codecs.decode_ppm(data)


def load_sample(entry, modality: str, params) -> Sample:
    """Decode and preprocess one index entry (the dataset's get_item)."""
    if modality == "visual":
        payload = preprocess_visual(decode_image(entry.path), params)
    elif modality == "audio":
        wave, rate = codecs.decode_wav(_read_media(entry.path))
        payload = preprocess_audio(wave, rate, params)
    else:
        text = clean_text(entry.text) if params.clear_text else entry.text
        payload = tokenize(text, params.vocab)
    return Sample(entry.key, payload)


# -- output ------------------------------------------------------------------


def create_output_path(dataset_path, output_folder, backend: str, model: str,
                       layer: str, layer_count: int, key: Key) -> Path:
    """<dataset>/<output>/<backend>/<model>/<id>.npy, or <id>__<layer>.npy for multi-layer models."""
    for part in key if isinstance(key, tuple) else (key,):
        check_id(part)
    name = key_to_name(key)
    filename = f"{name}.npy" if layer_count == 1 else f"{name}{SEPARATOR}{layer}.npy"
    return Path(dataset_path) / output_folder / backend / model / filename


def write_feature(t, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {path.parent}: {exc}") from exc
    write_npy(t, path)
