"""Configuration-driven multimodal feature extraction for recommender pipelines."""

from .errors import ConfigError, DataError, FormatError, IoError, ModelError, PipelineError

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "FormatError",
    "IoError",
    "ModelError",
    "PipelineError",
    "__version__",
]
