"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PipelineError(Exception):
    exit_code = 1


class ConfigError(PipelineError):
    exit_code = 1


class UsageError(ConfigError):
    pass


class DataError(PipelineError):
    exit_code = 2


class FormatError(DataError):
    """A file does not follow the supported subset of its format.

    ``field`` names the offending header field or structure, when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ModelError(PipelineError):
    exit_code = 3


class IoError(PipelineError):
    exit_code = 4
