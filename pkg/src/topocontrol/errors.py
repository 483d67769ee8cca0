"""Exception hierarchy shared by the library and the CLI."""


class TopologyError(Exception):
    """Base class for every error raised by this package."""


class ModelError(TopologyError, ValueError):
    pass


class ConstructionError(TopologyError, ValueError):
    pass


class IngestionError(TopologyError, ValueError):
    """A trace file could not be parsed.

    ``line`` is the 1-based line number of the offending record, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AnalysisError(TopologyError, ValueError):
    pass


class ConfigError(TopologyError, ValueError):
    pass


class OracleError(TopologyError, ValueError):
    pass
