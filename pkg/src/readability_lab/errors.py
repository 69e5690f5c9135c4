"""Exception types that map onto the CLI's exit codes."""


class ReadabilityLabError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(ReadabilityLabError):
    """Invalid experiment configuration (exit code 1)."""


class DataError(ReadabilityLabError):
    """Invalid input data (exit code 2)."""


class ManifestError(DataError):
    """Corpus manifest could not be loaded."""


class EmbeddingError(DataError):
    """Embedding file could not be loaded."""


class AlignmentError(DataError):
    """Embedding table does not cover the corpus."""
