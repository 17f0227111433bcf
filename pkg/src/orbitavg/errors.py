"""Exception types shared across the package."""


class DomainError(ValueError):
    """Arguments belong to different scenarios, groups or catalogs."""


class ResourceError(RuntimeError):
    """A requested Følner index or sample size exceeds a configured cap."""


class UnsupportedError(RuntimeError):
    """The scenario does not provide what the operation needs."""


class ScenarioError(ValueError):
    """Invalid scenario parameters."""


class CoverageError(RuntimeError):
    """The translate pool could not cover the witness sample.

    ``residue`` holds the indices of witness points left uncovered.
    """

    def __init__(self, message, residue):
        super().__init__(message)
        self.residue = list(residue)


class ConfigError(ValueError):
    """Malformed experiment configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
