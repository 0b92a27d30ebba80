class CoexSimError(Exception):
    """Base class for simulator errors surfaced to the CLI and API."""


class InvalidInputError(CoexSimError, ValueError):
    pass


class GeometryError(CoexSimError, ValueError):
    pass


class ConfigError(CoexSimError):
    pass


class OutputError(CoexSimError, OSError):
    pass


class SolverError(CoexSimError):
    pass
