"""Exception types shared across the package."""


class CosciError(Exception):
    """Base class for all package errors."""


class ShapeError(CosciError, ValueError):
    pass


class ParseError(CosciError, ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class DataError(CosciError, ValueError):
    pass


class ConfigError(CosciError, ValueError):
    pass


class StateError(CosciError, RuntimeError):
    pass


class NumericError(CosciError, FloatingPointError):
    pass


class CorruptFileError(CosciError, IOError):
    pass


class VersionError(CosciError, IOError):
    pass
