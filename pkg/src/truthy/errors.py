"""Exception hierarchy shared by every stage of the pipeline."""


class TruthyError(Exception):
    """Base class for all package errors."""


class InputError(TruthyError, ValueError):
    """Bad input data (maps to CLI exit code 2)."""


class MalformedLine(InputError):
    pass


class SchemaViolation(InputError):
    pass


class InvalidUrl(InputError):
    pass


class MemeMismatch(InputError):
    pass


class EmptyInput(InputError):
    pass


class InsufficientData(InputError):
    pass


class EmptyDataset(InputError):
    pass


class DegenerateLabels(InputError):
    pass


class InvalidParams(InputError):
    pass


class InvalidSeeds(InvalidParams):
    pass


class MissingThreshold(InvalidParams):
    pass


class ModelFormatError(InputError):
    pass


class InvariantViolation(TruthyError):
    """An internal consistency check failed (maps to CLI exit code 3)."""
