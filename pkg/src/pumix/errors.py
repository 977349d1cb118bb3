"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PumixError(Exception):
    exit_code = 1


class DomainError(PumixError, ValueError):
    """Argument outside its admissible range (usage / configuration)."""

    exit_code = 1


class ContractError(PumixError, ValueError):
    """Inputs that violate a shape or grid contract between components."""

    exit_code = 1


class DataError(PumixError, ValueError):
    """Unreadable, malformed or empty input data."""

    exit_code = 2


class SchemaError(DataError):
    pass


class NumericError(PumixError, ArithmeticError):
    """Non-finite values produced during fitting or estimation."""

    exit_code = 3
