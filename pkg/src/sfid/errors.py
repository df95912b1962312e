"""Exceptions raised across the package."""


class SfidError(Exception):
    """Base class for all package errors."""


class PreconditionNotMet(SfidError, ValueError):
    pass


class DimensionMismatch(PreconditionNotMet):
    pass


class NotInFamily(PreconditionNotMet):
    pass


class NotInSupport(PreconditionNotMet):
    pass


class NotStable(PreconditionNotMet):
    pass


class NotRankOne(PreconditionNotMet):
    pass


class ZeroColumn(PreconditionNotMet):
    pass


class CapExceeded(SfidError):
    pass


class EnumerationBudgetExceeded(SfidError):
    def __init__(self, needed, budget):
        super().__init__(f"enumeration needs {needed} items, budget is {budget}")
        self.needed = needed
        self.budget = budget


class ParseError(SfidError, ValueError):
    """Malformed input file or family spec, located by file, line and column."""

    def __init__(self, message, path=None, line=None, column=None):
        where = ":".join(str(p) for p in (path, line, column) if p is not None)
        super().__init__(f"{where}: {message}" if where else message)
        self.path = path
        self.line = line
        self.column = column
