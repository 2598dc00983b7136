"""Exception hierarchy shared by the library and the command line."""


class MmcmcError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MmcmcError, ValueError):
    """A parameter lies outside the support of a density or transform."""


class TooFewObservationsError(MmcmcError, ValueError):
    pass


class ConfigError(MmcmcError, ValueError):
    pass


class DataError(MmcmcError):
    """Malformed or inconsistent input data (bad CSV cells, mismatched pairs...)."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateCpGError(DataError):
    pass


class PairMismatchError(DataError):
    def __init__(self, message, row):
        super().__init__(message)
        self.row = row


class UnknownCpGError(DataError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown CpG"


class DegenerateError(MmcmcError, ArithmeticError):
    """Bayes factor undefined because a density sum vanished or overflowed."""


class InfeasiblePlacementError(MmcmcError, ValueError):
    pass
