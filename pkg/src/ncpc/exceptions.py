"""Exception hierarchy shared by every module."""


class NCPCError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveAfterShift(NCPCError, ValueError):
    pass


class SeriesTooShort(NCPCError, ValueError):
    pass


class InsufficientData(NCPCError, ValueError):
    pass


class NonContiguous(NCPCError, ValueError):
    pass


class NonPositiveGdp(NCPCError, ValueError):
    pass


class EmptyFrame(NCPCError, ValueError):
    pass


class RankDeficient(NCPCError, ValueError):
    """Regressor matrix is not of full column rank.

    ``columns`` names the offending columns (all-zero or collinear).
    """

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


class NegativeRadicand(NCPCError, ArithmeticError):
    pass


class EmptySelection(NCPCError, ValueError):
    pass


class DegenerateRegression(NCPCError, ValueError):
    """A unit-root regression has a zero-variance regressor or residual."""


class ParseError(NCPCError, ValueError):
    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class UnknownCountry(NCPCError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown country"


class NonMonotonicDates(NCPCError, ValueError):
    pass
