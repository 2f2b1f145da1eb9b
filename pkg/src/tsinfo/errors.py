"""Typed errors raised across the package.

Every error carries a short ``code`` (the class name) so that sweeps can
record failures as data instead of aborting.
"""


class InfoError(ValueError):
    """Base class for all package errors."""

    @property
    def code(self):
        return type(self).__name__


class InvalidRequest(InfoError):
    pass


# data model / alignment
class ZeroVariance(InfoError):
    pass


class OutOfRange(InfoError):
    pass


class EmptyAlignment(InfoError):
    pass


# estimators
class DomainError(InfoError):
    pass


class SingularCovariance(InfoError):
    pass


class DegenerateGeometry(InfoError):
    pass


class EmptyNeighborhood(InfoError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PerfectCorrelation(InfoError):
    pass


class RankDeficient(InfoError):
    pass


# oracle
class NonStationary(InfoError):
    pass


class UnsupportedOrder(InfoError):
    pass


class UnsupportedMeasure(InfoError):
    pass


# file input
class ParseError(InfoError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class RaggedRows(InfoError):
    pass


class DuplicateHeader(InfoError):
    pass
