class LipfreeError(Exception):
    pass


class MetricStructureError(LipfreeError, ValueError):
    """Distance data is malformed (wrong shape, non-finite entries)."""


class DomainError(LipfreeError, ValueError):
    """An operation was called outside its precondition."""


class SolverError(LipfreeError, RuntimeError):
    """An LP or transportation solve did not reach an optimal status."""

    def __init__(self, message, status=None):
        super().__init__(message)
        self.status = status


class BoundViolation(LipfreeError, AssertionError):
    """A proven inequality failed numerically."""
