"""Exception hierarchy.  Each error carries a machine-readable ``code`` and the
CLI exit status it maps to."""
from __future__ import annotations

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_NOT_SUPERCRITICAL = 4
EXIT_NUMERICAL = 5


class RIFSError(Exception):
    exit_code = EXIT_VALIDATION

    @property
    def code(self) -> str:
        return type(self).__name__


class ValidationError(RIFSError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations) or "invalid input")


class InvalidParameters(RIFSError):
    pass


class InvalidWord(RIFSError):
    pass


class OutOfDomain(RIFSError):
    pass


class EpsTooLarge(RIFSError):
    pass


class NotInTypeSpace(RIFSError):
    pass


class InsufficientScales(RIFSError):
    pass


class BudgetExceeded(RIFSError):
    exit_code = EXIT_BUDGET


class NotSupercritical(RIFSError):
    exit_code = EXIT_NOT_SUPERCRITICAL


class NumericalError(RIFSError):
    exit_code = EXIT_NUMERICAL


class BoundExceeded(NumericalError):
    pass


class SaturationTimeout(NumericalError):
    pass


class NotPrimitive(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NoEta(NumericalError):
    pass


class NoR(NumericalError):
    pass
