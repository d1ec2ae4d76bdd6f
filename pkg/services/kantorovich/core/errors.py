"""
Error types for the operator lab.

Every error carries an exit code and a human-readable detail, the same
shape as an HTTP error (status + detail). The CLI maps them to process
exit codes: 1 = configuration, 2 = numerical failure, 3 = bound violation.
"""
from __future__ import annotations

from typing import Optional


class LabError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, *, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class ConfigError(LabError):
    """Invalid parameters, grids, function ids or config files."""
    exit_code = 1


# ========== Numerical failures (exit 2) ==========

class NumericalError(LabError):
    exit_code = 2


class TruncationFailure(NumericalError):
    """The term budget ran out before the tail certificate held."""


class StepUnderflow(NumericalError):
    """Finite-difference step would fall below the admissible minimum."""


class DivisionNotExact(NumericalError):
    """A division left the p(x)/(1+x)^m family."""


class PoleError(NumericalError):
    """Rational function evaluated at its pole x = -1."""


class OrderUndefined(NumericalError):
    """Ratio test hit a zero value."""


class NonPositiveError(NumericalError):
    """Rate fit received a non-positive error value."""


class UnknownMonotonicity(NumericalError):
    """Total variation requested for a signal without monotonicity knots."""


class MissingOneSidedData(NumericalError):
    """Breakpoint without one-sided limits, or derivative data missing."""


class RemarkNotYetValid(NumericalError):
    """u_{n,2}(x) <= lambda x(1+x)/(n+1) does not hold yet at this n."""

    def __init__(self, detail: str, *, n0: int):
        super().__init__(detail)
        self.n0 = n0


# ========== Estimate checks (exit 3) ==========

class BoundViolation(LabError):
    exit_code = 3
