#!/usr/bin/env python3
"""
Exception types shared across the offloading packages.
"""

from typing import List


class OffloadingError(Exception):
    """Base class for all errors raised by this project."""


class InstanceValidationError(OffloadingError, ValueError):
    """Raised when a problem instance or scenario fails validation."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid instance")


class ScheduleError(OffloadingError, ValueError):
    """Raised when an allocation does not meet a schedule precondition."""

    def __init__(self, message: str, helper_index: int = None):
        self.helper_index = helper_index
        if helper_index is not None:
            message = f"helper {helper_index}: {message}"
        super().__init__(message)


class EnumerationLimitError(OffloadingError, ValueError):
    """Raised when exhaustive search would exceed its candidate limit."""


class SolverIterationError(OffloadingError, RuntimeError):
    """Raised when the barrier solver runs out of Newton steps."""
