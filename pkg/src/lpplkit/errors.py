"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures to process status without inspecting messages.
"""

from __future__ import annotations


class LpplError(Exception):
    exit_code = 1


class InputError(LpplError, ValueError):
    """Bad user input: invalid dates, out-of-range times, malformed files."""


class FormatError(InputError):
    pass


class ValidationError(InputError):
    pass


class EmptyWindowError(InputError):
    pass


class StateError(LpplError, ValueError):
    """Operation applied to a value in the wrong state (e.g. scale mismatch)."""


class DomainError(LpplError, ValueError):
    """Model evaluated at or beyond the critical time."""


class ConfigError(LpplError, ValueError):
    exit_code = 2


class DegenerateParameterError(LpplError, ValueError):
    pass


class DegenerateDesignError(LpplError, ArithmeticError):
    exit_code = 3


class RefinementFailedError(LpplError, RuntimeError):
    exit_code = 3

    def __init__(self, message: str, best_candidate=None):
        super().__init__(message)
        self.best_candidate = best_candidate


class FitFailedError(LpplError, RuntimeError):
    exit_code = 3


class ScanFailedError(LpplError, RuntimeError):
    exit_code = 3

    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class IndeterminateRegimeError(LpplError, ValueError):
    exit_code = 3


class UnreliableForecastError(LpplError, RuntimeError):
    exit_code = 3


class GenerationError(LpplError, ValueError):
    exit_code = 2
