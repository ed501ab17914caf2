"""Exception types shared across the package."""


class MimdickeError(Exception):
    """Base class for all package errors."""


class ValidationError(MimdickeError):
    """Raised when parameters or configuration fail validation."""


class ConvergenceError(MimdickeError):
    """Raised when an iterative routine fails to reach its tolerance.

    Carries enough context to diagnose the failure without re-running.
    """

    def __init__(self, message, *, residual=None, iterations=None, diagnostics=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.diagnostics = diagnostics or {}
