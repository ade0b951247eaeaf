"""Exception types shared across the package."""


class PhasePropError(Exception):
    """Base class for all package errors."""


class DomainError(PhasePropError, ValueError):
    """An argument lies outside the domain of a formula (negative time, zero width, ...)."""


class ConfigError(PhasePropError, ValueError):
    """Invalid experiment or solver configuration."""


class NodeError(PhasePropError, ArithmeticError):
    """The wave function vanishes where its phase or velocity is required."""

    def __init__(self, message, x=None, t=None):
        super().__init__(message)
        self.x = x
        self.t = t


class SolverError(PhasePropError, RuntimeError):
    """A propagation run could not complete (CFL stall, leakage, crossing trajectories)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
