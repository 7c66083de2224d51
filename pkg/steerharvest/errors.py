"""Exception hierarchy.

Domain errors mean the caller handed in something outside the model (exit
status 1 on the command line); numerical errors mean a well-posed request
could not be answered to the requested accuracy (exit status 2).
"""

from typing import Any, Dict, Optional


class SteerHarvestError(Exception):
    """Base class of every error raised by the package."""


class DomainError(SteerHarvestError, ValueError):
    pass


class UsageError(DomainError):
    """Malformed command line."""


class SpecialFunctionDomainError(DomainError):
    pass


class TraceError(DomainError):
    def __init__(self, trace: float) -> None:
        super().__init__(f"trace of X-state is {trace!r}, expected 1 within 1e-12")
        self.trace = trace


class NegativeDiagonalError(DomainError):
    def __init__(self, entry: str, value: float) -> None:
        super().__init__(f"diagonal entry {entry} = {value!r} lies outside [0, 1] beyond 1e-12")
        self.entry = entry
        self.value = value


class NumericalError(SteerHarvestError, ArithmeticError):
    pass


class NegativeRadicandError(NumericalError):
    def __init__(self, label: str, radicand: float) -> None:
        super().__init__(f"radicand {label} = {radicand!r} is below the -1e-15 clamp")
        self.label = label
        self.radicand = radicand


class ConvergenceError(NumericalError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NoSignChangeError(NumericalError):
    def __init__(self, lo: float, hi: float, lo_value: float, hi_value: float) -> None:
        super().__init__(
            f"no sign change on [{lo!r}, {hi!r}]: g(lo)={lo_value!r}, g(hi)={hi_value!r}"
        )
        self.lo = lo
        self.hi = hi
        self.lo_value = lo_value
        self.hi_value = hi_value


class NoPeakError(NumericalError):
    def __init__(self, peak_value: float) -> None:
        super().__init__(f"flat asymmetry landscape (peak value {peak_value!r})")
        self.peak_value = peak_value
