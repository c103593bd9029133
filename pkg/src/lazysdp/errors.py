"""Exception hierarchy shared by every module."""
from __future__ import annotations


class SdpError(Exception):
    """Base class for all solver errors."""


class NumericError(SdpError):
    """A fatal numerical failure (CLI exit code 4)."""


class NotPositiveDefinite(NumericError):
    def __init__(self, lambda_min: float, what: str = "matrix"):
        self.lambda_min = float(lambda_min)
        super().__init__(f"{what} is not positive definite (lambda_min={lambda_min:.3e})")


class EigenFailure(NumericError):
    def __init__(self, message: str, fro_norm: float = float("nan"), cond: float = float("nan")):
        self.fro_norm = fro_norm
        self.cond = cond
        super().__init__(f"{message} (||M||_F={fro_norm:.3e}, cond~{cond:.3e})")


class SingularUpdate(NumericError):
    def __init__(self, cond: float, size: int):
        self.cond = float(cond)
        self.size = size
        super().__init__(f"inner {size}x{size} update system is singular (cond~{cond:.3e})")


class RankDeficient(NumericError):
    pass


class InfeasibleInitialization(NumericError):
    pass


class StepOutOfCone(NumericError):
    def __init__(self, iteration: int, lambda_min: float):
        self.iteration = iteration
        self.lambda_min = float(lambda_min)
        super().__init__(
            f"dual slack left the PSD cone at iteration {iteration} (lambda_min={lambda_min:.3e})"
        )


class InputError(SdpError):
    """Bad input data or configuration (CLI exit code 3)."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.reason = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class ValidationError(InputError):
    def __init__(self, report):
        self.report = report
        super().__init__("instance failed validation: " + "; ".join(str(i) for i in report.issues))


class NotConverged(SdpError):
    """The iteration budget ran out before the gap target (CLI exit code 2)."""

    def __init__(self, message: str, best=None):
        self.best = best
        super().__init__(message)
