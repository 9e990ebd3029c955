from __future__ import annotations

__all__ = [
    "BlowUpError",
    "ConfigError",
    "DegenerateProjectionError",
    "ExtinctionError",
    "MvacError",
    "NonMinimalPairError",
    "NumericalError",
    "SvdConvergenceError",
]


class MvacError(Exception):
    """Base class of every error raised by mvac."""


class ConfigError(MvacError, ValueError):
    """Invalid configuration file or configuration value."""

    def __init__(self, msg: str, *, line: int | None = None, field: str | None = None) -> None:
        self.line = line
        self.field = field
        if line is not None:
            msg = f"line {line}: {msg}"
        elif field is not None:
            msg = f"{field}: {msg}"
        super().__init__(msg)


class NumericalError(MvacError, ArithmeticError):
    """A computation could not be carried out to a meaningful result."""


class BlowUpError(NumericalError):
    """The time integration produced non-finite values."""

    def __init__(self, step: int, max_norm: float) -> None:
        self.step = step
        self.max_norm = max_norm
        msg = f"non-finite value after step {step} (max finite norm {max_norm:.6g})"
        super().__init__(msg)


class ExtinctionError(NumericalError):
    """The reference interface shrinks into its own tubular neighborhood."""

    def __init__(self, t: float, radius_squared: float, delta_gamma: float) -> None:
        self.t = t
        self.radius_squared = radius_squared
        msg = (
            f"reference sphere extinct at t={t:.6g}: "
            f"R^2={radius_squared:.6g} <= delta_gamma^2={delta_gamma**2:.6g}"
        )
        super().__init__(msg)


class SvdConvergenceError(NumericalError):
    """The singular value decomposition did not converge."""


class DegenerateProjectionError(MvacError, ValueError):
    """The nearest point on an orthogonal component is not unique."""


class NonMinimalPairError(MvacError, ValueError):
    """Two orthogonal matrices are not at Frobenius distance 2."""
