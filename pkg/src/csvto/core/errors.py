"""
csvto.core.errors
=================

Custom exception hierarchy for csvto.

All csvto-specific exceptions inherit from CsvtoError, so callers can catch
solver, problem and configuration failures in one place while still reading
structured details from the instance.

Classes
-------
CsvtoError
    Base exception for all csvto errors.
ProblemDefinitionError
    Raised when a problem or particle has inconsistent dimensions or bounds.
ConstraintEvaluationError
    Raised when a constraint provider fails or returns non-finite values.
NonFiniteError
    Raised when a computation produces NaN or infinite values.
LinearAlgebraError
    Raised when a factorization or decomposition fails.
KernelError
    Raised when a kernel cannot be evaluated with the given arguments.
DivergenceError
    Raised when a solve returns a plan whose controls or penalty have blown up.
ConfigurationError
    Raised when configuration is invalid or missing.
EnvironmentStepError
    Raised when an environment fails to advance during receding-horizon control.
"""

from typing import Any, Dict, Optional, Tuple


class CsvtoError(Exception):
    """
    Base exception for all csvto errors.

    Parameters
    ----------
    message : str
        Human-readable error message.
    **details : Any
        Additional structured error information.

    Attributes
    ----------
    message : str
        Human-readable error message.
    details : Dict[str, Any]
        Additional structured information about the error.
    """

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def __str__(self) -> str:
        if self.details:
            detail_str = ", ".join(f"{k}={v!r}" for k, v in self.details.items())
            return f"{self.message} ({detail_str})"
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a dictionary for structured logging.

        Returns
        -------
        Dict[str, Any]
            Structured error representation.
        """
        return {
            "type": self.__class__.__name__,
            "message": self.message,
            **self.details,
        }


class ProblemDefinitionError(CsvtoError):
    """
    Raised when a problem or particle has inconsistent dimensions or bounds.

    Parameters
    ----------
    message : str
        Human-readable error message.
    expected : Optional[Tuple[int, ...]]
        Expected shape, if applicable.
    actual : Optional[Tuple[int, ...]]
        Shape actually received, if applicable.
    **details : Any
        Additional structured error information.
    """

    def __init__(
        self,
        message: str,
        expected: Optional[Tuple[int, ...]] = None,
        actual: Optional[Tuple[int, ...]] = None,
        **details: Any,
    ) -> None:
        if expected is not None:
            details["expected"] = expected
        if actual is not None:
            details["actual"] = actual
        super().__init__(message, **details)
        self.expected = expected
        self.actual = actual


class ConstraintEvaluationError(CsvtoError):
    """
    Raised when a constraint provider fails or returns non-finite values.

    Parameters
    ----------
    message : str
        Human-readable error message.
    row : int
        Index of the first offending row in the stacked constraint vector.
    group : Optional[str]
        Name of the constraint group that owns the row.
    original_error : Optional[Exception]
        The underlying exception raised by the provider, if any.
    **details : Any
        Additional structured error information.
    """

    def __init__(
        self,
        message: str,
        row: int,
        group: Optional[str] = None,
        original_error: Optional[Exception] = None,
        **details: Any,
    ) -> None:
        super().__init__(message, row=row, group=group, **details)
        self.row = row
        self.group = group
        self.original_error = original_error

    def to_dict(self) -> Dict[str, Any]:
        """Convert exception to a dictionary for structured logging.

        Returns
        -------
        Dict[str, Any]
            Structured error representation.
        """
        result = super().to_dict()
        if self.original_error:
            result["original_error"] = {
                "type": type(self.original_error).__name__,
                "message": str(self.original_error),
            }
        return result


class NonFiniteError(CsvtoError):
    """
    Raised when a computation produces NaN or infinite values.

    Parameters
    ----------
    message : str
        Human-readable error message.
    location : str
        What was being computed (e.g. ``"rollout"``, ``"posterior_gradient"``).
    index : Optional[int]
        Timestep or particle index of the offending value.
    **details : Any
        Additional structured error information.
    """

    def __init__(
        self,
        message: str,
        location: str,
        index: Optional[int] = None,
        **details: Any,
    ) -> None:
        super().__init__(message, location=location, index=index, **details)
        self.location = location
        self.index = index


class LinearAlgebraError(CsvtoError):
    """
    Raised when a factorization or decomposition fails.

    Parameters
    ----------
    message : str
        Human-readable error message.
    operation : str
        The linear algebra operation that failed (e.g. ``"svd"``, ``"cholesky"``).
    **details : Any
        Additional structured error information.
    """

    def __init__(self, message: str, operation: str, **details: Any) -> None:
        super().__init__(message, operation=operation, **details)
        self.operation = operation


class KernelError(CsvtoError):
    """Raised when a kernel cannot be evaluated with the given arguments."""


class DivergenceError(CsvtoError):
    """Raised when a solve returns a plan whose controls or penalty have blown up."""


class ConfigurationError(CsvtoError):
    """
    Raised when configuration is invalid or missing.

    Parameters
    ----------
    message : str
        Human-readable error message.
    config_key : Optional[str]
        The configuration key that caused the error, if applicable.
    **details : Any
        Additional structured error information.

    Attributes
    ----------
    config_key : Optional[str]
        The configuration key that caused the error, if applicable.
    """

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        **details: Any,
    ) -> None:
        super().__init__(message, config_key=config_key, **details)
        self.config_key = config_key


class EnvironmentStepError(CsvtoError):
    """
    Raised when an environment fails to advance during receding-horizon control.

    Parameters
    ----------
    message : str
        Human-readable error message.
    step : int
        MPC step (1-indexed) at which the failure occurred.
    original_error : Optional[Exception]
        The underlying exception, if any.
    **details : Any
        Additional structured error information.
    """

    def __init__(
        self,
        message: str,
        step: int,
        original_error: Optional[Exception] = None,
        **details: Any,
    ) -> None:
        super().__init__(message, step=step, **details)
        self.step = step
        self.original_error = original_error
