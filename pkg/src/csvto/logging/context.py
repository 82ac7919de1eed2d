"""
csvto.logging.context
=====================

Execution context for structured logging.

The context records which trial and which MPC step is currently running, so
that every log line emitted from deep inside the solver can be attributed
without threading identifiers through the numerical code.

Classes
-------
LogContext
    Execution context for experiment logging.
LogContextManager
    Context manager for scoped log context.
"""

from contextvars import ContextVar
from dataclasses import dataclass, field, replace
from typing import Optional
import time


@dataclass(frozen=True)
class LogContext:
    """
    Execution context for experiment logging.

    Attributes
    ----------
    run_id : Optional[str]
        Identifier of the current trial (e.g. ``"quadrotor-none/csvto/seed_3"``).
    problem : Optional[str]
        Name of the benchmark problem being solved.
    seed : Optional[int]
        Random seed of the current trial.
    step : Optional[int]
        Current MPC step (1-indexed), if inside the receding-horizon loop.
    start_time : float
        Unix timestamp when the context was created.
    """

    run_id: Optional[str] = None
    problem: Optional[str] = None
    seed: Optional[int] = None
    step: Optional[int] = None
    start_time: float = field(default_factory=time.time)

    @property
    def elapsed_seconds(self) -> float:
        """Elapsed time since the context was created, in seconds."""
        return time.time() - self.start_time

    def with_step(self, step: int) -> "LogContext":
        """
        Create a new context for one MPC step of the same trial.

        Parameters
        ----------
        step : int
            MPC step (1-indexed).

        Returns
        -------
        LogContext
            Copy of this context with the step set.
        """
        return replace(self, step=step)

    def prefix(self) -> str:
        """
        Render the populated fields as a message prefix.

        Returns
        -------
        str
            Prefix such as ``"[run=abc] [seed=3] "``, or an empty string.
        """
        parts = []
        if self.run_id:
            parts.append(f"[run={self.run_id}]")
        if self.problem:
            parts.append(f"[problem={self.problem}]")
        if self.seed is not None:
            parts.append(f"[seed={self.seed}]")
        if self.step is not None:
            parts.append(f"[step={self.step}]")
        return " ".join(parts) + " " if parts else ""

    @classmethod
    def current(cls) -> "LogContext":
        """Get the current context."""
        return _current_context.get()

    @classmethod
    def set_current(cls, context: "LogContext") -> None:
        """
        Set the current context.

        Parameters
        ----------
        context : LogContext
            The context to set as current.
        """
        _current_context.set(context)

    @classmethod
    def clear(cls) -> None:
        """Clear the current context, resetting to defaults."""
        _current_context.set(LogContext())


_current_context: ContextVar[LogContext] = ContextVar(
    "csvto_log_context",
    default=LogContext(),
)


class LogContextManager:
    """
    Context manager for scoped log context.

    Fields left as None are inherited from the enclosing context, so a step
    scope opened inside a trial scope keeps the trial's run id and seed.

    Parameters
    ----------
    run_id : Optional[str]
        Identifier of the current trial.
    problem : Optional[str]
        Name of the benchmark problem.
    seed : Optional[int]
        Random seed of the current trial.
    step : Optional[int]
        Current MPC step.

    Examples
    --------
    >>> with LogContextManager(run_id="toy2d/csvto/seed_0", seed=0):
    ...     logger.info("Trial started")
    """

    def __init__(
        self,
        run_id: Optional[str] = None,
        problem: Optional[str] = None,
        seed: Optional[int] = None,
        step: Optional[int] = None,
    ) -> None:
        self._overrides = {
            "run_id": run_id,
            "problem": problem,
            "seed": seed,
            "step": step,
        }
        self._previous: Optional[LogContext] = None

    def __enter__(self) -> LogContext:
        self._previous = LogContext.current()
        changes = {k: v for k, v in self._overrides.items() if v is not None}
        new_context = replace(self._previous, **changes)
        LogContext.set_current(new_context)
        return new_context

    def __exit__(self, *args: object) -> None:
        if self._previous is not None:
            LogContext.set_current(self._previous)
