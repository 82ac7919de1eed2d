"""
csvto.monitoring.progress
=========================

Progress tracking for receding-horizon runs.

Classes
-------
StepStatus
    Lifecycle status of one MPC step.
StepProgress
    Progress information for a single MPC step.
RunProgress
    Track progress of an MPC run.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)


class StepStatus(str, Enum):
    """Lifecycle status of one MPC step."""

    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class StepProgress:
    """Progress information for a single MPC step.

    Attributes
    ----------
    step : int
        MPC step (1-indexed).
    status : StepStatus
        Current status of the step.
    start_time : float or None
        Timestamp when the step started.
    end_time : float or None
        Timestamp when the step finished.
    error : str or None
        Error message if the step failed.
    """

    step: int
    status: StepStatus = StepStatus.PENDING
    start_time: Optional[float] = None
    end_time: Optional[float] = None
    error: Optional[str] = None

    @property
    def duration_seconds(self) -> Optional[float]:
        """Step duration in seconds, or None if the step has not started."""
        if self.start_time is None:
            return None
        end = self.end_time or time.time()
        return end - self.start_time


@dataclass
class RunProgress:
    """
    Track progress of an MPC run.

    Attributes
    ----------
    run_name : str
        Name of the run being tracked (usually the trial's run id).
    total_steps : int
        Number of MPC steps planned.
    steps : Dict[int, StepProgress]
        Progress of every step seen so far.
    callbacks : List[Callable]
        Functions called on every update.

    Examples
    --------
    >>> tracker = RunProgress("quadrotor-none/csvto/seed_0", 100)
    >>> tracker.add_callback(lambda t: print(f"{t.percentage:.0f}%"))
    >>> tracker.start_step(1)
    0%
    >>> tracker.complete_step(1)
    1%
    """

    run_name: str
    total_steps: int
    steps: Dict[int, StepProgress] = field(default_factory=dict)
    callbacks: List[Callable[["RunProgress"], None]] = field(default_factory=list)
    start_time: Optional[float] = None
    end_time: Optional[float] = None

    def __post_init__(self) -> None:
        self.start_time = time.time()

    @property
    def completed_count(self) -> int:
        """Number of completed steps."""
        return sum(1 for s in self.steps.values() if s.status == StepStatus.COMPLETED)

    @property
    def failed_count(self) -> int:
        """Number of failed steps."""
        return sum(1 for s in self.steps.values() if s.status == StepStatus.FAILED)

    @property
    def percentage(self) -> float:
        """Completion percentage from 0 to 100."""
        if self.total_steps == 0:
            return 100.0
        return (self.completed_count / self.total_steps) * 100

    @property
    def elapsed_seconds(self) -> float:
        """Elapsed time since the run started, in seconds."""
        if self.start_time is None:
            return 0.0
        end = self.end_time or time.time()
        return end - self.start_time

    @property
    def is_complete(self) -> bool:
        """True once every step completed or the run failed."""
        return self.failed_count > 0 or self.completed_count >= self.total_steps

    def add_callback(self, callback: Callable[["RunProgress"], None]) -> None:
        """Register a callback to be called on progress updates.

        Parameters
        ----------
        callback : Callable[[RunProgress], None]
            Function to invoke on each progress update.
        """
        self.callbacks.append(callback)

    def _notify(self) -> None:
        for callback in self.callbacks:
            try:
                callback(self)
            except Exception as e:  # pylint: disable=broad-except
                logger.warning("Progress callback failed: %s", e)

    def start_step(self, step: int) -> None:
        """Mark a step as running."""
        self.steps[step] = StepProgress(step=step, status=StepStatus.RUNNING, start_time=time.time())
        self._notify()

    def complete_step(self, step: int) -> None:
        """Mark a step as completed."""
        progress = self.steps.setdefault(step, StepProgress(step=step))
        progress.status = StepStatus.COMPLETED
        progress.end_time = time.time()
        logger.debug(
            "Step %d completed in %.3fs (%d/%d)",
            step,
            progress.duration_seconds or 0.0,
            self.completed_count,
            self.total_steps,
        )
        self._notify()

    def fail_step(self, step: int, error: str) -> None:
        """Mark a step as failed.

        Parameters
        ----------
        step : int
            The failing step.
        error : str
            Error message describing the failure.
        """
        progress = self.steps.setdefault(step, StepProgress(step=step))
        progress.status = StepStatus.FAILED
        progress.end_time = time.time()
        progress.error = error
        logger.error("Step %d failed: %s", step, error)
        self._notify()

    def finish(self) -> None:
        """Mark the run as finished."""
        self.end_time = time.time()
        status = "completed" if self.failed_count == 0 else "failed"
        logger.info(
            "Run '%s' %s in %.2fs (%d/%d steps)",
            self.run_name,
            status,
            self.elapsed_seconds,
            self.completed_count,
            self.total_steps,
        )
        self._notify()

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the progress state.

        Returns
        -------
        Dict[str, Any]
            Progress state including per-step durations.
        """
        return {
            "run_name": self.run_name,
            "total_steps": self.total_steps,
            "completed": self.completed_count,
            "failed": self.failed_count,
            "percentage": self.percentage,
            "elapsed_seconds": self.elapsed_seconds,
            "is_complete": self.is_complete,
            "steps": {
                step: {
                    "status": progress.status.value,
                    "duration_seconds": progress.duration_seconds,
                    "error": progress.error,
                }
                for step, progress in self.steps.items()
            },
        }

    def summary(self) -> str:
        """Human-readable one-line summary."""
        return (
            f"{self.run_name}: {self.percentage:.0f}% "
            f"({self.completed_count}/{self.total_steps} steps, "
            f"{self.elapsed_seconds:.1f}s elapsed)"
        )
