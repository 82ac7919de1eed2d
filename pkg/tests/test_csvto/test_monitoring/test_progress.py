"""
test_csvto.test_monitoring.test_progress
========================================

Tests for csvto.monitoring.progress module.
"""

import time

import pytest

from csvto.monitoring.progress import RunProgress, StepProgress, StepStatus


class TestStepStatus:
    """Tests for StepStatus enum."""

    def test_status_values(self):
        """Test that all expected statuses exist."""
        assert StepStatus.PENDING.value == "pending"
        assert StepStatus.RUNNING.value == "running"
        assert StepStatus.COMPLETED.value == "completed"
        assert StepStatus.FAILED.value == "failed"


class TestStepProgress:
    """Tests for StepProgress dataclass."""

    def test_default_values(self):
        """Test default step progress values."""
        progress = StepProgress(step=1)
        assert progress.status == StepStatus.PENDING
        assert progress.start_time is None
        assert progress.end_time is None
        assert progress.error is None

    def test_duration_not_started(self):
        assert StepProgress(step=1).duration_seconds is None

    def test_duration_completed(self):
        """Test duration when completed."""
        start = time.time() - 5.0
        end = time.time() - 2.0
        progress = StepProgress(step=1, status=StepStatus.COMPLETED, start_time=start, end_time=end)
        assert progress.duration_seconds == pytest.approx(3.0, abs=0.1)


class TestRunProgress:
    """Tests for RunProgress."""

    def test_initial_state(self):
        """Test initial tracker state."""
        tracker = RunProgress("run", total_steps=5)
        assert tracker.run_name == "run"
        assert tracker.completed_count == 0
        assert tracker.failed_count == 0
        assert tracker.percentage == 0.0
        assert not tracker.is_complete

    def test_start_and_complete_step(self):
        tracker = RunProgress("run", total_steps=4)
        tracker.start_step(1)
        assert tracker.steps[1].status == StepStatus.RUNNING
        tracker.complete_step(1)
        assert tracker.steps[1].status == StepStatus.COMPLETED
        assert tracker.steps[1].end_time is not None
        assert tracker.percentage == pytest.approx(25.0)

    def test_fail_step(self):
        """Test failing a step ends the run."""
        tracker = RunProgress("run", total_steps=3)
        tracker.start_step(1)
        tracker.fail_step(1, "solver diverged")
        assert tracker.steps[1].error == "solver diverged"
        assert tracker.failed_count == 1
        assert tracker.is_complete

    def test_is_complete(self):
        tracker = RunProgress("run", total_steps=2)
        tracker.complete_step(1)
        assert not tracker.is_complete
        tracker.complete_step(2)
        assert tracker.is_complete

    def test_zero_steps(self):
        assert RunProgress("run", total_steps=0).percentage == 100.0

    def test_callback_notification(self):
        """Test that callbacks see every update."""
        seen = []
        tracker = RunProgress("run", total_steps=2)
        tracker.add_callback(lambda t: seen.append(t.percentage))
        tracker.complete_step(1)
        tracker.complete_step(2)
        assert seen == [pytest.approx(50.0), pytest.approx(100.0)]

    def test_failing_callback_is_isolated(self, caplog):
        """Test that a raising callback does not interrupt the run."""

        def broken(tracker):
            raise RuntimeError("boom")

        tracker = RunProgress("run", total_steps=1)
        tracker.add_callback(broken)
        tracker.complete_step(1)
        assert tracker.completed_count == 1
        assert "Progress callback failed" in caplog.text

    def test_finish(self):
        tracker = RunProgress("run", total_steps=1)
        tracker.complete_step(1)
        tracker.finish()
        assert tracker.end_time is not None
        assert tracker.elapsed_seconds >= 0.0

    def test_to_dict(self):
        """Test conversion to dictionary."""
        tracker = RunProgress("run", total_steps=3)
        tracker.start_step(1)
        tracker.complete_step(1)
        tracker.fail_step(2, "error")
        result = tracker.to_dict()
        assert result["run_name"] == "run"
        assert result["total_steps"] == 3
        assert result["completed"] == 1
        assert result["failed"] == 1
        assert result["steps"][1]["status"] == "completed"
        assert result["steps"][2]["error"] == "error"

    def test_summary(self):
        tracker = RunProgress("quadrotor-none/csvto/seed_0", total_steps=4)
        tracker.complete_step(1)
        summary = tracker.summary()
        assert summary.startswith("quadrotor-none/csvto/seed_0: 25%")
        assert "1/4 steps" in summary
