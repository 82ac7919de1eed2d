"""
csvto.monitoring
================

Progress reporting for receding-horizon runs.

Modules
-------
progress
    Step-level progress tracking with callbacks.
"""

from csvto.monitoring.progress import RunProgress, StepProgress, StepStatus

__all__ = ["RunProgress", "StepProgress", "StepStatus"]
