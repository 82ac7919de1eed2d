"""
csvto.logging
=============

Structured logging for solver runs and experiments.

Functions
---------
configure_logging
    Configure the ``csvto`` logger with structured output.
get_logger
    Get a logger under the ``csvto`` namespace.
"""

from csvto.logging.config import configure_logging, get_logger, LogLevel
from csvto.logging.context import LogContext, LogContextManager

__all__ = ["configure_logging", "get_logger", "LogLevel", "LogContext", "LogContextManager"]
