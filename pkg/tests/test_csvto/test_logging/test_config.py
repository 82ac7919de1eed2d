"""
test_csvto.test_logging.test_config
===================================

Tests for csvto.logging.config module.
"""

import io
import logging

from csvto.core.errors import NonFiniteError
from csvto.logging import LogContextManager, LogLevel, configure_logging, get_logger


class TestConfigureLogging:
    """Tests for configure_logging and StructuredFormatter."""

    def test_writes_to_stream_with_context(self):
        stream = io.StringIO()
        configure_logging(LogLevel.INFO, stream=stream)
        with LogContextManager(run_id="toy2d/csvto/seed_0", seed=0):
            get_logger("solver").info("solve started")
        output = stream.getvalue()
        assert "[run=toy2d/csvto/seed_0] [seed=0] solve started" in output
        assert "| INFO" in output

    def test_level_filters(self):
        stream = io.StringIO()
        configure_logging("warning", stream=stream)
        logger = get_logger("csvto.solver")
        logger.info("hidden")
        logger.warning("shown")
        assert "hidden" not in stream.getvalue()
        assert "shown" in stream.getvalue()

    def test_without_context(self):
        stream = io.StringIO()
        configure_logging(LogLevel.DEBUG, stream=stream, include_context=False, format_string="%(message)s")
        with LogContextManager(seed=4):
            get_logger("x").debug("plain")
        assert stream.getvalue() == "plain\n"

    def test_error_details_appended(self):
        stream = io.StringIO()
        configure_logging(LogLevel.INFO, stream=stream, format_string="%(message)s")
        try:
            raise NonFiniteError("Stein direction is not finite", location="stein_direction", index=2)
        except NonFiniteError:
            get_logger("solver").error("step failed", exc_info=True)
        assert "error={'type': 'NonFiniteError'" in stream.getvalue()

    def test_reconfigure_replaces_handlers(self):
        configure_logging(stream=io.StringIO())
        configure_logging(stream=io.StringIO())
        logger = logging.getLogger("csvto")
        assert len(logger.handlers) == 1
        assert logger.propagate is False

    def test_log_file(self, tmp_path):
        path = tmp_path / "bench.log"
        configure_logging(stream=io.StringIO(), log_file=str(path), format_string="%(message)s")
        get_logger("bench").info("to file")
        for handler in logging.getLogger("csvto").handlers:
            handler.flush()
        assert "to file" in path.read_text()

    def test_stream_and_file_prefixed_once(self, tmp_path):
        stream = io.StringIO()
        path = tmp_path / "bench.log"
        configure_logging(stream=stream, log_file=str(path), format_string="%(message)s")
        with LogContextManager(run_id="r1"):
            get_logger("bench").info("hello %d", 3)
        for handler in logging.getLogger("csvto").handlers:
            handler.flush()
        assert stream.getvalue() == "[run=r1] hello 3\n"
        assert path.read_text() == "[run=r1] hello 3\n"

    def test_record_left_unchanged(self):
        configure_logging(stream=io.StringIO(), format_string="%(message)s")
        handler = logging.getLogger("csvto").handlers[0]
        record = logging.LogRecord("csvto.bench", logging.INFO, __file__, 1, "value %d", (7,), None)
        with LogContextManager(seed=1):
            assert handler.format(record) == "[seed=1] value 7"
        assert record.msg == "value %d"
        assert record.args == (7,)


class TestGetLogger:
    """Tests for get_logger."""

    def test_prefixes_namespace(self):
        assert get_logger("solver").name == "csvto.solver"

    def test_keeps_package_names(self):
        assert get_logger("csvto.solver.mpc").name == "csvto.solver.mpc"
