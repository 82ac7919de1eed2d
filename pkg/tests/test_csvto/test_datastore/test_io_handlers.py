"""
test_csvto.test_datastore.test_io_handlers
==========================================

Tests for csvto.datastore.io_handlers module.
"""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from csvto.datastore.io_handlers import (
    CSVHandler,
    HandlerRegistry,
    JSONHandler,
    Table,
    YAMLHandler,
    get_handler,
    read_file,
    write_file,
)


@pytest.fixture
def table():
    return Table.from_rows(["step", "x_0", "u_0"], [[1, 0.1, -2.5], [2, 1.0 / 3.0, 1e-12]])


class TestTable:
    """Tests for Table."""

    def test_column(self, table):
        assert_array_equal(table.column("step"), [1.0, 2.0])

    def test_unknown_column(self, table):
        with pytest.raises(ValueError):
            table.column("missing")

    def test_rows_reshaped(self):
        assert Table(["a", "b"], [1.0, 2.0, 3.0, 4.0]).rows.shape == (2, 2)


class TestCSVHandler:
    """Tests for CSVHandler."""

    def test_header_line(self, tmp_path, table):
        path = tmp_path / "trace.csv"
        CSVHandler().write(path, table)
        assert path.read_text().splitlines()[0] == "step,x_0,u_0"

    def test_values_exact(self, tmp_path, table):
        """Test that 17 significant digits restore every double."""
        path = tmp_path / "trace.csv"
        CSVHandler().write(path, table)
        loaded = CSVHandler().read(path)
        assert loaded.header == table.header
        assert_array_equal(loaded.rows, table.rows)

    def test_identical_bytes(self, tmp_path, table):
        CSVHandler().write(tmp_path / "a.csv", table)
        CSVHandler().write(tmp_path / "b.csv", table)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        CSVHandler().write(path, Table.from_rows(["a", "b"], [[1.0, 2.0]]))
        assert CSVHandler().read(path).rows.shape == (1, 2)

    def test_creates_parent(self, tmp_path, table):
        path = tmp_path / "toy2d" / "csvto" / "seed_0" / "particles.csv"
        CSVHandler().write(path, table)
        assert path.exists()


class TestJSONHandler:
    """Tests for JSONHandler."""

    def test_numpy_values(self, tmp_path):
        path = tmp_path / "metrics.json"
        JSONHandler().write(path, {"b": np.float64(0.5), "a": np.arange(3), "c": np.int64(2)})
        assert JSONHandler().read(path) == {"a": [0, 1, 2], "b": 0.5, "c": 2}

    def test_sorted_keys(self, tmp_path):
        path = tmp_path / "summary.json"
        JSONHandler().write(path, {"b": 1, "a": 2})
        text = path.read_text()
        assert text.index('"a"') < text.index('"b"')

    def test_unserializable(self, tmp_path):
        with pytest.raises(TypeError):
            JSONHandler().write(tmp_path / "bad.json", {"a": object()})


class TestYAMLHandler:
    """Tests for YAMLHandler."""

    def test_write_read(self, tmp_path):
        path = tmp_path / "config.yaml"
        YAMLHandler().write(path, {"solver": {"num_particles": 8}})
        assert YAMLHandler().read(path) == {"solver": {"num_particles": 8}}


class TestHandlerRegistry:
    """Tests for HandlerRegistry."""

    def test_default_extensions(self):
        registry = HandlerRegistry()
        assert set(registry.extensions) == {".csv", ".json", ".yaml", ".yml"}
        assert ".YML" in registry

    def test_empty_registry(self):
        registry = HandlerRegistry(register_defaults=False)
        with pytest.raises(ValueError):
            registry.get_handler("metrics.json")

    def test_register(self):
        registry = HandlerRegistry(register_defaults=False)
        registry.register(YAMLHandler())
        assert isinstance(registry.get_handler("c.yml"), YAMLHandler)

    def test_unknown_extension(self):
        with pytest.raises(ValueError):
            get_handler("results.h5")

    def test_module_functions(self, tmp_path, table):
        write_file(tmp_path / "t.csv", table)
        write_file(tmp_path / "m.json", {"ok": True})
        assert read_file(tmp_path / "t.csv").header == table.header
        assert read_file(tmp_path / "m.json") == {"ok": True}
