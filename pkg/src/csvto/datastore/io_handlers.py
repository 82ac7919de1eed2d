"""
csvto.datastore.io_handlers
===========================

I/O handlers for result files.

Numeric tables are written with ``%.17g`` so that floats round-trip exactly
and repeated runs produce byte-identical files. JSON output uses sorted keys.

Classes
-------
Table
    Header plus a 2D numeric array.
IOHandler
    Abstract base class for file I/O operations.
CSVHandler
    Handler for numeric CSV tables.
JSONHandler
    Handler for JSON files.
YAMLHandler
    Handler for YAML files.
HandlerRegistry
    Registry of IOHandlers by file extension.

Functions
---------
get_handler
    Get appropriate handler for a file path.
read_file
    Read data from a file using the appropriate handler.
write_file
    Write data to a file using the appropriate handler.
"""

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import yaml

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Table:
    """
    Header plus a 2D numeric array.

    Attributes
    ----------
    header : List[str]
        Column names.
    rows : np.ndarray
        Values, shape ``(n_rows, len(header))``.
    """

    header: List[str]
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.header))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "header", list(self.header))

    @classmethod
    def from_rows(cls, header: Sequence[str], rows: Sequence[Sequence[float]]) -> "Table":
        """Build a table from nested row sequences."""
        return cls(list(header), np.asarray(rows, dtype=float).reshape(-1, len(header)))

    def column(self, name: str) -> np.ndarray:
        """Values of one named column."""
        return self.rows[:, self.header.index(name)]


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not serializable")


class IOHandler(ABC):
    """
    Abstract base class for file I/O operations.

    Attributes
    ----------
    EXTENSIONS : List[str]
        File extensions this handler supports.
    """

    EXTENSIONS: List[str] = []

    @classmethod
    def supports(cls, path: PathLike) -> bool:
        """Whether this handler supports the file extension of `path`."""
        return Path(path).suffix.lower() in cls.EXTENSIONS

    @abstractmethod
    def read(self, path: PathLike) -> Any:
        """Read data from a file."""

    @abstractmethod
    def write(self, path: PathLike, data: Any) -> None:
        """Write data to a file, creating parent directories."""


class CSVHandler(IOHandler):
    """
    Handler for numeric CSV tables.

    Examples
    --------
    >>> handler = CSVHandler()
    >>> handler.write("trace.csv", Table(["step", "x_0"], [[1, 0.5]]))
    >>> handler.read("trace.csv").column("x_0")
    array([0.5])
    """

    EXTENSIONS = [".csv"]
    FORMAT = "%.17g"

    def read(self, path: PathLike) -> Table:
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip().split(",")
            rows = np.loadtxt(f, delimiter=",", ndmin=2)
        return Table(header, rows.reshape(-1, len(header)))

    def write(self, path: PathLike, data: Table) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            np.savetxt(f, data.rows, fmt=self.FORMAT, delimiter=",", header=",".join(data.header), comments="")
        logger.debug("Wrote %d rows to %s", data.rows.shape[0], path)


class JSONHandler(IOHandler):
    """
    Handler for JSON files, written with sorted keys.

    Parameters
    ----------
    indent : int
        Indentation level for pretty-printing.
    """

    EXTENSIONS = [".json"]

    def __init__(self, indent: int = 2):
        self.indent = indent

    def read(self, path: PathLike) -> Any:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    def write(self, path: PathLike, data: Any) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=self.indent, sort_keys=True, default=_to_builtin)
            f.write("\n")


class YAMLHandler(IOHandler):
    """Handler for YAML files."""

    EXTENSIONS = [".yaml", ".yml"]

    def read(self, path: PathLike) -> Any:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f)

    def write(self, path: PathLike, data: Any) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=True)


class HandlerRegistry:
    """
    Registry of IOHandlers by file extension.

    Parameters
    ----------
    register_defaults : bool
        If True, register the CSV, JSON and YAML handlers on creation.

    Examples
    --------
    >>> registry = HandlerRegistry()
    >>> handler = registry.get_handler("metrics.json")
    """

    def __init__(self, register_defaults: bool = True):
        self._handlers: Dict[str, IOHandler] = {}
        if register_defaults:
            self.register_defaults()

    def register(self, handler: IOHandler) -> None:
        """Register a handler for its supported extensions."""
        for ext in handler.EXTENSIONS:
            self._handlers[ext] = handler

    def register_defaults(self) -> None:
        """Register the default handlers (CSV, JSON, YAML)."""
        self.register(CSVHandler())
        self.register(JSONHandler())
        self.register(YAMLHandler())

    def get_handler(self, path: PathLike) -> IOHandler:
        """
        Get appropriate handler for a file path.

        Raises
        ------
        ValueError
            If no handler supports the file extension.
        """
        suffix = Path(path).suffix.lower()
        if suffix not in self._handlers:
            raise ValueError(f"No handler registered for extension '{suffix}'")
        return self._handlers[suffix]

    def read(self, path: PathLike) -> Any:
        return self.get_handler(path).read(path)

    def write(self, path: PathLike, data: Any) -> None:
        self.get_handler(path).write(path, data)

    @property
    def extensions(self) -> List[str]:
        """Registered file extensions."""
        return list(self._handlers.keys())

    def __contains__(self, ext: str) -> bool:
        return ext.lower() in self._handlers


_default_registry: HandlerRegistry | None = None


def _get_default_registry() -> HandlerRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = HandlerRegistry(register_defaults=True)
    return _default_registry


def get_handler(path: PathLike) -> IOHandler:
    """Get the default registry's handler for a file path."""
    return _get_default_registry().get_handler(path)


def read_file(path: PathLike) -> Any:
    """
    Read data from a file using the appropriate handler.

    Parameters
    ----------
    path : Union[str, Path]
        File path.

    Returns
    -------
    Any
        Loaded data (`Table` for CSV files).
    """
    return _get_default_registry().read(path)


def write_file(path: PathLike, data: Any) -> None:
    """
    Write data to a file using the appropriate handler.

    Parameters
    ----------
    path : Union[str, Path]
        File path.
    data : Any
        Data to write (`Table` for CSV files).
    """
    _get_default_registry().write(path, data)
