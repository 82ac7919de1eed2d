"""
csvto.datastore
===============

Result file I/O: numeric CSV tables, JSON summaries and YAML snapshots.

Modules
-------
io_handlers
    File handlers and the extension registry.
"""

from csvto.datastore.io_handlers import (
    CSVHandler,
    HandlerRegistry,
    IOHandler,
    JSONHandler,
    Table,
    YAMLHandler,
    get_handler,
    read_file,
    write_file,
)

__all__ = [
    "CSVHandler",
    "HandlerRegistry",
    "IOHandler",
    "JSONHandler",
    "Table",
    "YAMLHandler",
    "get_handler",
    "read_file",
    "write_file",
]
