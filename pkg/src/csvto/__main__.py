"""
Entry point for the `csvto` package, invoked as a module.

Usage
-----
To launch the command-line interface, execute::

    python -m csvto


See Also
--------
csvto.cli_app: Module implementing the application's command-line interface.
"""
from .cli_app import app

app()
