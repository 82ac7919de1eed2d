"""
test_csvto
==========

Tests for the csvto package.

Modules
-------
test_core
test_geometry
test_kernels
test_solver
test_baselines
test_benchmarks
test_configuration
test_datastore
test_logging
test_monitoring
test_cli_app

See Also
--------
csvto
    Tested package.

Notes
-----
This test package is imported by Sphinx to extract docstrings for documenting tests. This
documentation provides additional examples and explanations for the tested modules and functions.
"""
