"""
test_csvto.test_core
====================

Tests for the csvto package, core module.

Modules
-------
test_errors
test_particles
test_problem
test_derivatives
test_transcription

See Also
--------
csvto.core
    Tested module.
"""
