"""
csvto.core
==========

Problem definitions for trajectory optimization under direct transcription.

The `core` package holds the decision-variable containers, the problem
definition with its derivative providers, the transcription utilities that
turn dynamics into equality constraints, and the finite-difference helpers
used as derivative oracles.

Modules
-------
errors
    Exception hierarchy for csvto errors.
particles
    Trajectory particles, augmented particles and their flat layout.
problem
    Problem definition, constraint groups and the constraint bundle.
transcription
    Dynamics rollouts, defect assembly and augmented constraint evaluation.
derivatives
    Central finite-difference Jacobians and Hessians.

See Also
--------
test_core
    Contains tests for the core package.
"""
