"""
csvto.benchmarks
================

Built-in benchmark problems, metrics and the experiment runner.

Modules
-------
toy2d
    Constrained sampling from a 2D Gaussian mixture.
gp
    Gaussian-process surface and obstacle fields.
quadrotor
    12-DoF quadrotor on a GP surface with optional obstacles.
metrics
    Run metrics computed from execution traces.
experiment
    Configured multi-seed experiment runs with file outputs.
"""
