"""
csvto.solver
============

Constrained Stein variational trajectory optimization and its
receding-horizon driver.

Modules
-------
config
    Solver hyper-parameters.
csvto
    Stein direction, update step, best-particle selection, shift and resampling.
mpc
    Receding-horizon loop and execution traces.
"""

from csvto.solver.config import SolverConfig
from csvto.solver.csvto import (
    IterationDiagnostics,
    ResampleResult,
    SolveResult,
    csvto_step,
    initialize_slack,
    penalty,
    project_bounds,
    resample,
    shift,
    softmin_weights,
    solve,
    stein_direction,
)
from csvto.solver.mpc import Environment, MpcTrace, TraceRow, mpc_run

__all__ = [
    "Environment",
    "IterationDiagnostics",
    "MpcTrace",
    "ResampleResult",
    "SolveResult",
    "SolverConfig",
    "TraceRow",
    "csvto_step",
    "initialize_slack",
    "mpc_run",
    "penalty",
    "project_bounds",
    "resample",
    "shift",
    "softmin_weights",
    "solve",
    "stein_direction",
]
