"""
csvto.baselines
===============

Baseline planners for head-to-head comparisons.

Modules
-------
mppi
    Penalty-based model predictive path integral control.
"""

from csvto.baselines.mppi import MppiConfig, mppi_mpc_run, mppi_step, penalty_cost

__all__ = ["MppiConfig", "mppi_mpc_run", "mppi_step", "penalty_cost"]
