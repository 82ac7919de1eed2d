"""
csvto: constrained Stein variational trajectory optimization.

Particles represent whole trajectories under direct transcription. Each
iteration moves them along a Stein direction restricted to the tangent space
of the constraint manifold, plus a Gauss-Newton step towards it, so the
particle set stays diverse while converging to feasible trajectories.

- **Core**: decision layout, particles, problem definitions, transcription
- **Geometry**: tangent-space projection, its derivative, slack variables
- **Kernels**: RBF, sliding-window trajectory kernel, tangent-space kernel
- **Solver**: the iteration, best-particle selection and receding-horizon loop
- **Baselines**: penalty-based MPPI
- **Benchmarks**: toy 2D mixture and 12-DoF quadrotor tasks, metrics, runner

Example
-------
>>> import numpy as np
>>> from csvto import SolverConfig, make_toy2d, sample_initial_particles, solve
>>> problem = make_toy2d()
>>> cfg = SolverConfig(num_particles=4)
>>> particles = sample_initial_particles(problem, 4, np.random.default_rng(0))
>>> result = solve(problem.initial_state, particles, 50, True, problem, cfg)
>>> result.best_trajectory.states.shape
(1, 2)
"""

from importlib.metadata import PackageNotFoundError, version
import platform

try:
    if __package__ is None:
        raise PackageNotFoundError
    __version__ = version(__package__)
except PackageNotFoundError:
    __version__ = "0.0.0+unknown"

# Core
from csvto.core.errors import (
    ConfigurationError,
    ConstraintEvaluationError,
    CsvtoError,
    DivergenceError,
    EnvironmentStepError,
    KernelError,
    LinearAlgebraError,
    NonFiniteError,
    ProblemDefinitionError,
)
from csvto.core.particles import AugmentedParticle, DecisionLayout, TrajectoryParticle
from csvto.core.problem import Bounds, ConstraintBundle, ConstraintGroup, ControlPrior, ProblemDef
from csvto.core.transcription import eval_constraints, sample_initial_particles

# Solver
from csvto.solver.config import SolverConfig
from csvto.solver.csvto import SolveResult, resample, shift, solve
from csvto.solver.mpc import MpcTrace, mpc_run

# Baselines
from csvto.baselines.mppi import MppiConfig, mppi_mpc_run

# Benchmarks
from csvto.benchmarks.quadrotor import QuadrotorParams, make_quadrotor
from csvto.benchmarks.toy2d import Toy2DProblem, make_toy2d

__all__ = [
    "__version__",
    "info",
    # Errors
    "CsvtoError",
    "ConfigurationError",
    "ConstraintEvaluationError",
    "DivergenceError",
    "EnvironmentStepError",
    "KernelError",
    "LinearAlgebraError",
    "NonFiniteError",
    "ProblemDefinitionError",
    # Core
    "AugmentedParticle",
    "Bounds",
    "ConstraintBundle",
    "ConstraintGroup",
    "ControlPrior",
    "DecisionLayout",
    "ProblemDef",
    "TrajectoryParticle",
    "eval_constraints",
    "sample_initial_particles",
    # Solver
    "MpcTrace",
    "SolveResult",
    "SolverConfig",
    "mpc_run",
    "resample",
    "shift",
    "solve",
    # Baselines
    "MppiConfig",
    "mppi_mpc_run",
    # Benchmarks
    "QuadrotorParams",
    "Toy2DProblem",
    "make_quadrotor",
    "make_toy2d",
]


def info() -> str:
    """
    Format diagnostic information on package and platform.

    Returns
    -------
    str
        A string with the package name, version, OS, and Python version.
    """
    return f"{__package__} {__version__} | Platform: {platform.system()} Python {platform.python_version()}"
