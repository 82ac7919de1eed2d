"""
csvto.configuration.schema
==========================

Structured schemas of experiment configuration files.

Each section is a plain dataclass used with ``OmegaConf.structured``, so
values are type-checked on merge and unknown keys are rejected. Defaults
follow the quadrotor hyper-parameters.

Classes
-------
ProblemSection
    Benchmark problem selection and parameters.
SolverSection
    CSVTO solver settings.
BaselineSection
    MPPI baseline settings.
ExperimentSection
    Trial plan and output options.
ExperimentConfig
    Full configuration file.
"""

from dataclasses import dataclass, field
from typing import List, Optional

PROBLEMS = ("toy2d", "quadrotor-none", "quadrotor-static", "quadrotor-dynamic")
SOLVERS = ("csvto", "mppi")
INITIALIZATIONS = ("prior", "perturbed")


@dataclass
class ProblemSection:
    name: str = "quadrotor-none"
    dt: float = 0.05
    horizon: int = 12
    goal_threshold: float = 0.3
    surface_lengthscale: float = 2.0
    surface_seed: int = 0
    obstacle_radius: float = 0.5
    obstacle_speed: float = 0.5
    second_order_dynamics: bool = False
    likelihood_temperature: float = 0.05


@dataclass
class SolverSection:
    num_particles: int = 8
    step_size_tangent: float = 0.05
    step_size_constraint: float = 1.0
    warmstart_iterations: int = 100
    online_iterations: int = 10
    resample_steps: int = 10
    resample_temperature: float = 0.55
    resample_sigma: float = 0.1
    penalty_weight: float = 1000.0
    window: int = 3
    rng_seed: int = 0
    anneal: bool = True
    svd_cutoff: float = 1e-6
    fd_hessian_fallback: bool = False
    tol: float = 0.0
    max_penalty: float = 1e8


@dataclass
class BaselineSection:
    num_samples: int = 256
    temperature: float = 1.0
    penalty_equality: float = 1000.0
    penalty_inequality: float = 2000.0
    warmstart_iterations: int = 10
    online_iterations: int = 1
    noise_scale: float = 1.0
    rng_seed: int = 0


@dataclass
class ExperimentSection:
    """
    Trial plan and output options.

    ``iterations`` overrides the warm-start count for the ``solve`` command;
    ``init`` selects prior sampling or perturbations of one prior draw.
    """

    solver: str = "csvto"
    steps: int = 100
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    iterations: Optional[int] = None
    init: str = "prior"
    init_sigma: float = 0.01
    max_workers: int = 1
    record_timing: bool = False


@dataclass
class ExperimentConfig:
    problem: ProblemSection = field(default_factory=ProblemSection)
    solver: SolverSection = field(default_factory=SolverSection)
    baseline: BaselineSection = field(default_factory=BaselineSection)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
