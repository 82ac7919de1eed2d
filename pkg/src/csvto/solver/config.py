"""
csvto.solver.config
===================

Hyper-parameters of the constrained Stein solver.

Classes
-------
SolverConfig
    Validated solver hyper-parameters.
"""

from dataclasses import dataclass

from csvto.core.errors import ConfigurationError


@dataclass(frozen=True)
class SolverConfig:
    """
    Validated solver hyper-parameters.

    Defaults are the quadrotor settings.

    Attributes
    ----------
    num_particles : int
        Number of particles ``N``.
    step_size_tangent : float
        ``alpha_J``, step size of the tangent-space Stein direction.
    step_size_constraint : float
        ``alpha_C``, step size of the Gauss-Newton feasibility step.
    warmstart_iterations : int
        ``K_w``, iterations of the first MPC solve.
    online_iterations : int
        ``K_o``, iterations of every later MPC solve.
    resample_steps : int
        Resample the particles every this many MPC steps.
    resample_temperature : float
        ``beta``, temperature of the softmin resampling weights.
    resample_sigma : float
        Standard deviation of the tangent-space resampling noise.
    penalty_weight : float
        ``lambda`` in ``C + lambda * sum |h|``.
    window : int
        Trajectory-kernel window length ``W``.
    rng_seed : int
        Seed of the solver's random generator.
    anneal : bool
        Use the linear annealing schedule on the warm-start solve.
    svd_cutoff : float
        Singular-value threshold of the Gram pseudo-inverse.
    fd_hessian_fallback : bool
        Finite-difference Hessians for constraint groups without analytic ones.
    tol : float
        Stop a solve early once every particle's combined step norm is below
        this value; 0 disables early stopping.
    max_penalty : float
        Receding-horizon runs stop with a failure when the best plan's
        penalty exceeds this value.
    """

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

    def __post_init__(self) -> None:
        checks = {
            "num_particles": self.num_particles >= 1,
            "step_size_tangent": self.step_size_tangent > 0,
            "step_size_constraint": self.step_size_constraint > 0,
            "warmstart_iterations": self.warmstart_iterations >= 1,
            "online_iterations": self.online_iterations >= 1,
            "resample_steps": self.resample_steps >= 1,
            "resample_temperature": self.resample_temperature > 0,
            "resample_sigma": self.resample_sigma >= 0,
            "penalty_weight": self.penalty_weight >= 0,
            "window": self.window >= 1,
            "svd_cutoff": self.svd_cutoff > 0,
            "tol": self.tol >= 0,
            "max_penalty": self.max_penalty > 0,
        }
        for key, ok in checks.items():
            if not ok:
                raise ConfigurationError(
                    f"Invalid solver setting '{key}'",
                    config_key=f"solver.{key}",
                    value=getattr(self, key),
                )
