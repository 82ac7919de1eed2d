"""
csvto.baselines.mppi
====================

Penalty-based MPPI baseline.

Control sequences are perturbed with noise drawn from the problem's control
prior, rolled out through the dynamics (so defects vanish by construction),
scored with ``C + lambda * sum |h| + mu * sum max(g, 0)`` and averaged with
softmin weights.

Classes
-------
MppiConfig
    MPPI hyper-parameters.

Functions
---------
penalty_cost
    Penalized cost of a rolled-out trajectory.
mppi_step
    One MPPI update of a nominal control sequence.
mppi_mpc_run
    Receding-horizon loop driven by MPPI.
"""

import logging
import time
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from csvto.core.errors import ConfigurationError, CsvtoError, EnvironmentStepError, ProblemDefinitionError
from csvto.core.particles import TrajectoryParticle
from csvto.core.problem import ProblemDef
from csvto.core.transcription import rollout_dynamics
from csvto.logging.context import LogContextManager
from csvto.monitoring.progress import RunProgress
from csvto.solver.csvto import softmin_weights
from csvto.solver.mpc import STATUS_FAILED, Environment, MpcTrace, TraceRow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MppiConfig:
    """
    MPPI hyper-parameters.

    Attributes
    ----------
    num_samples : int
        Number of sampled control sequences per update.
    temperature : float
        Softmin temperature of the sample weights.
    penalty_equality : float
        ``lambda``, weight of ``sum |h|``.
    penalty_inequality : float
        ``mu``, weight of ``sum max(g, 0)``.
    warmstart_iterations : int
        Updates at the first MPC step.
    online_iterations : int
        Updates at every later MPC step.
    noise_scale : float
        Multiplier on the control-prior standard deviation.
    rng_seed : int
        Seed of the sampling generator.
    """

    num_samples: int = 256
    temperature: float = 1.0
    penalty_equality: float = 1000.0
    penalty_inequality: float = 2000.0
    warmstart_iterations: int = 10
    online_iterations: int = 1
    noise_scale: float = 1.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        checks = {
            "num_samples": self.num_samples >= 1,
            "temperature": self.temperature > 0,
            "penalty_equality": self.penalty_equality >= 0,
            "penalty_inequality": self.penalty_inequality >= 0,
            "warmstart_iterations": self.warmstart_iterations >= 1,
            "online_iterations": self.online_iterations >= 1,
            "noise_scale": self.noise_scale >= 0,
        }
        for key, ok in checks.items():
            if not ok:
                raise ConfigurationError(
                    f"Invalid baseline setting '{key}'",
                    config_key=f"baseline.{key}",
                    value=getattr(self, key),
                )


def penalty_cost(
    problem: ProblemDef,
    trajectory: TrajectoryParticle,
    penalty_equality: float,
    penalty_inequality: float,
) -> float:
    """
    Penalized cost ``C + lambda * sum |h| + mu * sum max(g, 0)``.

    Only user constraint groups are penalized; rolled-out trajectories have
    zero dynamics defects.

    Parameters
    ----------
    problem : ProblemDef
        The problem.
    trajectory : TrajectoryParticle
        A trajectory, typically from a dynamics rollout.
    penalty_equality : float
        ``lambda``.
    penalty_inequality : float
        ``mu``.

    Returns
    -------
    float
        The penalized cost.
    """
    vector = trajectory.to_vector()
    value = float(problem.cost(vector))
    for group in problem.equality:
        value += penalty_equality * float(np.sum(np.abs(group.function(vector))))
    for group in problem.inequality:
        value += penalty_inequality * float(np.sum(np.maximum(group.function(vector), 0.0)))
    return value


def _noise_sigma(problem: ProblemDef, cfg: MppiConfig) -> np.ndarray:
    prior = problem.control_prior
    sigma = prior.sigma if prior is not None else np.ones(problem.control_dim)
    return cfg.noise_scale * sigma


def mppi_step(
    nominal: np.ndarray,
    problem: ProblemDef,
    cfg: MppiConfig,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, TrajectoryParticle]:
    """
    One MPPI update of a nominal control sequence.

    Parameters
    ----------
    nominal : np.ndarray
        Nominal controls, shape ``(T, d_u)``.
    problem : ProblemDef
        Problem with dynamics; rollouts start at its initial state.
    cfg : MppiConfig
        Baseline settings.
    rng : np.random.Generator
        Random generator.

    Returns
    -------
    Tuple[np.ndarray, TrajectoryParticle]
        Softmin-weighted average of the sampled controls, and the lowest-cost
        rollout.

    Raises
    ------
    ProblemDefinitionError
        If the problem has no dynamics or the nominal has the wrong shape.
    """
    if problem.dynamics is None:
        raise ProblemDefinitionError("MPPI requires dynamics", problem=problem.name)
    nominal = np.asarray(nominal, dtype=float)
    if nominal.shape != (problem.horizon, problem.control_dim):
        raise ProblemDefinitionError(
            "Nominal controls do not match the problem",
            expected=(problem.horizon, problem.control_dim),
            actual=nominal.shape,
        )
    bounds = problem.effective_bounds
    sigma = _noise_sigma(problem, cfg)
    noise = rng.standard_normal((cfg.num_samples,) + nominal.shape) * sigma
    samples = np.clip(nominal + noise, bounds.control_min, bounds.control_max)

    rollouts = []
    costs = np.empty(cfg.num_samples)
    for k, controls in enumerate(samples):
        try:
            states = rollout_dynamics(problem.initial_state, controls, problem.dynamics)
            rollout = TrajectoryParticle(states, controls)
            costs[k] = penalty_cost(problem, rollout, cfg.penalty_equality, cfg.penalty_inequality)
        except CsvtoError:
            rollout = None
            costs[k] = np.inf
        rollouts.append(rollout)

    weights, fallback = softmin_weights(costs, cfg.temperature)
    if fallback:
        logger.warning("MPPI weights are degenerate; using uniform weights")
    updated = np.tensordot(weights, samples, axes=1)
    best = int(np.argmin(costs))
    best_rollout = rollouts[best]
    if best_rollout is None:
        states = rollout_dynamics(problem.initial_state, nominal, problem.dynamics)
        best_rollout = TrajectoryParticle(states, nominal)
    return updated, best_rollout


def mppi_mpc_run(
    env: Environment,
    problem: ProblemDef,
    cfg: MppiConfig,
    total_steps: int,
    progress: Optional[RunProgress] = None,
    record_timing: bool = True,
) -> MpcTrace:
    """
    Receding-horizon loop driven by MPPI.

    Shares the environment protocol and trace format of
    `csvto.solver.mpc.mpc_run`. The nominal sequence starts at the prior mean
    and is shifted after every executed control.

    Parameters
    ----------
    env : Environment
        System to control.
    problem : ProblemDef
        Planning problem.
    cfg : MppiConfig
        Baseline settings.
    total_steps : int
        Number of steps to execute.
    progress : Optional[RunProgress]
        Tracker updated at every step.
    record_timing : bool
        Record wall times; when False every ``wall_time_ms`` is 0.

    Returns
    -------
    MpcTrace
        The executed trace.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    trace = MpcTrace(initial_state=np.array(env.state, dtype=float), constraint_names=tuple(env.constraint_names))
    prior = problem.control_prior
    mean = prior.mean if prior is not None else np.zeros(problem.control_dim)
    nominal = np.tile(mean, (problem.horizon, 1))
    logger.info("MPPI run on '%s': %d steps, %d samples", problem.name, total_steps, cfg.num_samples)

    for t in range(1, total_steps + 1):
        with LogContextManager(step=t):
            if progress is not None:
                progress.start_step(t)
            started = time.perf_counter()
            iterations = cfg.warmstart_iterations if t == 1 else cfg.online_iterations
            try:
                planning = env.planning_problem(problem).with_initial_state(env.state)
                for _ in range(iterations):
                    nominal, _ = mppi_step(nominal, planning, cfg, rng)
                control = nominal[0].copy()
                try:
                    new_state = np.array(env.step(control), dtype=float)
                except EnvironmentStepError:
                    raise
                except Exception as e:
                    raise EnvironmentStepError("Environment step failed", step=t, original_error=e) from e
            except CsvtoError as e:
                logger.error("MPPI step failed: %s", e, exc_info=True)
                trace.status = STATUS_FAILED
                trace.error = str(e)
                if progress is not None:
                    progress.fail_step(t, str(e))
                break

            nominal = np.vstack([nominal[1:], nominal[-1:]])
            elapsed_ms = (time.perf_counter() - started) * 1000.0 if record_timing else 0.0
            trace.rows.append(
                TraceRow(
                    step=t,
                    state=new_state,
                    control=control,
                    violations=dict(env.constraint_violations(new_state)),
                    wall_time_ms=elapsed_ms,
                    collision=bool(env.in_collision(new_state)),
                )
            )
            if progress is not None:
                progress.complete_step(t)

    if progress is not None:
        progress.finish()
    logger.info("MPPI run finished with status '%s' after %d steps", trace.status, len(trace.rows))
    return trace
