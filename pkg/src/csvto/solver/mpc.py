"""
csvto.solver.mpc
================

Receding-horizon control with online re-planning.

At every step the particle set is optimized from the current state, the
first control of the best particle is executed, and the particles are shifted
one timestep forward to warm-start the next solve. The first solve uses the
warm-start iteration count with annealing; later solves use the online count.
Every `resample_steps` steps the shifted set is resampled.

Classes
-------
Environment
    Protocol of a steppable system.
TraceRow
    One executed MPC step.
MpcTrace
    Execution trace of a receding-horizon run.

Functions
---------
mpc_run
    Run the receding-horizon loop on an environment.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from csvto.core.errors import CsvtoError, DivergenceError, EnvironmentStepError
from csvto.core.particles import AugmentedParticle
from csvto.core.problem import ProblemDef
from csvto.core.transcription import sample_initial_particles
from csvto.logging.context import LogContextManager
from csvto.monitoring.progress import RunProgress
from csvto.solver.config import SolverConfig
from csvto.solver.csvto import SolveResult, initialize_slack, resample, shift, solve

logger = logging.getLogger(__name__)

STATUS_COMPLETED = "completed"
STATUS_FAILED = "failed"


class Environment(Protocol):
    """
    Protocol of a steppable system driven by a receding-horizon planner.

    Attributes
    ----------
    state : np.ndarray
        Current state.
    constraint_names : Tuple[str, ...]
        Names of the constraints reported by `constraint_violations`, in
        trace column order.
    """

    @property
    def state(self) -> np.ndarray: ...

    @property
    def constraint_names(self) -> Tuple[str, ...]: ...

    def step(self, control: np.ndarray) -> np.ndarray:
        """Apply one control and return the new state."""

    def planning_problem(self, problem: ProblemDef) -> ProblemDef:
        """Problem the planner sees at the current time (e.g. obstacles frozen)."""

    def constraint_violations(self, state: np.ndarray) -> Dict[str, float]:
        """True constraint violation of an executed state, per constraint name."""

    def in_collision(self, state: np.ndarray) -> bool:
        """Whether an executed state intersects an obstacle."""


@dataclass(frozen=True)
class TraceRow:
    """
    One executed MPC step.

    Attributes
    ----------
    step : int
        MPC step (1-indexed).
    state : np.ndarray
        State reached after executing `control`.
    control : np.ndarray
        Executed control.
    violations : Dict[str, float]
        Violation of every named constraint at `state`.
    wall_time_ms : float
        Planning plus execution time of the step (0 when timing is off).
    collision : bool
        Whether `state` intersects an obstacle.
    """

    step: int
    state: np.ndarray
    control: np.ndarray
    violations: Dict[str, float]
    wall_time_ms: float = 0.0
    collision: bool = False


@dataclass
class MpcTrace:
    """
    Execution trace of a receding-horizon run.

    Attributes
    ----------
    initial_state : np.ndarray
        State before the first step.
    constraint_names : Tuple[str, ...]
        Violation columns, in order.
    rows : List[TraceRow]
        Executed steps.
    status : str
        ``"completed"`` or ``"failed"``.
    error : Optional[str]
        Failure message when the run failed.
    resampling_fallbacks : int
        Number of resampling passes that used uniform weights.
    reset_particles : int
        Number of particle resets after non-finite updates.
    """

    initial_state: np.ndarray
    constraint_names: Tuple[str, ...] = ()
    rows: List[TraceRow] = field(default_factory=list)
    status: str = STATUS_COMPLETED
    error: Optional[str] = None
    resampling_fallbacks: int = 0
    reset_particles: int = 0

    @property
    def succeeded(self) -> bool:
        """Whether every requested step was executed."""
        return self.status == STATUS_COMPLETED

    @property
    def states(self) -> np.ndarray:
        """Executed states, shape ``(len(rows), d_x)``."""
        if not self.rows:
            return np.zeros((0, self.initial_state.size))
        return np.vstack([row.state for row in self.rows])

    @property
    def controls(self) -> np.ndarray:
        """Executed controls, shape ``(len(rows), d_u)``."""
        if not self.rows:
            return np.zeros((0, 0))
        return np.vstack([row.control for row in self.rows])

    @property
    def collision(self) -> bool:
        """Whether any executed state intersected an obstacle."""
        return any(row.collision for row in self.rows)

    @property
    def final_state(self) -> np.ndarray:
        """Last executed state, or the initial state when nothing ran."""
        return self.rows[-1].state if self.rows else self.initial_state

    def violations(self, name: str) -> np.ndarray:
        """Per-step violations of one named constraint."""
        return np.array([row.violations[name] for row in self.rows], dtype=float)

    def header(self) -> List[str]:
        """
        Column names of the tabular trace.

        ``step``, states ``x_0..``, controls ``u_0..``, one column per named
        constraint violation, then ``wall_time_ms``.
        """
        state_dim = self.initial_state.size
        control_dim = self.controls.shape[1] if self.rows else 0
        return (
            ["step"]
            + [f"x_{i}" for i in range(state_dim)]
            + [f"u_{i}" for i in range(control_dim)]
            + list(self.constraint_names)
            + ["wall_time_ms"]
        )

    def table(self) -> List[List[float]]:
        """Trace rows as lists matching `header`."""
        return [
            [row.step]
            + list(row.state)
            + list(row.control)
            + [row.violations[name] for name in self.constraint_names]
            + [row.wall_time_ms]
            for row in self.rows
        ]


def _iteration_plan(step: int, cfg: SolverConfig) -> Tuple[int, bool]:
    if step == 1:
        return cfg.warmstart_iterations, cfg.anneal
    return cfg.online_iterations, False


def _check_plan(result: SolveResult, problem: ProblemDef, cfg: SolverConfig, step: int) -> np.ndarray:
    """First control of the best plan, refusing plans that have blown up."""
    best_penalty = float(result.penalties[result.best_index])
    if not np.isfinite(best_penalty) or best_penalty > cfg.max_penalty:
        raise DivergenceError(
            "Best plan penalty exploded", step=step, penalty=best_penalty, max_penalty=cfg.max_penalty
        )
    controls = result.best_trajectory.controls
    bounds = problem.effective_bounds
    tolerance = 1e-9 * (1.0 + np.abs(controls))
    inside = (controls >= bounds.control_min - tolerance) & (controls <= bounds.control_max + tolerance)
    if not np.all(np.isfinite(controls)) or not np.all(inside):
        raise DivergenceError("Best plan controls left their bounds", step=step)
    return np.array(controls[0])


def mpc_run(
    env: Environment,
    problem: ProblemDef,
    cfg: SolverConfig,
    total_steps: int,
    progress: Optional[RunProgress] = None,
    record_timing: bool = True,
    init_particles: Optional[Sequence[AugmentedParticle]] = None,
) -> MpcTrace:
    """
    Run the receding-horizon loop on an environment.

    Parameters
    ----------
    env : Environment
        System to control; its dynamics should match the problem's.
    problem : ProblemDef
        Planning problem. `env.planning_problem` may specialize it per step.
    cfg : SolverConfig
        Solver settings; `rng_seed` seeds initialization and resampling.
    total_steps : int
        Number of steps to execute.
    progress : Optional[RunProgress]
        Tracker updated at every step.
    record_timing : bool
        Record wall times; when False every ``wall_time_ms`` is 0.
    init_particles : Optional[Sequence[AugmentedParticle]]
        Initial particles; sampled from the control prior when omitted.

    Returns
    -------
    MpcTrace
        The executed trace. A solver or environment failure ends the trace
        with status ``"failed"`` instead of raising, and so does a best plan
        whose penalty exceeds ``cfg.max_penalty`` or whose controls are
        non-finite or outside the bounds.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    x0 = np.array(env.state, dtype=float)
    trace = MpcTrace(initial_state=x0, constraint_names=tuple(env.constraint_names))
    if init_particles is None:
        particles: List[AugmentedParticle] = sample_initial_particles(
            problem.with_initial_state(x0), cfg.num_particles, rng
        )
    else:
        particles = list(init_particles)
    logger.info("MPC run on '%s': %d steps, %d particles", problem.name, total_steps, len(particles))

    for t in range(1, total_steps + 1):
        with LogContextManager(step=t):
            if progress is not None:
                progress.start_step(t)
            started = time.perf_counter()
            state = np.array(env.state, dtype=float)
            iterations, anneal = _iteration_plan(t, cfg)
            try:
                planning = env.planning_problem(problem)
                result = solve(state, particles, iterations, anneal, planning, cfg)
                control = _check_plan(result, planning, cfg, t)
                try:
                    new_state = np.array(env.step(control), dtype=float)
                except EnvironmentStepError:
                    raise
                except Exception as e:
                    raise EnvironmentStepError("Environment step failed", step=t, original_error=e) from e
            except CsvtoError as e:
                logger.error("MPC step failed: %s", e, exc_info=True)
                trace.status = STATUS_FAILED
                trace.error = str(e)
                if progress is not None:
                    progress.fail_step(t, str(e))
                break

            trace.reset_particles += sum(len(d.reset_particles) for d in result.diagnostics)
            particles = shift(result.particles) if problem.horizon >= 2 else list(result.particles)
            if t % cfg.resample_steps == 0:
                following = planning.with_initial_state(new_state)
                outcome = resample(
                    initialize_slack(following, particles),
                    following,
                    cfg.resample_temperature,
                    cfg.resample_sigma,
                    rng,
                    penalty_weight=cfg.penalty_weight,
                    svd_cutoff=cfg.svd_cutoff,
                )
                particles = outcome.particles
                trace.resampling_fallbacks += int(outcome.uniform_fallback)

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
            logger.debug(
                "Executed control %s, best penalty %.6g",
                np.array2string(control, precision=3),
                result.penalties[result.best_index],
            )
            if progress is not None:
                progress.complete_step(t)

    if progress is not None:
        progress.finish()
    logger.info("MPC run finished with status '%s' after %d steps", trace.status, len(trace.rows))
    return trace
