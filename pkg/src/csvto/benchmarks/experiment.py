"""
csvto.benchmarks.experiment
===========================

Configured experiment runs with file outputs.

Every trial writes into ``<out>/<problem>/<solver>/seed_<k>/``: the resolved
``config.yaml``, ``metrics.json`` and either ``trace.csv`` (receding-horizon
trials) or ``particles.csv`` (single solves). The toy problem has no dynamics,
so its trials are single solves.

Classes
-------
ExperimentResult
    Outcome of a multi-seed experiment.

Functions
---------
build_problem
    Problem and environment for one trial.
initial_particles
    Initial particle set for one trial.
run_solve
    One warm-start solve with ``particles.csv`` output.
run_trial
    One receding-horizon trial with ``trace.csv`` output.
run_experiment
    All configured seeds, plus ``summary.json``.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from csvto.baselines.mppi import mppi_mpc_run
from csvto.benchmarks.metrics import RunMetrics, SolveMetrics, aggregate
from csvto.benchmarks.quadrotor import QuadrotorEnv, make_quadrotor
from csvto.benchmarks.toy2d import Toy2DProblem, make_toy2d
from csvto.configuration.loader import ConfigProvider
from csvto.core.errors import ConfigurationError
from csvto.core.particles import AugmentedParticle
from csvto.core.problem import ProblemDef
from csvto.core.transcription import eval_constraints, perturbed_initialization, sample_initial_particles
from csvto.datastore.io_handlers import Table, write_file
from csvto.logging.context import LogContextManager
from csvto.monitoring.progress import RunProgress
from csvto.solver.config import SolverConfig
from csvto.solver.csvto import SolveResult, solve
from csvto.solver.mpc import mpc_run

logger = logging.getLogger(__name__)

ProgressFactory = Callable[[str, int], Optional[RunProgress]]


@dataclass
class ExperimentResult:
    """
    Outcome of a multi-seed experiment.

    Attributes
    ----------
    summary : Dict[str, Any]
        Aggregate written to ``summary.json``.
    trials : List[Any]
        `RunMetrics` or `SolveMetrics` per seed, in seed order.
    failed : bool
        Whether any trial ended with a failure status.
    """

    summary: Dict[str, Any] = field(default_factory=dict)
    trials: List[Any] = field(default_factory=list)
    failed: bool = False


def trial_directory(out: Path, problem: str, solver: str, seed: int) -> Path:
    """``<out>/<problem>/<solver>/seed_<k>``."""
    return Path(out) / problem / solver / f"seed_{seed}"


def build_problem(provider: ConfigProvider, seed: int) -> Tuple[ProblemDef, Optional[QuadrotorEnv]]:
    """
    Problem and environment for one trial.

    Parameters
    ----------
    provider : ConfigProvider
        Loaded configuration.
    seed : int
        Trial seed (selects the quadrotor start state).

    Returns
    -------
    Tuple[ProblemDef, Optional[QuadrotorEnv]]
        The problem, and the environment (None for the toy problem).
    """
    name = provider.get("problem.name")
    if name == "toy2d":
        return make_toy2d(), None
    variant = name.split("-", 1)[1]
    return make_quadrotor(provider.quadrotor_params(), variant, seed)


def initial_particles(
    problem: ProblemDef,
    provider: ConfigProvider,
    cfg: SolverConfig,
    rng: np.random.Generator,
) -> List[AugmentedParticle]:
    """
    Initial particle set for one trial.

    ``experiment.init = prior`` samples every particle from the control prior
    (or around ``x_0`` for the toy problem); ``perturbed`` perturbs a single
    prior draw by ``experiment.init_sigma``.
    """
    if provider.get("experiment.init") == "perturbed":
        if problem.dynamics is None or problem.control_prior is None:
            raise ConfigurationError(
                "Perturbed initialization needs dynamics and a control prior",
                config_key="experiment.init",
            )
        nominal = problem.control_prior.sample(problem.horizon, rng)
        return perturbed_initialization(
            problem, nominal, cfg.num_particles, rng, sigma=provider.get("experiment.init_sigma")
        )
    scale = Toy2DProblem().initial_scale if problem.dynamics is None else 1.0
    return sample_initial_particles(problem, cfg.num_particles, rng, scale=scale)


def _particle_table(result: SolveResult, problem: ProblemDef) -> Table:
    layout = problem.layout
    header = ["particle", "penalty", "cost", "max_violation", "is_best"] + layout.column_names()
    rows = []
    for i, particle in enumerate(result.particles):
        bundle = eval_constraints(problem, particle)
        rows.append(
            [
                i,
                result.penalties[i],
                problem.cost(particle.particle.to_vector()),
                np.max(np.abs(bundle.values), initial=0.0),
                float(i == result.best_index),
            ]
            + list(particle.to_vector())
        )
    return Table.from_rows(header, rows)


def run_solve(provider: ConfigProvider, seed: int, out: Optional[Path] = None) -> Tuple[SolveResult, SolveMetrics]:
    """
    One warm-start solve from the trial's initial state.

    Uses ``experiment.iterations`` iterations when set, otherwise the
    warm-start count, with the configured annealing.

    Parameters
    ----------
    provider : ConfigProvider
        Loaded configuration.
    seed : int
        Trial seed.
    out : Optional[Path]
        Output root; nothing is written when None.

    Returns
    -------
    Tuple[SolveResult, SolveMetrics]
        The solve outcome and its metrics.
    """
    problem, _ = build_problem(provider, seed)
    cfg = provider.solver_config(seed)
    iterations = provider.get("experiment.iterations")
    iterations = cfg.warmstart_iterations if iterations is None else iterations
    rng = np.random.default_rng(cfg.rng_seed)
    with LogContextManager(run_id=f"{problem.name}/csvto/seed_{seed}", problem=problem.name, seed=seed):
        particles = initial_particles(problem, provider, cfg, rng)
        logger.info("Solving with %d particles for %d iterations", len(particles), iterations)
        result = solve(problem.initial_state, particles, iterations, cfg.anneal, problem, cfg)
        metrics = SolveMetrics.from_result(result, problem, seed, cfg.penalty_weight)
        logger.info(
            "Solve done: best particle %d, max |h| %.3e",
            result.best_index,
            metrics.max_equality_violation,
        )
    if out is not None:
        directory = trial_directory(out, problem.name, "csvto", seed)
        write_file(directory / "particles.csv", _particle_table(result, problem))
        write_file(directory / "metrics.json", {**metrics.to_dict(), "config": provider.to_dict()})
        provider.snapshot(directory / "config.yaml")
    return result, metrics


def run_trial(
    provider: ConfigProvider,
    seed: int,
    out: Optional[Path] = None,
    progress: Optional[RunProgress] = None,
) -> RunMetrics:
    """
    One receding-horizon trial.

    Parameters
    ----------
    provider : ConfigProvider
        Loaded configuration.
    seed : int
        Trial seed.
    out : Optional[Path]
        Output root; nothing is written when None.
    progress : Optional[RunProgress]
        Tracker of the MPC steps.

    Returns
    -------
    RunMetrics
        Trial metrics.

    Raises
    ------
    ConfigurationError
        For problems without an environment.
    """
    problem, env = build_problem(provider, seed)
    if env is None:
        raise ConfigurationError("Receding-horizon runs need a problem with dynamics", config_key="problem.name")
    solver = provider.get("experiment.solver")
    steps = provider.get("experiment.steps")
    record_timing = provider.get("experiment.record_timing")
    run_id = f"{problem.name}/{solver}/seed_{seed}"

    with LogContextManager(run_id=run_id, problem=problem.name, seed=seed):
        logger.info("Trial started")
        if solver == "mppi":
            trace = mppi_mpc_run(env, problem, provider.baseline_config(seed), steps, progress, record_timing)
        else:
            cfg = provider.solver_config(seed)
            rng = np.random.default_rng(cfg.rng_seed)
            particles = initial_particles(problem, provider, cfg, rng)
            trace = mpc_run(env, problem, cfg, steps, progress, record_timing, init_particles=particles)
        metrics = RunMetrics.from_trace(
            trace,
            env.model.goal[:2],
            problem.name,
            solver,
            seed,
            threshold=provider.get("problem.goal_threshold"),
        )
        logger.info(
            "Trial finished: success=%s distance=%.3f collision=%s",
            metrics.success,
            metrics.final_distance,
            metrics.collision,
        )

    if out is not None:
        directory = trial_directory(out, problem.name, solver, seed)
        write_file(directory / "trace.csv", Table.from_rows(trace.header(), trace.table()))
        write_file(directory / "metrics.json", {**metrics.to_dict(), "config": provider.to_dict()})
        provider.snapshot(directory / "config.yaml")
    return metrics


def _summarize_solves(trials: List[SolveMetrics]) -> Dict[str, Any]:
    return {
        "trials": [t.to_dict() for t in trials],
        "max_equality_violation": max(t.max_equality_violation for t in trials),
        "max_inequality_violation": max(t.max_inequality_violation for t in trials),
    }


def run_experiment(
    provider: ConfigProvider,
    out: Optional[Path] = None,
    progress_factory: Optional[ProgressFactory] = None,
) -> ExperimentResult:
    """
    Run every configured seed and write ``summary.json``.

    Trials run on a thread pool of ``experiment.max_workers``; each owns its
    problem, environment and random generator, and results are collected in
    seed order.

    Parameters
    ----------
    provider : ConfigProvider
        Loaded configuration.
    out : Optional[Path]
        Output root; nothing is written when None.
    progress_factory : Optional[Callable[[str, int], Optional[RunProgress]]]
        Builds a tracker from a run id and a step count.

    Returns
    -------
    ExperimentResult
        Summary, per-seed metrics and the failure flag.
    """
    seeds = list(provider.get("experiment.seeds"))
    problem_name = provider.get("problem.name")
    workers = max(1, int(provider.get("experiment.max_workers")))
    is_solve = problem_name == "toy2d"
    if is_solve and provider.get("experiment.solver") != "csvto":
        raise ConfigurationError("The toy problem only supports the csvto solver", config_key="experiment.solver")
    logger.info("Experiment on '%s' with %d seeds", problem_name, len(seeds))

    def task(seed: int) -> Any:
        if is_solve:
            return run_solve(provider, seed, out)[1]
        steps = provider.get("experiment.steps")
        run_id = f"{problem_name}/{provider.get('experiment.solver')}/seed_{seed}"
        progress = progress_factory(run_id, steps) if progress_factory is not None else None
        return run_trial(provider, seed, out, progress)

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(task, seed) for seed in seeds]
        trials = [future.result() for future in futures]

    if is_solve:
        summary = _summarize_solves(trials)
        failed = False
    else:
        summary = aggregate(trials)
        failed = any(t.status != "completed" for t in trials)
    summary["problem"] = problem_name
    summary["solver"] = "csvto" if is_solve else provider.get("experiment.solver")
    if out is not None:
        write_file(Path(out) / "summary.json", summary)
    return ExperimentResult(summary=summary, trials=trials, failed=failed)
