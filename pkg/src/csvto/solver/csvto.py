"""
csvto.solver.csvto
==================

Constrained Stein variational trajectory optimization.

Every iteration moves each augmented particle by
``alpha_J * phi_perp + alpha_C * phi_C``: a Stein direction built from the
tangent-space matrix kernel, and a Gauss-Newton step towards the constraint
manifold. The two directions are orthogonal, so the Stein part never undoes
feasibility progress. States and controls are then clamped to their bounds.

Classes
-------
IterationDiagnostics
    Aggregate statistics of one solver iteration.
SolveResult
    Outcome of a solve.
ResampleResult
    Outcome of a resampling pass.

Functions
---------
penalty
    Penalty ``C + lambda * sum |h_hat|`` of an augmented particle.
initialize_slack
    Set each particle's slack from its inequality values.
stein_direction
    Tangent-space Stein direction of every particle.
csvto_step
    One synchronous update of the whole particle set.
project_bounds
    Clamp states and controls to the problem bounds.
solve
    Run a fixed number of iterations and select the best particle.
shift
    Advance trajectories by one timestep for warm starting.
resample
    Softmin resampling with tangent-space noise.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from csvto.core.errors import NonFiniteError, ProblemDefinitionError
from csvto.core.particles import AugmentedParticle, DecisionLayout, TrajectoryParticle, stack_vectors
from csvto.core.problem import Bounds, ConstraintBundle, ProblemDef, posterior_gradient
from csvto.core.transcription import eval_constraints
from csvto.geometry.projection import (
    ProjectionData,
    feasibility_step,
    projection_divergence,
    projection_matrix,
)
from csvto.geometry.slack import init_slack
from csvto.kernels.rbf import KernelEval
from csvto.kernels.tangent import tangent_kernel_gradient
from csvto.kernels.trajectory import TrajectoryKernel
from csvto.solver.config import SolverConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IterationDiagnostics:
    """
    Aggregate statistics of one solver iteration.

    Values are measured at the start of the iteration, before the update.

    Attributes
    ----------
    iteration : int
        Iteration number (1-indexed).
    gamma : float
        Annealing weight of the posterior term.
    max_violation : float
        Largest ``|h_hat|`` over all particles.
    mean_cost : float
        Mean cost over particles.
    tangent_norm : float
        Largest ``||phi_perp||`` over particles.
    constraint_norm : float
        Largest ``||phi_C||`` over particles.
    step_norm : float
        Largest ``||alpha_J phi_perp + alpha_C phi_C||`` over particles.
    reset_particles : Tuple[int, ...]
        Particles whose update was non-finite and were kept unchanged.
    """

    iteration: int
    gamma: float
    max_violation: float
    mean_cost: float
    tangent_norm: float
    constraint_norm: float
    step_norm: float
    reset_particles: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SolveResult:
    """
    Outcome of a solve.

    Attributes
    ----------
    best : AugmentedParticle
        Particle with the lowest penalty (ties go to the lowest index).
    best_index : int
        Index of `best` within `particles`.
    particles : Tuple[AugmentedParticle, ...]
        The full final particle set.
    penalties : np.ndarray
        Final penalty of every particle (inf where non-finite).
    diagnostics : Tuple[IterationDiagnostics, ...]
        One entry per iteration run.
    excluded : Tuple[int, ...]
        Particles excluded from best selection because of a non-finite penalty.
    """

    best: AugmentedParticle
    best_index: int
    particles: Tuple[AugmentedParticle, ...]
    penalties: np.ndarray
    diagnostics: Tuple[IterationDiagnostics, ...] = ()
    excluded: Tuple[int, ...] = ()

    @property
    def best_trajectory(self) -> TrajectoryParticle:
        """Trajectory of the best particle, slack discarded."""
        return self.best.particle

    @property
    def iterations(self) -> int:
        """Number of iterations actually run."""
        return len(self.diagnostics)


@dataclass(frozen=True)
class ResampleResult:
    """
    Outcome of a resampling pass.

    Attributes
    ----------
    particles : List[AugmentedParticle]
        The new particle set.
    weights : np.ndarray
        Softmin weights of the old particles.
    indices : np.ndarray
        Index of the parent of every new particle.
    uniform_fallback : bool
        True when the weights were non-finite and uniform weights were used.
    """

    particles: List[AugmentedParticle]
    weights: np.ndarray
    indices: np.ndarray
    uniform_fallback: bool = False


@dataclass
class _Geometry:
    bundle: ConstraintBundle
    projection: ProjectionData
    divergence: np.ndarray
    log_grad: np.ndarray
    cost: float


@dataclass
class _StepOutcome:
    vectors: np.ndarray
    diagnostics: IterationDiagnostics
    step_norms: np.ndarray = field(default_factory=lambda: np.zeros(0))


def penalty(
    problem: ProblemDef,
    particle: AugmentedParticle,
    weight: float,
    bundle: Optional[ConstraintBundle] = None,
) -> float:
    """
    Penalty ``C(tau) + weight * sum |h_hat(tau_hat)|`` of an augmented particle.

    Parameters
    ----------
    problem : ProblemDef
        The problem.
    particle : AugmentedParticle
        The particle.
    weight : float
        Penalty weight ``lambda``.
    bundle : Optional[ConstraintBundle]
        Precomputed constraint bundle of the particle.

    Returns
    -------
    float
        The penalty; inf when it is not finite.
    """
    if bundle is None:
        bundle = eval_constraints(problem, particle)
    value = float(problem.cost(particle.particle.to_vector())) + weight * float(np.sum(np.abs(bundle.values)))
    return value if np.isfinite(value) else float("inf")


def initialize_slack(problem: ProblemDef, particles: Sequence[AugmentedParticle]) -> List[AugmentedParticle]:
    """
    Set each particle's slack to ``sqrt(2 |g(tau)|)``.

    Parameters
    ----------
    problem : ProblemDef
        The problem.
    particles : Sequence[AugmentedParticle]
        Particles whose slack (of any length) is replaced.

    Returns
    -------
    List[AugmentedParticle]
        Particles with slack matching the problem's inequality rows.
    """
    result = []
    for particle in particles:
        trajectory = particle.particle.to_vector()
        g_values = [np.asarray(group.function(trajectory), dtype=float).ravel() for group in problem.inequality]
        slack = init_slack(np.concatenate(g_values)) if g_values else np.zeros(0)
        result.append(AugmentedParticle(particle.particle, slack))
    return result


def _geometry(problem: ProblemDef, particle: AugmentedParticle, cfg: SolverConfig) -> _Geometry:
    bundle = eval_constraints(problem, particle, fd_hessian_fallback=cfg.fd_hessian_fallback)
    projection = projection_matrix(bundle.jacobian, cfg.svd_cutoff)
    divergence = projection_divergence(projection, bundle.hessians or None)
    trajectory = particle.particle.to_vector()
    log_grad = np.zeros(problem.layout.size)
    log_grad[: trajectory.size] = posterior_gradient(problem, trajectory)
    return _Geometry(bundle, projection, divergence, log_grad, float(problem.cost(trajectory)))


def _directions(
    vectors: np.ndarray,
    geometries: Sequence[_Geometry],
    layout: DecisionLayout,
    gamma: float,
    kernel: TrajectoryKernel,
) -> np.ndarray:
    count = vectors.shape[0]
    k_matrix, k_grad = kernel(vectors[:, :layout.trajectory_size])
    projected_grads = [g.projection.projection @ g.log_grad for g in geometries]
    directions = np.zeros_like(vectors)
    for i in range(count):
        p_i = geometries[i].projection.projection
        drive = np.zeros(layout.size)
        repulsion = np.zeros(layout.size)
        for j, geometry in enumerate(geometries):
            drive += k_matrix[i, j] * projected_grads[j]
            scalar = KernelEval(value=float(k_matrix[i, j]), grad_wrt_second_arg=k_grad[i, j])
            repulsion += tangent_kernel_gradient(scalar, p_i, geometry.projection.projection, geometry.divergence)
        directions[i] = (gamma * (p_i @ drive) + repulsion) / count
    for i in range(count):
        if not np.all(np.isfinite(directions[i])):
            raise NonFiniteError("Stein direction is not finite", location="stein_direction", index=i)
    return directions


def stein_direction(
    particles: Sequence[AugmentedParticle],
    problem: ProblemDef,
    gamma_anneal: float,
    cfg: Optional[SolverConfig] = None,
) -> List[np.ndarray]:
    """
    Tangent-space Stein direction of every particle.

    ``phi_i = P_i 1/N sum_j [P_j (gamma K_ij [grad log p(tau_j); 0] + grad_j K_ij) + K_ij div P_j]``

    The bracket is ``gamma K_perp(i, j) grad_j + div_j K_perp(i, j)`` with the
    common left factor ``P_i`` pulled out of the sum.

    Parameters
    ----------
    particles : Sequence[AugmentedParticle]
        Non-empty particle set.
    problem : ProblemDef
        The problem.
    gamma_anneal : float
        Weight of the posterior term, in ``[0, 1]``.
    cfg : Optional[SolverConfig]
        Supplies the kernel window, SVD cutoff and Hessian fallback.

    Returns
    -------
    List[np.ndarray]
        One direction of length ``layout.size`` per particle.

    Raises
    ------
    NonFiniteError
        If a direction is not finite (``index`` is the particle).
    """
    if not particles:
        raise ProblemDefinitionError("At least one particle is required")
    cfg = cfg or SolverConfig()
    geometries = [_geometry(problem, p, cfg) for p in particles]
    kernel = TrajectoryKernel(problem.layout, cfg.window)
    directions = _directions(stack_vectors(particles), geometries, problem.layout, gamma_anneal, kernel)
    return list(directions)


def _bounds_arrays(problem: ProblemDef) -> Tuple[np.ndarray, np.ndarray]:
    layout = problem.layout
    bounds = problem.effective_bounds
    return bounds.lower(layout), bounds.upper(layout)


def _step(
    problem: ProblemDef,
    vectors: np.ndarray,
    cfg: SolverConfig,
    gamma: float,
    kernel: TrajectoryKernel,
    iteration: int,
) -> _StepOutcome:
    layout = problem.layout
    particles = [AugmentedParticle.from_vector(v, layout) for v in vectors]
    geometries = [_geometry(problem, p, cfg) for p in particles]
    directions = _directions(vectors, geometries, layout, gamma, kernel)
    lower, upper = _bounds_arrays(problem)
    n = layout.trajectory_size

    updated = vectors.copy()
    tangent_norms, constraint_norms, step_norms = [], [], []
    reset: List[int] = []
    for i, geometry in enumerate(geometries):
        correction = feasibility_step(
            geometry.bundle.jacobian,
            geometry.bundle.values,
            gram=geometry.projection.gram_pinv,
        )
        update = cfg.step_size_tangent * directions[i] + cfg.step_size_constraint * correction
        candidate = vectors[i] + update
        candidate[:n] = np.clip(candidate[:n], lower, upper)
        if not np.all(np.isfinite(candidate)):
            logger.warning("Particle %d produced a non-finite update; keeping previous state", i)
            reset.append(i)
        else:
            updated[i] = candidate
        tangent_norms.append(np.linalg.norm(directions[i]))
        constraint_norms.append(np.linalg.norm(correction))
        step_norms.append(np.linalg.norm(update))

    violations = [np.max(np.abs(g.bundle.values), initial=0.0) for g in geometries]
    diagnostics = IterationDiagnostics(
        iteration=iteration,
        gamma=gamma,
        max_violation=float(np.max(violations)),
        mean_cost=float(np.mean([g.cost for g in geometries])),
        tangent_norm=float(np.max(tangent_norms)),
        constraint_norm=float(np.max(constraint_norms)),
        step_norm=float(np.max(step_norms)),
        reset_particles=tuple(reset),
    )
    logger.debug(
        "Iteration %d: gamma=%.3f max|h|=%.3e cost=%.4g |phi|=%.3e |phi_C|=%.3e",
        iteration,
        gamma,
        diagnostics.max_violation,
        diagnostics.mean_cost,
        diagnostics.tangent_norm,
        diagnostics.constraint_norm,
    )
    return _StepOutcome(updated, diagnostics, np.asarray(step_norms))


def csvto_step(
    particles: Sequence[AugmentedParticle],
    problem: ProblemDef,
    cfg: SolverConfig,
    gamma_anneal: float = 1.0,
) -> List[AugmentedParticle]:
    """
    One synchronous update of the whole particle set.

    All directions are computed from the particle set at the start of the
    step, then ``tau + alpha_J phi_perp + alpha_C phi_C`` is applied and the
    trajectory part is clamped to the bounds (slack is never clamped).

    Parameters
    ----------
    particles : Sequence[AugmentedParticle]
        Current particles, slack included.
    problem : ProblemDef
        The problem.
    cfg : SolverConfig
        Solver settings.
    gamma_anneal : float
        Weight of the posterior term.

    Returns
    -------
    List[AugmentedParticle]
        Updated particles.
    """
    layout = problem.layout
    kernel = TrajectoryKernel(layout, cfg.window)
    outcome = _step(problem, stack_vectors(particles), cfg, gamma_anneal, kernel, iteration=1)
    return [AugmentedParticle.from_vector(v, layout) for v in outcome.vectors]


def project_bounds(particle: AugmentedParticle, bounds: Bounds) -> AugmentedParticle:
    """
    Clamp states and controls to the bounds; slack is left untouched.

    Parameters
    ----------
    particle : AugmentedParticle
        The particle.
    bounds : Bounds
        Box bounds.

    Returns
    -------
    AugmentedParticle
        The clamped particle.
    """
    trajectory = particle.particle
    states = np.clip(trajectory.states, bounds.state_min, bounds.state_max)
    controls = np.clip(trajectory.controls, bounds.control_min, bounds.control_max)
    return AugmentedParticle(TrajectoryParticle(states, controls), particle.slack)


def _select_best(
    problem: ProblemDef,
    particles: Sequence[AugmentedParticle],
    weight: float,
) -> Tuple[int, np.ndarray, Tuple[int, ...]]:
    penalties = np.array([penalty(problem, p, weight) for p in particles])
    excluded = tuple(int(i) for i in np.flatnonzero(~np.isfinite(penalties)))
    if excluded:
        logger.warning("Particles %s have non-finite penalties and are excluded", list(excluded))
    best_index = int(np.argmin(penalties))
    return best_index, penalties, excluded


def solve(
    x0: np.ndarray,
    init_particles: Sequence[AugmentedParticle],
    iterations: int,
    anneal: bool,
    problem: ProblemDef,
    cfg: SolverConfig,
) -> SolveResult:
    """
    Run a fixed number of iterations and select the best particle.

    Slack is (re)initialized from the inequality values first. With annealing
    the posterior weight of iteration ``k`` is ``k / K``, otherwise 1. The
    run stops early when ``cfg.tol > 0`` and every particle's combined step
    norm falls below it.

    Parameters
    ----------
    x0 : np.ndarray
        Current state, used as ``x_0`` of the defects.
    init_particles : Sequence[AugmentedParticle]
        Initial particles (slack is replaced).
    iterations : int
        Number of iterations ``K`` (0 only selects the best initial particle).
    anneal : bool
        Use the linear annealing schedule.
    problem : ProblemDef
        The problem.
    cfg : SolverConfig
        Solver settings.

    Returns
    -------
    SolveResult
        Best particle, final set, penalties and per-iteration diagnostics.
    """
    if not init_particles:
        raise ProblemDefinitionError("At least one particle is required")
    if iterations < 0:
        raise ProblemDefinitionError("Iteration count must be non-negative", iterations=iterations)
    problem = problem.with_initial_state(x0)
    layout = problem.layout
    particles = initialize_slack(problem, init_particles)
    vectors = stack_vectors(particles)
    kernel = TrajectoryKernel(layout, cfg.window)

    diagnostics: List[IterationDiagnostics] = []
    for k in range(1, iterations + 1):
        gamma = k / iterations if anneal else 1.0
        outcome = _step(problem, vectors, cfg, gamma, kernel, iteration=k)
        vectors = outcome.vectors
        diagnostics.append(outcome.diagnostics)
        if cfg.tol > 0 and np.all(outcome.step_norms < cfg.tol):
            logger.debug("Converged after %d iterations", k)
            break

    final = [AugmentedParticle.from_vector(v, layout) for v in vectors]
    best_index, penalties, excluded = _select_best(problem, final, cfg.penalty_weight)
    logger.debug("Solve finished: best particle %d, penalty %.6g", best_index, penalties[best_index])
    return SolveResult(
        best=final[best_index],
        best_index=best_index,
        particles=tuple(final),
        penalties=penalties,
        diagnostics=tuple(diagnostics),
        excluded=excluded,
    )


def shift(particles: Sequence[AugmentedParticle]) -> List[AugmentedParticle]:
    """
    Advance trajectories by one timestep, duplicating the last state and control.

    ``X = [x_1..x_T] -> [x_2..x_T, x_T]`` and likewise for controls. Slack is
    kept as is; the next `solve` re-initializes it.

    Parameters
    ----------
    particles : Sequence[AugmentedParticle]
        Particles with horizon ``T >= 2``.

    Returns
    -------
    List[AugmentedParticle]
        Shifted particles.

    Raises
    ------
    ProblemDefinitionError
        If the horizon is shorter than 2.
    """
    shifted = []
    for particle in particles:
        trajectory = particle.particle
        if trajectory.horizon < 2:
            raise ProblemDefinitionError("Shift requires a horizon of at least 2", horizon=trajectory.horizon)
        states = np.vstack([trajectory.states[1:], trajectory.states[-1:]])
        controls = np.vstack([trajectory.controls[1:], trajectory.controls[-1:]])
        shifted.append(AugmentedParticle(TrajectoryParticle(states, controls), particle.slack))
    return shifted


def softmin_weights(penalties: np.ndarray, temperature: float) -> Tuple[np.ndarray, bool]:
    """
    Normalized weights ``exp(-penalty / temperature)``.

    Parameters
    ----------
    penalties : np.ndarray
        Penalties; non-finite entries get zero weight.
    temperature : float
        Positive temperature.

    Returns
    -------
    Tuple[np.ndarray, bool]
        Weights summing to one, and whether the uniform fallback was used.
    """
    penalties = np.asarray(penalties, dtype=float)
    log_weights = np.where(np.isfinite(penalties), -penalties / temperature, -np.inf)
    if not np.any(np.isfinite(log_weights)):
        return np.full(penalties.size, 1.0 / penalties.size), True
    weights = np.exp(log_weights - logsumexp(log_weights))
    total = weights.sum()
    if not np.isfinite(total) or total <= 0:
        return np.full(penalties.size, 1.0 / penalties.size), True
    return weights / total, False


def _systematic_indices(weights: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    count = weights.size
    positions = (rng.random() + np.arange(count)) / count
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    return np.searchsorted(cumulative, positions, side="right")


def resample(
    particles: Sequence[AugmentedParticle],
    problem: ProblemDef,
    temperature: float,
    sigma: float,
    rng: np.random.Generator,
    penalty_weight: float = 1000.0,
    svd_cutoff: float = 1e-6,
) -> ResampleResult:
    """
    Softmin resampling with tangent-space noise.

    Parents are drawn systematically with replacement from the softmin
    weights of the penalties; each child is ``tau_parent + P(tau_parent) eps``
    with ``eps ~ N(0, sigma^2 I)`` on the augmented vector.

    Parameters
    ----------
    particles : Sequence[AugmentedParticle]
        Current particles, slack included.
    problem : ProblemDef
        The problem.
    temperature : float
        ``beta > 0``.
    sigma : float
        Noise standard deviation (0 gives exact copies).
    rng : np.random.Generator
        Random generator.
    penalty_weight : float
        ``lambda`` of the penalty.
    svd_cutoff : float
        Singular-value threshold of the projector.

    Returns
    -------
    ResampleResult
        New particles, weights, parent indices and the fallback flag.
    """
    if temperature <= 0:
        raise ProblemDefinitionError("Resampling temperature must be positive", temperature=temperature)
    layout = problem.layout
    bundles = [eval_constraints(problem, p) for p in particles]
    penalties = np.array([penalty(problem, p, penalty_weight, b) for p, b in zip(particles, bundles)])
    weights, fallback = softmin_weights(penalties, temperature)
    if fallback:
        logger.warning("Resampling weights are degenerate; using uniform weights")
    indices = _systematic_indices(weights, rng)

    projections = {}
    children = []
    for parent in indices:
        if parent not in projections:
            projections[parent] = projection_matrix(bundles[parent].jacobian, svd_cutoff).projection
        noise = sigma * rng.standard_normal(layout.size)
        vector = particles[parent].to_vector() + projections[parent] @ noise
        children.append(AugmentedParticle.from_vector(vector, layout))
    return ResampleResult(particles=children, weights=weights, indices=indices, uniform_fallback=fallback)
