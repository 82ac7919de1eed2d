"""
csvto.core.transcription
========================

Dynamics as constraints under direct transcription.

Functions
---------
rollout_dynamics
    Roll a control sequence out through the dynamics.
assemble_defects
    Stack the dynamics defects ``f(x_{t-1}, u_{t-1}) - x_t``.
defect_jacobian
    Jacobian of the stacked defects w.r.t. the trajectory vector.
eval_constraints
    Evaluate the augmented equality system of a particle.
sample_initial_particles
    Draw dynamically consistent particles from the control prior.
perturbed_initialization
    Draw particles as small perturbations of one nominal control sequence.
"""

import logging
from typing import List, Optional, Tuple

import numpy as np

from csvto.core.derivatives import finite_diff_hessian
from csvto.core.errors import (
    ConstraintEvaluationError,
    NonFiniteError,
    ProblemDefinitionError,
)
from csvto.core.particles import AugmentedParticle, TrajectoryParticle
from csvto.core.problem import ConstraintBundle, ConstraintGroup, Dynamics, ProblemDef

logger = logging.getLogger(__name__)


def rollout_dynamics(x0: np.ndarray, controls: np.ndarray, dynamics: Dynamics) -> np.ndarray:
    """
    Roll a control sequence out through the dynamics.

    Parameters
    ----------
    x0 : np.ndarray
        Initial state, shape ``(d_x,)``.
    controls : np.ndarray
        Controls ``u_0..u_{T-1}``, shape ``(T, d_u)``.
    dynamics : Callable[[np.ndarray, np.ndarray], np.ndarray]
        ``f(x, u) -> x'``.

    Returns
    -------
    np.ndarray
        States ``x_1..x_T``, shape ``(T, d_x)`` with ``x_t = f(x_{t-1}, u_{t-1})``.

    Raises
    ------
    NonFiniteError
        If ``x0`` or a produced state is not finite (``index`` is the
        timestep, 0 for ``x0``).
    """
    x = np.asarray(x0, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("Initial state is not finite", location="rollout", index=0)
    controls = np.asarray(controls, dtype=float)
    states = np.empty((controls.shape[0], x.size))
    for t, u in enumerate(controls, start=1):
        x = np.asarray(dynamics(x, u), dtype=float).ravel()
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("Dynamics produced a non-finite state", location="rollout", index=t)
        states[t - 1] = x
    return states


def assemble_defects(particle: TrajectoryParticle, x0: np.ndarray, dynamics: Dynamics) -> np.ndarray:
    """
    Stack the dynamics defects ``f(x_{t-1}, u_{t-1}) - x_t`` for ``t = 1..T``.

    Parameters
    ----------
    particle : TrajectoryParticle
        The trajectory.
    x0 : np.ndarray
        Initial state used as ``x_0``.
    dynamics : Callable[[np.ndarray, np.ndarray], np.ndarray]
        ``f(x, u) -> x'``.

    Returns
    -------
    np.ndarray
        Defect vector of length ``T * d_x``; zero iff the trajectory is
        dynamically feasible.

    Raises
    ------
    ProblemDefinitionError
        If ``x0`` or the dynamics output disagree with the state dimension.
    """
    x_prev = np.asarray(x0, dtype=float).ravel()
    if x_prev.size != particle.state_dim:
        raise ProblemDefinitionError(
            "Initial state does not match particle state dimension",
            expected=(particle.state_dim,),
            actual=x_prev.shape,
        )
    defects = np.empty((particle.horizon, particle.state_dim))
    for t in range(particle.horizon):
        predicted = np.asarray(dynamics(x_prev, particle.controls[t]), dtype=float).ravel()
        if predicted.size != particle.state_dim:
            raise ProblemDefinitionError(
                "Dynamics output does not match state dimension",
                expected=(particle.state_dim,),
                actual=predicted.shape,
            )
        defects[t] = predicted - particle.states[t]
        x_prev = particle.states[t]
    return defects.ravel()


def _transitions(problem: ProblemDef, particle: TrajectoryParticle) -> List[Tuple[np.ndarray, np.ndarray]]:
    previous = np.vstack([problem.initial_state[None, :], particle.states[:-1]])
    return list(zip(previous, particle.controls))


def defect_jacobian(problem: ProblemDef, particle: TrajectoryParticle) -> np.ndarray:
    """
    Jacobian of the stacked defects w.r.t. the trajectory vector.

    Parameters
    ----------
    problem : ProblemDef
        Problem with dynamics and a dynamics Jacobian provider.
    particle : TrajectoryParticle
        The trajectory.

    Returns
    -------
    np.ndarray
        Jacobian of shape ``(T * d_x, T * (d_x + d_u))``.
    """
    layout = particle.layout
    dx, du = layout.state_dim, layout.control_dim
    jac = np.zeros((problem.num_defects, layout.trajectory_size))
    assert problem.dynamics_jacobian is not None
    for t, (x_prev, u) in enumerate(_transitions(problem, particle)):
        a_mat, b_mat = problem.dynamics_jacobian(x_prev, u)
        rows = slice(t * dx, (t + 1) * dx)
        jac[rows, t * dx : (t + 1) * dx] = -np.eye(dx)
        if t > 0:
            jac[rows, (t - 1) * dx : t * dx] = a_mat
        start = layout.control_index(t, 0)
        jac[rows, start : start + du] = b_mat
    return jac


def _defect_hessians(problem: ProblemDef, particle: TrajectoryParticle, size: int) -> List[Optional[np.ndarray]]:
    layout = particle.layout
    dx, du = layout.state_dim, layout.control_dim
    if problem.dynamics_hessian is None:
        return [None] * problem.num_defects
    hessians: List[Optional[np.ndarray]] = []
    for t, (x_prev, u) in enumerate(_transitions(problem, particle)):
        local = np.asarray(problem.dynamics_hessian(x_prev, u), dtype=float)
        # x_0 is fixed, so the first transition only depends on u_0
        indices = list(range(layout.control_index(t, 0), layout.control_index(t, 0) + du))
        local_idx = list(range(dx, dx + du))
        if t > 0:
            indices = list(range((t - 1) * dx, t * dx)) + indices
            local_idx = list(range(dx)) + local_idx
        grid = np.ix_(indices, indices)
        for i in range(dx):
            full = np.zeros((size, size))
            full[grid] = local[i][np.ix_(local_idx, local_idx)]
            hessians.append(full)
    return hessians


def _evaluate_group(
    group: ConstraintGroup,
    trajectory: np.ndarray,
    row: int,
    size: int,
    fd_hessian_fallback: bool,
) -> Tuple[np.ndarray, np.ndarray, List[Optional[np.ndarray]]]:
    n = trajectory.size
    try:
        values = np.asarray(group.function(trajectory), dtype=float).ravel()
        jac = np.asarray(group.jacobian(trajectory), dtype=float).reshape(group.dim, n)
        if group.hessian is not None:
            hess: Optional[np.ndarray] = np.asarray(group.hessian(trajectory), dtype=float)
        elif fd_hessian_fallback and group.dim:
            hess = finite_diff_hessian(group.jacobian, trajectory)
        else:
            hess = None
    except (ValueError, TypeError, ArithmeticError, NonFiniteError) as exc:
        raise ConstraintEvaluationError(
            f"Constraint provider '{group.name}' failed",
            row=row,
            group=group.name,
            original_error=exc,
        ) from exc

    if values.shape != (group.dim,):
        raise ConstraintEvaluationError(
            f"Constraint provider '{group.name}' returned {values.size} rows, expected {group.dim}",
            row=row,
            group=group.name,
        )
    finite = np.isfinite(values) & np.all(np.isfinite(jac), axis=1)
    if not np.all(finite):
        bad = int(np.argmin(finite))
        raise ConstraintEvaluationError(
            f"Constraint provider '{group.name}' returned non-finite values",
            row=row + bad,
            group=group.name,
        )

    padded_jac = np.zeros((group.dim, size))
    padded_jac[:, :n] = jac
    hessians: List[Optional[np.ndarray]] = []
    for r in range(group.dim):
        if hess is None:
            hessians.append(None)
        else:
            full = np.zeros((size, size))
            full[:n, :n] = hess[r]
            hessians.append(full)
    return values, padded_jac, hessians


def eval_constraints(
    problem: ProblemDef,
    particle: AugmentedParticle,
    fd_hessian_fallback: bool = False,
) -> ConstraintBundle:
    """
    Evaluate the augmented equality system of a particle.

    Rows are ``[h(tau); defects; g(tau) + z^2 / 2]``; columns are the
    augmented decision vector ``[vec(X), vec(U), z]``.

    Parameters
    ----------
    problem : ProblemDef
        The problem.
    particle : AugmentedParticle
        The particle with one slack entry per inequality row.
    fd_hessian_fallback : bool
        Use finite-difference Hessians for groups without analytic ones.

    Returns
    -------
    ConstraintBundle
        Values, Jacobian, per-row Hessians and group row ranges.

    Raises
    ------
    ProblemDefinitionError
        If the particle does not match the problem layout.
    ConstraintEvaluationError
        If a provider fails or returns non-finite values.
    """
    layout = problem.layout
    if particle.layout != layout:
        raise ProblemDefinitionError(
            "Particle does not match problem layout",
            expected=(layout.horizon, layout.state_dim, layout.control_dim, layout.num_slack),
            actual=(
                particle.layout.horizon,
                particle.layout.state_dim,
                particle.layout.control_dim,
                particle.layout.num_slack,
            ),
        )
    trajectory = particle.particle.to_vector()
    size = layout.size
    values: List[np.ndarray] = []
    jacobians: List[np.ndarray] = []
    hessians: List[Optional[np.ndarray]] = []
    groups: List[Tuple[str, int, int]] = []
    row = 0

    for group in problem.equality:
        vals, jac, hess = _evaluate_group(group, trajectory, row, size, fd_hessian_fallback)
        values.append(vals)
        jacobians.append(jac)
        hessians.extend(hess)
        groups.append((group.name, row, row + group.dim))
        row += group.dim

    if problem.dynamics is not None:
        defects = assemble_defects(particle.particle, problem.initial_state, problem.dynamics)
        if not np.all(np.isfinite(defects)):
            bad = int(np.argmin(np.isfinite(defects)))
            raise ConstraintEvaluationError("Dynamics defects are not finite", row=row + bad, group="dynamics")
        jac = np.zeros((defects.size, size))
        jac[:, : layout.trajectory_size] = defect_jacobian(problem, particle.particle)
        values.append(defects)
        jacobians.append(jac)
        hessians.extend(_defect_hessians(problem, particle.particle, size))
        groups.append(("dynamics", row, row + defects.size))
        row += defects.size

    slack_offset = 0
    for group in problem.inequality:
        vals, jac, hess = _evaluate_group(group, trajectory, row, size, fd_hessian_fallback)
        z = particle.slack[slack_offset : slack_offset + group.dim]
        vals = vals + 0.5 * z**2
        for r in range(group.dim):
            column = layout.trajectory_size + slack_offset + r
            jac[r, column] = z[r]
            # slack rows always carry their own curvature
            full = hess[r] if hess[r] is not None else np.zeros((size, size))
            full[column, column] += 1.0
            hess[r] = full
        values.append(vals)
        jacobians.append(jac)
        hessians.extend(hess)
        groups.append((group.name, row, row + group.dim))
        row += group.dim
        slack_offset += group.dim

    return ConstraintBundle(
        values=np.concatenate(values) if values else np.zeros(0),
        jacobian=np.vstack(jacobians) if jacobians else np.zeros((0, size)),
        hessians=tuple(hessians),
        groups=tuple(groups),
    )


def _particles_from_controls(
    problem: ProblemDef,
    control_sets: List[np.ndarray],
) -> List[AugmentedParticle]:
    particles = []
    slack = np.zeros(problem.num_inequality)
    assert problem.dynamics is not None
    for controls in control_sets:
        states = rollout_dynamics(problem.initial_state, controls, problem.dynamics)
        particles.append(AugmentedParticle(TrajectoryParticle(states, controls), slack))
    return particles


def sample_initial_particles(
    problem: ProblemDef,
    num_particles: int,
    rng: np.random.Generator,
    scale: float = 1.0,
) -> List[AugmentedParticle]:
    """
    Draw dynamically consistent particles from the control prior.

    Controls are sampled from the problem's control prior (zero when it has
    none) and rolled out from ``x_0``. Problems without dynamics draw their
    states around ``x_0`` with standard deviation `scale`. Slack entries are
    zero; `csvto.solver.csvto.solve` initializes them.

    Parameters
    ----------
    problem : ProblemDef
        The problem.
    num_particles : int
        Number of particles ``N``.
    rng : np.random.Generator
        Random generator.
    scale : float
        Multiplier on the prior standard deviation.

    Returns
    -------
    List[AugmentedParticle]
        ``N`` particles.
    """
    T = problem.horizon
    if problem.dynamics is None:
        slack = np.zeros(problem.num_inequality)
        particles = []
        for _ in range(num_particles):
            states = problem.initial_state + scale * rng.standard_normal((T, problem.state_dim))
            controls = np.zeros((T, problem.control_dim))
            if problem.control_prior is not None:
                controls = problem.control_prior.sample(T, rng, scale)
            particles.append(AugmentedParticle(TrajectoryParticle(states, controls), slack))
        return particles

    prior = problem.control_prior
    control_sets = [
        prior.sample(T, rng, scale) if prior is not None else np.zeros((T, problem.control_dim))
        for _ in range(num_particles)
    ]
    return _particles_from_controls(problem, control_sets)


def perturbed_initialization(
    problem: ProblemDef,
    nominal_controls: np.ndarray,
    num_particles: int,
    rng: np.random.Generator,
    sigma: float = 0.01,
) -> List[AugmentedParticle]:
    """
    Draw particles as small perturbations of one nominal control sequence.

    Parameters
    ----------
    problem : ProblemDef
        Problem with dynamics.
    nominal_controls : np.ndarray
        Controls of shape ``(T, d_u)``.
    num_particles : int
        Number of particles ``N``.
    rng : np.random.Generator
        Random generator.
    sigma : float
        Standard deviation of the isotropic control perturbation.

    Returns
    -------
    List[AugmentedParticle]
        ``N`` dynamically consistent particles.

    Raises
    ------
    ProblemDefinitionError
        If the problem has no dynamics or the controls have the wrong shape.
    """
    if problem.dynamics is None:
        raise ProblemDefinitionError("Perturbed initialization requires dynamics", problem=problem.name)
    nominal = np.asarray(nominal_controls, dtype=float)
    if nominal.shape != (problem.horizon, problem.control_dim):
        raise ProblemDefinitionError(
            "Nominal controls do not match the problem",
            expected=(problem.horizon, problem.control_dim),
            actual=nominal.shape,
        )
    control_sets = [nominal + sigma * rng.standard_normal(nominal.shape) for _ in range(num_particles)]
    logger.debug("Perturbed initialization of %d particles (sigma=%g)", num_particles, sigma)
    return _particles_from_controls(problem, control_sets)
