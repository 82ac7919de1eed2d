"""
csvto.benchmarks.quadrotor
==========================

12-DoF quadrotor constrained to a GP surface.

The state is ``[x, y, z, p, q, r, vx, vy, vz, vp, vq, vr]`` (position, Euler
angles and their rates), the control is the four thrust inputs, and the
dynamics are Euler-integrated. The quadrotor must reach a goal on the surface
``z = f_surf(x, y)`` while staying inside a 10 m x 10 m area. Three variants
add obstacle inequalities: none, static (a GP obstacle field) and dynamic (a
moving cylinder the planner treats as fixed at plan time).

Classes
-------
QuadrotorParams
    Physical and task parameters.
QuadrotorModel
    Dynamics, cost and constraint providers.
QuadrotorEnv
    Simulated system driven by the receding-horizon loop.

Functions
---------
make_quadrotor
    Build the planning problem and its environment.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from csvto.benchmarks.gp import GpField, make_obstacle_field, make_surface
from csvto.core.derivatives import finite_diff_hessian
from csvto.core.errors import EnvironmentStepError, ProblemDefinitionError
from csvto.core.problem import Bounds, ConstraintGroup, ControlPrior, ProblemDef

logger = logging.getLogger(__name__)

STATE_DIM = 12
CONTROL_DIM = 4
VARIANTS = ("none", "static", "dynamic")

STATE_WEIGHTS = np.array([5.0, 5.0, 0.5, 2.5, 2.5, 0.025, 1.25, 1.25, 1.25, 2.5, 2.5, 2.5])
CONTROL_WEIGHTS = np.array([0.5, 128.0, 128.0, 128.0])

# obstacle crosses the start-goal diagonal at the origin
OBSTACLE_START = np.array([1.25, -1.25])
OBSTACLE_DIRECTION = np.array([-1.0, 1.0]) / np.sqrt(2.0)


@dataclass(frozen=True)
class QuadrotorParams:
    """
    Physical and task parameters.

    Attributes
    ----------
    mass : float
        Mass ``m`` (kg).
    inertia : Tuple[float, float, float]
        ``(I_x, I_y, I_z)`` (kg m^2).
    thrust_gain : float
        Thrust coefficient ``K``.
    gravity : float
        Gravitational acceleration (negative, m/s^2).
    dt : float
        Integration step (s).
    horizon : int
        Planning horizon ``T``.
    goal_xy : Tuple[float, float]
        Goal position in the plane; the goal height is on the surface.
    workspace : float
        Half-width of the square ``(x, y)`` bounds.
    start_low, start_high : float
        Start positions are uniform over ``[start_low, start_high]^2``.
    surface_lengthscale : float
        RBF lengthscale of the surface and obstacle GPs.
    surface_seed : int
        Seed of the surface and obstacle draws.
    obstacle_radius : float
        Radius of the moving cylinder.
    obstacle_speed : float
        Speed of the moving cylinder (m/s).
    second_order_dynamics : bool
        Supply finite-difference Hessians of the dynamics.
    likelihood_temperature : float
        ``gamma`` of the likelihood ``exp(-gamma C)``. The control weights
        give the cost a curvature of up to 256; the explicit tangent step is
        only stable while ``alpha_J * gamma * 256 < 2``.
    thrust_limits : Tuple[float, float]
        Bounds of the thrust input ``u_1`` (hover sits inside).
    torque_limit : float
        Symmetric bound of the three torque inputs.
    """

    mass: float = 1.0
    inertia: Tuple[float, float, float] = (0.5, 0.1, 0.3)
    thrust_gain: float = 5.0
    gravity: float = -9.81
    dt: float = 0.05
    horizon: int = 12
    goal_xy: Tuple[float, float] = (4.0, 4.0)
    workspace: float = 5.0
    start_low: float = -4.5
    start_high: float = -3.0
    surface_lengthscale: float = 2.0
    surface_seed: int = 0
    obstacle_radius: float = 0.5
    obstacle_speed: float = 0.5
    second_order_dynamics: bool = False
    likelihood_temperature: float = 0.05
    thrust_limits: Tuple[float, float] = (-4.0, 0.0)
    torque_limit: float = 0.5

    def __post_init__(self) -> None:
        if self.mass <= 0 or min(self.inertia) <= 0:
            raise ProblemDefinitionError("Mass and inertias must be positive", mass=self.mass, inertia=self.inertia)
        if self.dt <= 0 or self.horizon < 1:
            raise ProblemDefinitionError("Time step and horizon must be positive", dt=self.dt, horizon=self.horizon)
        if self.start_low > self.start_high:
            raise ProblemDefinitionError("Start region is empty", low=self.start_low, high=self.start_high)
        if self.likelihood_temperature <= 0:
            raise ProblemDefinitionError(
                "Likelihood temperature must be positive", likelihood_temperature=self.likelihood_temperature
            )
        low, high = self.thrust_limits
        if not low < self.hover_thrust < high or self.torque_limit <= 0:
            raise ProblemDefinitionError(
                "Control limits must contain hover",
                thrust_limits=self.thrust_limits,
                torque_limit=self.torque_limit,
            )

    @property
    def hover_thrust(self) -> float:
        """``u_1`` that cancels gravity at level attitude."""
        return self.gravity * self.mass / self.thrust_gain


def _trig(state: np.ndarray) -> Tuple[float, ...]:
    p, q, r = state[3:6]
    return np.sin(p), np.cos(p), np.sin(q), np.cos(q), np.tan(q), np.sin(r), np.cos(r)


@dataclass
class QuadrotorModel:
    """
    Dynamics, cost and constraint providers of the quadrotor task.

    Parameters
    ----------
    params : QuadrotorParams
        Physical and task parameters.
    surface : GpField
        Surface height field.
    obstacles : Optional[GpField]
        Static obstacle field (obstacle-free where ``f_obs <= 0``).
    """

    params: QuadrotorParams
    surface: GpField
    obstacles: Optional[GpField] = None
    goal: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        goal = np.zeros(STATE_DIM)
        goal[:2] = self.params.goal_xy
        goal[2] = self.surface.value(goal[:2])
        self.goal = goal

    # --- Dynamics ---------------------------------------------------------------------------------

    def acceleration(self, state: np.ndarray, control: np.ndarray) -> np.ndarray:
        """Time derivative of the state."""
        prm = self.params
        ix, iy, iz = prm.inertia
        sp, cp, sq, cq, tq, sr, cr = _trig(state)
        vp, vq, vr = state[9:12]
        force = prm.thrust_gain * control[0] / prm.mass
        return np.array(
            [
                state[6],
                state[7],
                state[8],
                vp + vq * sp * tq + vr * cp * tq,
                vq * cp - vr * sp,
                (vq * sp + vr * cp) / cq,
                -(sp * sr + cr * cp * sq) * force,
                -(cr * sp - cp * sr * sq) * force,
                prm.gravity - cp * cq * force,
                ((iy - iz) * vq * vr + prm.thrust_gain * control[1]) / ix,
                ((iz - ix) * vp * vr + prm.thrust_gain * control[2]) / iy,
                ((ix - iy) * vp * vq + prm.thrust_gain * control[3]) / iz,
            ]
        )

    def dynamics(self, state: np.ndarray, control: np.ndarray) -> np.ndarray:
        """Euler step ``x + dt * xdot``."""
        return state + self.params.dt * self.acceleration(state, control)

    def dynamics_jacobian(self, state: np.ndarray, control: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Analytic ``(df/dx, df/du)``."""
        prm = self.params
        ix, iy, iz = prm.inertia
        k = prm.thrust_gain
        sp, cp, sq, cq, tq, sr, cr = _trig(state)
        vp, vq, vr = state[9:12]
        force = k * control[0] / prm.mass

        da = np.zeros((STATE_DIM, STATE_DIM))
        db = np.zeros((STATE_DIM, CONTROL_DIM))
        da[0, 6] = da[1, 7] = da[2, 8] = 1.0

        da[3, 3] = vq * cp * tq - vr * sp * tq
        da[3, 4] = (vq * sp + vr * cp) / cq**2
        da[3, 9:12] = [1.0, sp * tq, cp * tq]

        da[4, 3] = -vq * sp - vr * cp
        da[4, 10:12] = [cp, -sp]

        da[5, 3] = (vq * cp - vr * sp) / cq
        da[5, 4] = (vq * sp + vr * cp) * sq / cq**2
        da[5, 10:12] = [sp / cq, cp / cq]

        da[6, 3] = -(cp * sr - cr * sp * sq) * force
        da[6, 4] = -cr * cp * cq * force
        da[6, 5] = -(sp * cr - sr * cp * sq) * force
        db[6, 0] = -(sp * sr + cr * cp * sq) * k / prm.mass

        da[7, 3] = -(cr * cp + sp * sr * sq) * force
        da[7, 4] = cp * sr * cq * force
        da[7, 5] = (sr * sp + cp * cr * sq) * force
        db[7, 0] = -(cr * sp - cp * sr * sq) * k / prm.mass

        da[8, 3] = sp * cq * force
        da[8, 4] = cp * sq * force
        db[8, 0] = -cp * cq * k / prm.mass

        da[9, 10:12] = [(iy - iz) * vr / ix, (iy - iz) * vq / ix]
        da[10, 9] = (iz - ix) * vr / iy
        da[10, 11] = (iz - ix) * vp / iy
        da[11, 9:11] = [(ix - iy) * vq / iz, (ix - iy) * vp / iz]
        db[9, 1] = k / ix
        db[10, 2] = k / iy
        db[11, 3] = k / iz

        dt = prm.dt
        return np.eye(STATE_DIM) + dt * da, dt * db

    def dynamics_hessian(self, state: np.ndarray, control: np.ndarray) -> np.ndarray:
        """Finite-difference second derivatives w.r.t. ``[x, u]``."""

        def stacked(point: np.ndarray) -> np.ndarray:
            fx, fu = self.dynamics_jacobian(point[:STATE_DIM], point[STATE_DIM:])
            return np.hstack([fx, fu])

        return finite_diff_hessian(stacked, np.concatenate([state, control]))

    # --- Cost -------------------------------------------------------------------------------------

    def _split(self, trajectory: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        n_states = self.params.horizon * STATE_DIM
        states = trajectory[:n_states].reshape(self.params.horizon, STATE_DIM)
        controls = trajectory[n_states:].reshape(self.params.horizon, CONTROL_DIM)
        return states, controls

    def _state_weights(self) -> np.ndarray:
        weights = np.tile(STATE_WEIGHTS, (self.params.horizon, 1))
        weights[-1] *= 2.0
        return weights

    def _control_weights(self) -> np.ndarray:
        weights = np.tile(CONTROL_WEIGHTS, (self.params.horizon, 1))
        weights[-1] = 0.0
        return weights

    def cost(self, trajectory: np.ndarray) -> float:
        """
        Quadratic tracking cost.

        States ``x_1..x_T`` are weighted by ``Q`` with the terminal state
        weighted twice as much; controls ``u_0..u_{T-2}`` are weighted by
        ``R``. The last control only reaches ``x_T`` and is not penalized.
        """
        states, controls = self._split(trajectory)
        error = states - self.goal
        return float(np.sum(self._state_weights() * error**2) + np.sum(self._control_weights() * controls**2))

    def cost_gradient(self, trajectory: np.ndarray) -> np.ndarray:
        states, controls = self._split(trajectory)
        grad_states = 2.0 * self._state_weights() * (states - self.goal)
        grad_controls = 2.0 * self._control_weights() * controls
        return np.concatenate([grad_states.ravel(), grad_controls.ravel()])

    # --- Constraints ------------------------------------------------------------------------------

    @property
    def trajectory_size(self) -> int:
        return self.params.horizon * (STATE_DIM + CONTROL_DIM)

    def _xy_columns(self, t: int) -> Tuple[int, int]:
        return t * STATE_DIM, t * STATE_DIM + 1

    def surface_values(self, trajectory: np.ndarray) -> np.ndarray:
        """``z_t - f_surf(x_t, y_t)`` for every timestep."""
        states, _ = self._split(trajectory)
        return np.array([s[2] - self.surface.value(s[:2]) for s in states])

    def surface_jacobian(self, trajectory: np.ndarray) -> np.ndarray:
        states, _ = self._split(trajectory)
        jac = np.zeros((self.params.horizon, self.trajectory_size))
        for t, s in enumerate(states):
            cx, cy = self._xy_columns(t)
            jac[t, cx : cy + 1] = -self.surface.gradient(s[:2])
            jac[t, cx + 2] = 1.0
        return jac

    def surface_hessian(self, trajectory: np.ndarray) -> np.ndarray:
        states, _ = self._split(trajectory)
        hess = np.zeros((self.params.horizon, self.trajectory_size, self.trajectory_size))
        for t, s in enumerate(states):
            cx, cy = self._xy_columns(t)
            hess[t, cx : cy + 1, cx : cy + 1] = -self.surface.hessian(s[:2])
        return hess

    def obstacle_group(self) -> ConstraintGroup:
        """Static obstacle inequality ``f_obs(x_t, y_t) <= 0``."""
        field_ = self.obstacles
        if field_ is None:
            raise ProblemDefinitionError("Model has no obstacle field")
        horizon, size = self.params.horizon, self.trajectory_size

        def values(trajectory: np.ndarray) -> np.ndarray:
            states, _ = self._split(trajectory)
            return np.array([field_.value(s[:2]) for s in states])

        def jacobian(trajectory: np.ndarray) -> np.ndarray:
            states, _ = self._split(trajectory)
            jac = np.zeros((horizon, size))
            for t, s in enumerate(states):
                cx, cy = self._xy_columns(t)
                jac[t, cx : cy + 1] = field_.gradient(s[:2])
            return jac

        def hessian(trajectory: np.ndarray) -> np.ndarray:
            states, _ = self._split(trajectory)
            hess = np.zeros((horizon, size, size))
            for t, s in enumerate(states):
                cx, cy = self._xy_columns(t)
                hess[t, cx : cy + 1, cx : cy + 1] = field_.hessian(s[:2])
            return hess

        return ConstraintGroup("obstacle", horizon, values, jacobian, hessian)

    def cylinder_group(self, center: np.ndarray) -> ConstraintGroup:
        """Cylinder inequality ``r^2 - ||(x_t, y_t) - c||^2 <= 0`` with a fixed centre."""
        center = np.array(center, dtype=float)
        radius = self.params.obstacle_radius
        horizon, size = self.params.horizon, self.trajectory_size

        def values(trajectory: np.ndarray) -> np.ndarray:
            states, _ = self._split(trajectory)
            return radius**2 - np.sum((states[:, :2] - center) ** 2, axis=1)

        def jacobian(trajectory: np.ndarray) -> np.ndarray:
            states, _ = self._split(trajectory)
            jac = np.zeros((horizon, size))
            for t, s in enumerate(states):
                cx, cy = self._xy_columns(t)
                jac[t, cx : cy + 1] = -2.0 * (s[:2] - center)
            return jac

        def hessian(trajectory: np.ndarray) -> np.ndarray:
            hess = np.zeros((horizon, size, size))
            for t in range(horizon):
                cx, cy = self._xy_columns(t)
                hess[t, cx : cy + 1, cx : cy + 1] = -2.0 * np.eye(2)
            return hess

        return ConstraintGroup("obstacle", horizon, values, jacobian, hessian)

    def surface_group(self) -> ConstraintGroup:
        return ConstraintGroup(
            "surface", self.params.horizon, self.surface_values, self.surface_jacobian, self.surface_hessian
        )

    def bounds(self) -> Bounds:
        """``(x, y)`` inside the workspace and limited controls; other states unbounded."""
        prm = self.params
        state_min = np.full(STATE_DIM, -np.inf)
        state_max = np.full(STATE_DIM, np.inf)
        state_min[:2] = -prm.workspace
        state_max[:2] = prm.workspace
        control_min = np.array([prm.thrust_limits[0]] + [-prm.torque_limit] * 3)
        control_max = np.array([prm.thrust_limits[1]] + [prm.torque_limit] * 3)
        return Bounds(state_min, state_max, control_min, control_max)

    def control_prior(self) -> ControlPrior:
        """Hover-centred prior; the cost already penalizes controls."""
        mean = np.array([self.params.hover_thrust, 0.0, 0.0, 0.0])
        return ControlPrior(mean, np.sqrt(2.0 / CONTROL_WEIGHTS), include_in_posterior=False)


class QuadrotorEnv:
    """
    Simulated quadrotor executing the planner's controls.

    Uses the planner's dynamics. In the dynamic variant the cylinder moves at
    constant velocity; `planning_problem` freezes it at its current position.

    Parameters
    ----------
    model : QuadrotorModel
        Shared dynamics and constraint providers.
    variant : str
        ``"none"``, ``"static"`` or ``"dynamic"``.
    initial_state : np.ndarray
        Start state.
    """

    def __init__(self, model: QuadrotorModel, variant: str, initial_state: np.ndarray) -> None:
        self.model = model
        self.variant = variant
        self._state = np.array(initial_state, dtype=float)
        self.steps = 0
        self.obstacle_center = OBSTACLE_START.copy()
        self._obstacle_velocity = model.params.obstacle_speed * OBSTACLE_DIRECTION

    @property
    def state(self) -> np.ndarray:
        return self._state.copy()

    @property
    def constraint_names(self) -> Tuple[str, ...]:
        return ("surface",) if self.variant == "none" else ("surface", "obstacle")

    def step(self, control: np.ndarray) -> np.ndarray:
        """Advance the quadrotor (and the moving obstacle) by one time step."""
        new_state = self.model.dynamics(self._state, np.asarray(control, dtype=float))
        self.steps += 1
        if not np.all(np.isfinite(new_state)):
            raise EnvironmentStepError("Quadrotor state became non-finite", step=self.steps)
        self._state = new_state
        if self.variant == "dynamic":
            self.obstacle_center = self.obstacle_center + self.model.params.dt * self._obstacle_velocity
        return self.state

    def planning_problem(self, problem: ProblemDef) -> ProblemDef:
        if self.variant != "dynamic":
            return problem
        return problem.with_inequality([self.model.cylinder_group(self.obstacle_center)])

    def _obstacle_value(self, state: np.ndarray) -> float:
        if self.variant == "static":
            assert self.model.obstacles is not None
            return self.model.obstacles.value(state[:2])
        gap = state[:2] - self.obstacle_center
        return float(self.model.params.obstacle_radius**2 - gap @ gap)

    def constraint_violations(self, state: np.ndarray) -> Dict[str, float]:
        """``|z - f_surf|`` and, with obstacles, ``max(g, 0)``."""
        violations = {"surface": abs(float(state[2] - self.model.surface.value(state[:2])))}
        if self.variant != "none":
            violations["obstacle"] = max(self._obstacle_value(state), 0.0)
        return violations

    def in_collision(self, state: np.ndarray) -> bool:
        return self.variant != "none" and self._obstacle_value(state) > 0.0

    def distance_to_goal(self, state: Optional[np.ndarray] = None) -> float:
        """Planar distance to the goal."""
        state = self._state if state is None else state
        return float(np.linalg.norm(state[:2] - self.model.goal[:2]))


def sample_start(model: QuadrotorModel, rng: np.random.Generator) -> np.ndarray:
    """Start state: uniform ``(x, y)`` in the start region, on the surface, at rest."""
    prm = model.params
    state = np.zeros(STATE_DIM)
    state[:2] = rng.uniform(prm.start_low, prm.start_high, size=2)
    state[2] = model.surface.value(state[:2])
    return state


def make_quadrotor(
    params: Optional[QuadrotorParams] = None,
    variant: str = "none",
    seed: int = 0,
) -> Tuple[ProblemDef, QuadrotorEnv]:
    """
    Build the quadrotor planning problem and its environment.

    Parameters
    ----------
    params : Optional[QuadrotorParams]
        Parameters; defaults to `QuadrotorParams()`.
    variant : str
        ``"none"``, ``"static"`` or ``"dynamic"``.
    seed : int
        Seed of the start-state draw (the surface uses `params.surface_seed`).

    Returns
    -------
    Tuple[ProblemDef, QuadrotorEnv]
        Problem with ``x_0`` at the sampled start, and the environment.

    Raises
    ------
    ProblemDefinitionError
        If the variant is unknown.
    """
    if variant not in VARIANTS:
        raise ProblemDefinitionError("Unknown quadrotor variant", expected=VARIANTS, actual=variant)
    params = params or QuadrotorParams()
    surface = make_surface(params.surface_lengthscale, params.surface_seed, extent=params.workspace)
    obstacles = (
        make_obstacle_field(params.surface_lengthscale, params.surface_seed, extent=params.workspace)
        if variant == "static"
        else None
    )
    model = QuadrotorModel(params, surface, obstacles)
    start = sample_start(model, np.random.default_rng(seed))

    if variant == "static":
        inequality: Tuple[ConstraintGroup, ...] = (model.obstacle_group(),)
    elif variant == "dynamic":
        inequality = (model.cylinder_group(OBSTACLE_START),)
    else:
        inequality = ()

    problem = ProblemDef(
        name=f"quadrotor-{variant}",
        state_dim=STATE_DIM,
        control_dim=CONTROL_DIM,
        horizon=params.horizon,
        initial_state=start,
        cost=model.cost,
        cost_gradient=model.cost_gradient,
        dynamics=model.dynamics,
        dynamics_jacobian=model.dynamics_jacobian,
        dynamics_hessian=model.dynamics_hessian if params.second_order_dynamics else None,
        equality=(model.surface_group(),),
        inequality=inequality,
        bounds=model.bounds(),
        control_prior=model.control_prior(),
        likelihood_temperature=params.likelihood_temperature,
    )
    logger.debug("Quadrotor '%s' start at (%.3f, %.3f)", variant, start[0], start[1])
    return problem, QuadrotorEnv(model, variant, start)
