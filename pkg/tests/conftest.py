"""
conftest
========

Configuration file for pytest.

Shared fixtures build small problems with known answers: a linear equality
whose projection is exact, a single integrator driven to a goal, and the toy
2D mixture.
"""

import logging

import numpy as np
import pytest

from csvto.benchmarks.toy2d import make_toy2d
from csvto.core.problem import Bounds, ConstraintGroup, ControlPrior, ProblemDef


@pytest.fixture(autouse=True)
def restore_csvto_logger():
    """Undo handler and propagation changes made by configure_logging."""
    logger = logging.getLogger("csvto")
    handlers, level, propagate = list(logger.handlers), logger.level, logger.propagate
    yield
    logger.handlers[:] = handlers
    logger.setLevel(level)
    logger.propagate = propagate


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(0)


@pytest.fixture
def toy_problem():
    """Toy 2D mixture on a circle with one excluded mode."""
    return make_toy2d()


@pytest.fixture
def plane_problem():
    """Points in 3D on the plane ``x + y + z = 1`` with a quadratic cost around the origin."""
    normal = np.ones(3)
    return ProblemDef(
        name="plane",
        state_dim=3,
        control_dim=0,
        horizon=1,
        initial_state=np.zeros(3),
        cost=lambda tau: float(0.5 * tau @ tau),
        cost_gradient=lambda tau: np.asarray(tau, dtype=float),
        equality=(
            ConstraintGroup(
                "plane",
                1,
                lambda tau: np.array([normal @ tau - 1.0]),
                lambda tau: normal[None, :],
                lambda tau: np.zeros((1, 3, 3)),
            ),
        ),
    )


@pytest.fixture
def halfplane_problem():
    """Points in 2D with ``x <= -1`` and a quadratic cost pulling towards ``(1, 0)``."""
    target = np.array([1.0, 0.0])
    return ProblemDef(
        name="halfplane",
        state_dim=2,
        control_dim=0,
        horizon=1,
        initial_state=np.zeros(2),
        cost=lambda tau: float(np.sum((tau - target) ** 2)),
        cost_gradient=lambda tau: 2.0 * (tau - target),
        inequality=(
            ConstraintGroup(
                "wall",
                1,
                lambda tau: np.array([tau[0] + 1.0]),
                lambda tau: np.array([[1.0, 0.0]]),
                lambda tau: np.zeros((1, 2, 2)),
            ),
        ),
    )


def single_integrator(horizon=4, dt=0.5, goal=(1.0, 1.0), bounds=None):
    """Planar single integrator ``x' = x + dt u`` with a terminal goal cost."""
    goal = np.asarray(goal, dtype=float)
    size = horizon * 4

    def cost(tau):
        states = tau[: horizon * 2].reshape(horizon, 2)
        controls = tau[horizon * 2 :].reshape(horizon, 2)
        return float(np.sum((states - goal) ** 2) + 0.1 * np.sum(controls**2))

    def cost_gradient(tau):
        states = tau[: horizon * 2].reshape(horizon, 2)
        controls = tau[horizon * 2 :].reshape(horizon, 2)
        grad = np.zeros(size)
        grad[: horizon * 2] = (2.0 * (states - goal)).ravel()
        grad[horizon * 2 :] = (0.2 * controls).ravel()
        return grad

    return ProblemDef(
        name="integrator",
        state_dim=2,
        control_dim=2,
        horizon=horizon,
        initial_state=np.zeros(2),
        cost=cost,
        cost_gradient=cost_gradient,
        dynamics=lambda x, u: x + dt * u,
        dynamics_jacobian=lambda x, u: (np.eye(2), dt * np.eye(2)),
        bounds=bounds,
        control_prior=ControlPrior(np.zeros(2), np.ones(2), include_in_posterior=False),
    )


@pytest.fixture
def integrator_problem():
    """Single integrator with horizon 4 and goal ``(1, 1)``."""
    return single_integrator()


@pytest.fixture
def bounded_integrator_problem():
    """Single integrator with controls bounded to ``[-0.5, 0.5]``."""
    bounds = Bounds(np.full(2, -np.inf), np.full(2, np.inf), np.full(2, -0.5), np.full(2, 0.5))
    return single_integrator(bounds=bounds)


class IntegratorEnv:
    """Environment stepping the single integrator, with a wall at ``x <= 2``."""

    def __init__(self, dt=0.5, fail_at=None):
        self.dt = dt
        self.fail_at = fail_at
        self.steps = 0
        self._state = np.zeros(2)

    @property
    def state(self):
        return self._state.copy()

    @property
    def constraint_names(self):
        return ("wall",)

    def step(self, control):
        self.steps += 1
        if self.fail_at is not None and self.steps == self.fail_at:
            raise RuntimeError("actuator fault")
        self._state = self._state + self.dt * np.asarray(control, dtype=float)
        return self.state

    def planning_problem(self, problem):
        return problem

    def constraint_violations(self, state):
        return {"wall": max(float(state[0]) - 2.0, 0.0)}

    def in_collision(self, state):
        return bool(state[0] > 2.0)


@pytest.fixture
def integrator_env():
    """Fresh single-integrator environment."""
    return IntegratorEnv()


@pytest.fixture
def make_integrator():
    """Factory of single-integrator problems."""
    return single_integrator


@pytest.fixture
def make_env():
    """Factory of single-integrator environments."""
    return IntegratorEnv
