"""
test_csvto.test_benchmarks.test_quadrotor
=========================================

Tests for csvto.benchmarks.quadrotor module.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from csvto.benchmarks.gp import make_surface
from csvto.benchmarks.quadrotor import (
    CONTROL_DIM,
    OBSTACLE_DIRECTION,
    OBSTACLE_START,
    STATE_DIM,
    QuadrotorModel,
    QuadrotorParams,
    make_quadrotor,
    sample_start,
)
from csvto.core.derivatives import finite_diff_jacobian
from csvto.core.errors import EnvironmentStepError, ProblemDefinitionError


@pytest.fixture
def params():
    return QuadrotorParams(horizon=3)


@pytest.fixture
def model(params):
    return QuadrotorModel(params, make_surface(params.surface_lengthscale, params.surface_seed))


def _random_state(rng):
    state = 0.3 * rng.standard_normal(STATE_DIM)
    state[:2] = rng.uniform(-3.0, 3.0, size=2)
    return state


class TestQuadrotorParams:
    """Tests for QuadrotorParams."""

    def test_hover_thrust(self):
        assert QuadrotorParams().hover_thrust == pytest.approx(-1.962)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"mass": 0.0},
            {"dt": 0.0},
            {"horizon": 0},
            {"start_low": 0.0},
            {"likelihood_temperature": 0.0},
            {"thrust_limits": (-1.0, 0.0)},
            {"torque_limit": 0.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ProblemDefinitionError):
            QuadrotorParams(**kwargs)


class TestQuadrotorModel:
    """Tests for QuadrotorModel dynamics, cost and constraints."""

    def test_hover_is_equilibrium(self, model, params):
        state = np.zeros(STATE_DIM)
        control = np.array([params.hover_thrust, 0.0, 0.0, 0.0])
        assert_allclose(model.acceleration(state, control), 0.0, atol=1e-12)
        assert_allclose(model.dynamics(state, control), state, atol=1e-12)

    def test_dynamics_jacobian_matches_finite_differences(self, model, rng):
        state = _random_state(rng)
        control = rng.standard_normal(CONTROL_DIM)
        fx, fu = model.dynamics_jacobian(state, control)
        numeric = finite_diff_jacobian(
            lambda z: model.dynamics(z[:STATE_DIM], z[STATE_DIM:]), np.concatenate([state, control])
        )
        assert_allclose(fx, numeric[:, :STATE_DIM], atol=1e-6)
        assert_allclose(fu, numeric[:, STATE_DIM:], atol=1e-6)

    def test_dynamics_hessian_shape(self, model, rng):
        hess = model.dynamics_hessian(_random_state(rng), rng.standard_normal(CONTROL_DIM))
        size = STATE_DIM + CONTROL_DIM
        assert hess.shape == (STATE_DIM, size, size)

    def test_goal_on_surface(self, model, params):
        assert_allclose(model.goal[:2], params.goal_xy)
        assert model.goal[2] == pytest.approx(model.surface.value(model.goal[:2]))

    def test_cost_zero_at_goal_hover_free(self, model, params):
        states = np.tile(model.goal, (params.horizon, 1))
        controls = np.zeros((params.horizon, CONTROL_DIM))
        trajectory = np.concatenate([states.ravel(), controls.ravel()])
        assert model.cost(trajectory) == pytest.approx(0.0)

    def test_cost_skips_last_control(self, model, params):
        states = np.tile(model.goal, (params.horizon, 1))
        controls = np.zeros((params.horizon, CONTROL_DIM))
        controls[-1] = [1.0, 1.0, 1.0, 1.0]
        trajectory = np.concatenate([states.ravel(), controls.ravel()])
        assert model.cost(trajectory) == pytest.approx(0.0)
        assert_array_equal(model.cost_gradient(trajectory), 0.0)
        controls[0] = [1.0, 0.0, 0.0, 1.0]
        trajectory = np.concatenate([states.ravel(), controls.ravel()])
        assert model.cost(trajectory) == pytest.approx(0.5 + 128.0)

    def test_cost_gradient_matches_finite_differences(self, model, rng):
        trajectory = rng.standard_normal(model.trajectory_size)
        numeric = finite_diff_jacobian(lambda tau: np.array([model.cost(tau)]), trajectory)
        assert_allclose(model.cost_gradient(trajectory), numeric[0], rtol=1e-6, atol=1e-4)

    def test_surface_jacobian_matches_finite_differences(self, model, rng):
        trajectory = 0.5 * rng.standard_normal(model.trajectory_size)
        numeric = finite_diff_jacobian(model.surface_values, trajectory)
        assert_allclose(model.surface_jacobian(trajectory), numeric, atol=1e-6)

    def test_surface_hessian_rows(self, model, rng):
        trajectory = 0.5 * rng.standard_normal(model.trajectory_size)
        hess = model.surface_hessian(trajectory)
        for t in range(model.params.horizon):
            numeric = finite_diff_jacobian(lambda tau: model.surface_jacobian(tau)[t], trajectory)
            assert_allclose(hess[t], numeric, atol=1e-5)

    def test_cylinder_group(self, model, params):
        group = model.cylinder_group(np.array([1.0, 1.0]))
        trajectory = np.zeros(model.trajectory_size)
        trajectory[:2] = [1.0, 1.0]
        values = group.function(trajectory)
        assert values[0] == pytest.approx(params.obstacle_radius**2)
        assert values[1] == pytest.approx(0.25 - 2.0)
        assert_allclose(group.jacobian(trajectory), finite_diff_jacobian(group.function, trajectory), atol=1e-6)

    def test_obstacle_group_requires_field(self, model):
        with pytest.raises(ProblemDefinitionError):
            model.obstacle_group()

    def test_bounds_planar_states_and_controls(self, model, params):
        bounds = model.bounds()
        assert_array_equal(bounds.state_min[:2], [-5.0, -5.0])
        assert np.all(np.isinf(bounds.state_min[2:]))
        assert_array_equal(bounds.control_min, [-4.0, -0.5, -0.5, -0.5])
        assert_array_equal(bounds.control_max, [0.0, 0.5, 0.5, 0.5])
        assert bounds.control_min[0] < params.hover_thrust < bounds.control_max[0]

    def test_control_prior(self, model, params):
        prior = model.control_prior()
        assert prior.mean[0] == pytest.approx(params.hover_thrust)
        assert_allclose(prior.sigma, np.sqrt(2.0 / np.array([0.5, 128.0, 128.0, 128.0])))
        assert not prior.include_in_posterior


class TestSampleStart:
    """Tests for sample_start."""

    def test_start_region_on_surface_at_rest(self, model, rng):
        state = sample_start(model, rng)
        assert np.all((state[:2] >= -4.5) & (state[:2] <= -3.0))
        assert state[2] == pytest.approx(model.surface.value(state[:2]))
        assert_array_equal(state[3:], 0.0)


class TestMakeQuadrotor:
    """Tests for make_quadrotor and QuadrotorEnv."""

    @pytest.mark.parametrize("variant,names", [("none", ()), ("static", ("obstacle",)), ("dynamic", ("obstacle",))])
    def test_variants(self, params, variant, names):
        problem, env = make_quadrotor(params, variant)
        assert problem.name == f"quadrotor-{variant}"
        assert tuple(g.name for g in problem.inequality) == names
        assert [g.name for g in problem.equality] == ["surface"]
        assert env.constraint_names == ("surface",) + names

    def test_unknown_variant(self, params):
        with pytest.raises(ProblemDefinitionError):
            make_quadrotor(params, "moving")

    def test_start_matches_env(self, params):
        problem, env = make_quadrotor(params, "none", seed=3)
        assert_array_equal(problem.initial_state, env.state)
        again, _ = make_quadrotor(params, "none", seed=3)
        assert_array_equal(problem.initial_state, again.initial_state)

    def test_likelihood_temperature_and_bounds_reach_problem(self, params):
        problem, env = make_quadrotor(params, "none")
        assert problem.likelihood_temperature == pytest.approx(0.05)
        assert_array_equal(problem.effective_bounds.control_max, env.model.bounds().control_max)

    def test_second_order_dynamics_flag(self):
        problem, _ = make_quadrotor(QuadrotorParams(horizon=2, second_order_dynamics=True))
        assert problem.dynamics_hessian is not None
        problem, _ = make_quadrotor(QuadrotorParams(horizon=2))
        assert problem.dynamics_hessian is None

    def test_env_step_uses_dynamics(self, params):
        _, env = make_quadrotor(params, "none")
        start = env.state
        control = np.array([params.hover_thrust, 0.1, 0.0, 0.0])
        new_state = env.step(control)
        assert_allclose(new_state, env.model.dynamics(start, control))
        assert env.distance_to_goal() == pytest.approx(np.linalg.norm(new_state[:2] - np.array(params.goal_xy)))

    def test_dynamic_obstacle_moves(self, params):
        problem, env = make_quadrotor(params, "dynamic")
        env.step(np.array([params.hover_thrust, 0.0, 0.0, 0.0]))
        expected = OBSTACLE_START + params.dt * params.obstacle_speed * OBSTACLE_DIRECTION
        assert_allclose(env.obstacle_center, expected)
        planning = env.planning_problem(problem)
        trajectory = np.zeros(problem.layout.trajectory_size)
        trajectory[:2] = expected
        assert planning.inequality[0].function(trajectory)[0] == pytest.approx(params.obstacle_radius**2)

    def test_static_obstacle_does_not_move(self, params):
        problem, env = make_quadrotor(params, "static")
        env.step(np.array([params.hover_thrust, 0.0, 0.0, 0.0]))
        assert_array_equal(env.obstacle_center, OBSTACLE_START)
        assert env.planning_problem(problem) is problem

    def test_collision_and_violations(self, params):
        _, env = make_quadrotor(params, "dynamic")
        state = np.zeros(STATE_DIM)
        state[:2] = OBSTACLE_START
        state[2] = env.model.surface.value(state[:2]) + 0.2
        assert env.in_collision(state)
        violations = env.constraint_violations(state)
        assert violations["surface"] == pytest.approx(0.2)
        assert violations["obstacle"] == pytest.approx(params.obstacle_radius**2)

    def test_no_collision_without_obstacles(self, params):
        _, env = make_quadrotor(params, "none")
        assert not env.in_collision(env.state)
        assert set(env.constraint_violations(env.state)) == {"surface"}

    def test_non_finite_state_raises(self, params):
        _, env = make_quadrotor(params, "none")
        with pytest.raises(EnvironmentStepError):
            env.step(np.array([np.nan, 0.0, 0.0, 0.0]))
