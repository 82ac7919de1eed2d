"""
test_csvto.test_solver.test_csvto
=================================

Tests for csvto.solver.csvto module.
"""

from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from csvto.benchmarks.toy2d import Toy2DProblem
from csvto.core.errors import NonFiniteError, ProblemDefinitionError
from csvto.core.particles import AugmentedParticle, TrajectoryParticle
from csvto.core.problem import Bounds
from csvto.core.transcription import eval_constraints, sample_initial_particles
from csvto.solver.config import SolverConfig
from csvto.solver.csvto import (
    csvto_step,
    initialize_slack,
    penalty,
    project_bounds,
    resample,
    shift,
    softmin_weights,
    solve,
    stein_direction,
)


def _point(coords, slack=()):
    coords = np.asarray(coords, dtype=float)
    return AugmentedParticle(TrajectoryParticle(coords[None, :], np.zeros((1, 0))), np.asarray(slack, dtype=float))


def _on_circle(degrees):
    angle = np.deg2rad(degrees)
    return _point([2.0 * np.cos(angle), 2.0 * np.sin(angle)])


def _plane_violation(particle):
    return abs(float(particle.particle.states.sum()) - 1.0)


class TestPenalty:
    """Tests for penalty."""

    def test_cost_plus_weighted_violation(self, plane_problem):
        value = penalty(plane_problem, _point([1.0, 1.0, 1.0]), 1000.0)
        assert value == pytest.approx(1.5 + 1000.0 * 2.0)

    def test_feasible_point_is_cost(self, plane_problem):
        value = penalty(plane_problem, _point([1.0, 0.0, 0.0]), 1000.0)
        assert value == pytest.approx(0.5)

    def test_non_finite_cost_gives_inf(self, plane_problem):
        problem = replace(plane_problem, cost=lambda tau: float("nan"))
        assert penalty(problem, _point([1.0, 0.0, 0.0]), 1000.0) == float("inf")


class TestInitializeSlack:
    """Tests for initialize_slack."""

    def test_satisfied_inequality(self, halfplane_problem):
        (particle,) = initialize_slack(halfplane_problem, [_point([-3.0, 0.0])])
        assert_allclose(particle.slack, [2.0])

    def test_replaces_slack_of_any_length(self, halfplane_problem):
        (particle,) = initialize_slack(halfplane_problem, [_point([-1.5, 0.0], slack=[9.0, 9.0])])
        assert particle.slack.shape == (1,)
        bundle = eval_constraints(halfplane_problem, particle)
        assert_allclose(bundle.values, 0.0, atol=1e-12)

    def test_no_inequalities(self, plane_problem):
        (particle,) = initialize_slack(plane_problem, [_point([0.0, 0.0, 1.0])])
        assert particle.slack.size == 0


class TestSteinDirection:
    """Tests for stein_direction."""

    def test_tangent_to_linear_constraint(self, plane_problem, rng):
        particles = [_point(rng.standard_normal(3)) for _ in range(5)]
        directions = stein_direction(particles, plane_problem, 1.0)
        for phi in directions:
            assert abs(np.sum(phi)) < 1e-8

    def test_tangent_to_curved_constraints(self, toy_problem, rng):
        particles = initialize_slack(toy_problem, [_point(2.0 * rng.standard_normal(2)) for _ in range(6)])
        directions = stein_direction(particles, toy_problem, 0.5)
        for particle, phi in zip(particles, directions):
            jacobian = eval_constraints(toy_problem, particle).jacobian
            assert_allclose(jacobian @ phi, 0.0, atol=1e-8)

    def test_single_particle_is_projected_gradient(self, plane_problem):
        (phi,) = stein_direction([_point([1.0, 2.0, 3.0])], plane_problem, 1.0)
        # -P x with P the projector onto x + y + z = 0
        assert_allclose(phi, [1.0, 0.0, -1.0], atol=1e-12)

    def test_unconstrained_single_particle_is_gradient(self, plane_problem):
        problem = replace(plane_problem, equality=())
        (phi,) = stein_direction([_point([1.0, -2.0, 0.5])], problem, 1.0)
        assert_allclose(phi, [-1.0, 2.0, -0.5], atol=1e-12)

    def test_gamma_scales_drive(self, plane_problem):
        (full,) = stein_direction([_point([1.0, 2.0, 3.0])], plane_problem, 1.0)
        (half,) = stein_direction([_point([1.0, 2.0, 3.0])], plane_problem, 0.5)
        assert_allclose(half, 0.5 * full, atol=1e-12)

    def test_empty_set_raises(self, plane_problem):
        with pytest.raises(ProblemDefinitionError):
            stein_direction([], plane_problem, 1.0)

    def test_non_finite_direction_raises(self, plane_problem):
        problem = replace(plane_problem, cost_gradient=lambda tau: np.full(3, np.nan))
        with pytest.raises(NonFiniteError) as exc_info:
            stein_direction([_point([1.0, 0.0, 0.0])], problem, 1.0)
        assert exc_info.value.index == 0


class TestCsvtoStep:
    """Tests for csvto_step."""

    def test_linear_constraint_satisfied_in_one_step(self, plane_problem, rng):
        particles = [_point(3.0 * rng.standard_normal(3)) for _ in range(4)]
        updated = csvto_step(particles, plane_problem, SolverConfig(step_size_constraint=1.0))
        for particle in updated:
            assert _plane_violation(particle) < 1e-10

    def test_controls_clamped_to_bounds(self, bounded_integrator_problem, rng):
        particles = sample_initial_particles(bounded_integrator_problem, 3, rng, scale=5.0)
        updated = csvto_step(particles, bounded_integrator_problem, SolverConfig())
        for particle in updated:
            controls = particle.particle.controls
            assert np.all(controls <= 0.5)
            assert np.all(controls >= -0.5)

    def test_preserves_particle_count_and_layout(self, toy_problem, rng):
        particles = initialize_slack(toy_problem, [_point(rng.standard_normal(2)) for _ in range(3)])
        updated = csvto_step(particles, toy_problem, SolverConfig())
        assert len(updated) == 3
        assert all(p.to_vector().shape == (toy_problem.layout.size,) for p in updated)


class TestProjectBounds:
    """Tests for project_bounds."""

    @pytest.fixture
    def bounds(self):
        return Bounds(np.full(1, -np.inf), np.full(1, np.inf), np.full(1, -2.0), np.full(1, 2.0))

    def test_clamps_controls(self, bounds):
        particle = AugmentedParticle(TrajectoryParticle(np.zeros((2, 1)), np.array([[5.0], [-1.0]])), np.array([7.0]))
        clamped = project_bounds(particle, bounds)
        assert_array_equal(clamped.particle.controls, [[2.0], [-1.0]])
        assert_array_equal(clamped.slack, [7.0])

    def test_idempotent(self, bounds):
        particle = AugmentedParticle(TrajectoryParticle(np.zeros((2, 1)), np.array([[5.0], [-3.0]])), np.zeros(0))
        once = project_bounds(particle, bounds)
        twice = project_bounds(once, bounds)
        assert_array_equal(once.to_vector(), twice.to_vector())


class TestSolve:
    """Tests for solve."""

    def test_zero_iterations_selects_best_initial(self, plane_problem):
        particles = [_point([1.0, 0.0, 0.0]), _point([1 / 3, 1 / 3, 1 / 3]), _point([2.0, -1.0, 0.0])]
        result = solve(np.zeros(3), particles, 0, False, plane_problem, SolverConfig())
        assert result.best_index == 1
        assert result.iterations == 0
        for before, after in zip(particles, result.particles):
            assert_array_equal(before.particle.to_vector(), after.particle.to_vector())

    def test_ties_go_to_lowest_index(self, plane_problem):
        particles = [_point([2.0, -1.0, 0.0]), _point([1.0, 0.0, 0.0]), _point([1.0, 0.0, 0.0])]
        result = solve(np.zeros(3), particles, 0, False, plane_problem, SolverConfig())
        assert result.best_index == 1

    def test_plane_posterior(self, plane_problem, rng):
        particles = [_point(rng.standard_normal(3)) for _ in range(8)]
        result = solve(np.zeros(3), particles, 200, False, plane_problem, SolverConfig())
        states = np.array([p.particle.states[0] for p in result.particles])
        assert np.max(np.abs(states.sum(axis=1) - 1.0)) < 1e-8
        assert_allclose(states.mean(axis=0), np.full(3, 1 / 3), atol=0.5)
        assert result.best_trajectory.states.shape == (1, 3)

    def test_inequality_becomes_feasible(self, halfplane_problem, rng):
        particles = [_point(rng.standard_normal(2)) for _ in range(6)]
        result = solve(np.zeros(2), particles, 100, False, halfplane_problem, SolverConfig())
        for particle in result.particles:
            assert particle.particle.states[0, 0] + 1.0 < 0.05

    def test_diagnostics_follow_schedule(self, plane_problem, rng):
        particles = [_point(rng.standard_normal(3)) for _ in range(3)]
        result = solve(np.zeros(3), particles, 4, True, plane_problem, SolverConfig())
        assert [d.iteration for d in result.diagnostics] == [1, 2, 3, 4]
        assert_allclose([d.gamma for d in result.diagnostics], [0.25, 0.5, 0.75, 1.0])

    def test_without_annealing_gamma_is_one(self, plane_problem, rng):
        particles = [_point(rng.standard_normal(3)) for _ in range(3)]
        result = solve(np.zeros(3), particles, 3, False, plane_problem, SolverConfig())
        assert all(d.gamma == 1.0 for d in result.diagnostics)

    def test_early_stop_on_tolerance(self, plane_problem):
        particles = [_point([1 / 3, 1 / 3, 1 / 3])]
        result = solve(np.zeros(3), particles, 50, False, plane_problem, SolverConfig(tol=1e-6))
        assert result.iterations < 50

    def test_deterministic(self, toy_problem):
        cfg = SolverConfig(num_particles=6)
        first = solve(
            np.zeros(2), sample_initial_particles(toy_problem, 6, np.random.default_rng(1)), 20, True, toy_problem, cfg
        )
        second = solve(
            np.zeros(2), sample_initial_particles(toy_problem, 6, np.random.default_rng(1)), 20, True, toy_problem, cfg
        )
        for a, b in zip(first.particles, second.particles):
            assert_array_equal(a.to_vector(), b.to_vector())
        assert_array_equal(first.penalties, second.penalties)

    def test_toy_particles_feasible_and_multimodal(self, toy_problem):
        """Particles end feasible in both allowed modes; none survive resampling near the excluded one.

        A particle belongs to the mode whose mean is closest to it in angle.
        """
        cfg = SolverConfig(num_particles=20)
        particles = sample_initial_particles(toy_problem, 20, np.random.default_rng(0))
        result = solve(np.zeros(2), particles, 500, True, toy_problem, cfg)
        toy = Toy2DProblem()
        modes = set()
        for particle in result.particles:
            bundle = eval_constraints(toy_problem, particle)
            assert np.max(np.abs(bundle.values)) < 1e-2
            point = particle.particle.states[0]
            assert toy.exclusion(point)[0] <= 1e-3
            modes.add(toy.nearest_mode(point))
        assert {0, 1} <= modes

        outcome = resample(list(result.particles), toy_problem, 0.1, 0.01, np.random.default_rng(0))
        children = [toy.nearest_mode(child.particle.states[0]) for child in outcome.particles]
        assert len(children) == 20
        assert children.count(toy.excluded_mode) == 0

    def test_stationary_particle_is_feasible(self, toy_problem):
        cfg = SolverConfig(tol=1e-9)
        result = solve(np.zeros(2), [_on_circle(80)], 1000, False, toy_problem, cfg)
        assert result.iterations < 1000
        assert result.diagnostics[-1].step_norm < 1e-8
        bundle = eval_constraints(toy_problem, result.particles[0])
        assert np.max(np.abs(bundle.values)) < 1e-6

    def test_empty_particles_raise(self, plane_problem):
        with pytest.raises(ProblemDefinitionError):
            solve(np.zeros(3), [], 5, False, plane_problem, SolverConfig())

    def test_negative_iterations_raise(self, plane_problem):
        with pytest.raises(ProblemDefinitionError):
            solve(np.zeros(3), [_point([1.0, 0.0, 0.0])], -1, False, plane_problem, SolverConfig())


class TestShift:
    """Tests for shift."""

    def test_drops_first_and_duplicates_last(self):
        states = np.array([[1.0], [2.0], [3.0]])
        controls = np.array([[10.0], [20.0], [30.0]])
        (shifted,) = shift([AugmentedParticle(TrajectoryParticle(states, controls), np.array([0.5]))])
        assert_array_equal(shifted.particle.states, [[2.0], [3.0], [3.0]])
        assert_array_equal(shifted.particle.controls, [[20.0], [30.0], [30.0]])
        assert_array_equal(shifted.slack, [0.5])

    def test_repeated_shift_saturates(self):
        states = np.array([[1.0], [2.0], [3.0]])
        particles = [AugmentedParticle(TrajectoryParticle(states, np.zeros((3, 1))), np.zeros(0))]
        for _ in range(3):
            particles = shift(particles)
        assert_array_equal(particles[0].particle.states, [[3.0], [3.0], [3.0]])

    def test_horizon_one_raises(self):
        with pytest.raises(ProblemDefinitionError):
            shift([_point([1.0, 2.0])])


class TestSoftminWeights:
    """Tests for softmin_weights."""

    def test_equal_penalties_are_uniform(self):
        weights, fallback = softmin_weights(np.full(4, 3.0), 0.55)
        assert_allclose(weights, 0.25)
        assert not fallback

    def test_low_temperature_concentrates(self):
        weights, _ = softmin_weights(np.array([1.0, 2.0, 3.0]), 1e-3)
        assert weights[0] == pytest.approx(1.0)

    def test_large_penalties_do_not_underflow(self):
        weights, fallback = softmin_weights(np.array([1e6, 1e6 + 1.0]), 1.0)
        assert not fallback
        assert weights.sum() == pytest.approx(1.0)
        assert weights[0] > weights[1]

    def test_non_finite_entries_get_zero_weight(self):
        weights, fallback = softmin_weights(np.array([1.0, np.inf, np.nan]), 1.0)
        assert_allclose(weights, [1.0, 0.0, 0.0])
        assert not fallback

    def test_all_non_finite_falls_back_to_uniform(self):
        weights, fallback = softmin_weights(np.array([np.inf, np.nan]), 1.0)
        assert_allclose(weights, 0.5)
        assert fallback


class TestResample:
    """Tests for resample."""

    def test_linear_constraint_unchanged(self, plane_problem):
        particles = [_point([1.0, 0.0, 0.0]), _point([0.0, 0.5, 0.5]), _point([-1.0, 1.0, 1.0])]
        result = resample(particles, plane_problem, 0.55, 0.5, np.random.default_rng(3))
        assert len(result.particles) == 3
        for child in result.particles:
            assert _plane_violation(child) < 1e-10

    def test_zero_sigma_copies_parents(self, plane_problem):
        particles = [_point([1.0, 0.0, 0.0]), _point([0.0, 0.5, 0.5])]
        result = resample(particles, plane_problem, 0.55, 0.0, np.random.default_rng(3))
        for child, parent in zip(result.particles, result.indices):
            assert_array_equal(child.to_vector(), particles[parent].to_vector())

    def test_dominant_particle_selected(self, plane_problem):
        particles = [_point([5.0, -2.0, -2.0]), _point([1 / 3, 1 / 3, 1 / 3])]
        result = resample(particles, plane_problem, 0.01, 0.0, np.random.default_rng(0))
        assert_array_equal(result.indices, [1, 1])
        assert result.weights[1] == pytest.approx(1.0)

    def test_quadratic_constraint_change_scales_with_sigma_squared(self, toy_problem):
        particles = initialize_slack(toy_problem, [_on_circle(90.0), _on_circle(210.0)] * 4)

        def mean_change(sigma):
            result = resample(particles, toy_problem, 0.55, sigma, np.random.default_rng(11))
            changes = [
                np.sum(np.abs(eval_constraints(toy_problem, child).values))
                - np.sum(np.abs(eval_constraints(toy_problem, particles[parent]).values))
                for child, parent in zip(result.particles, result.indices)
            ]
            return float(np.mean(changes))

        assert mean_change(0.02) >= 3.0 * mean_change(0.01)

    def test_non_positive_temperature_raises(self, plane_problem):
        with pytest.raises(ProblemDefinitionError):
            resample([_point([1.0, 0.0, 0.0])], plane_problem, 0.0, 0.1, np.random.default_rng(0))
