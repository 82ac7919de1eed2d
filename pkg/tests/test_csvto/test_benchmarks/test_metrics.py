"""
test_csvto.test_benchmarks.test_metrics
=======================================

Tests for csvto.benchmarks.metrics module.
"""

import numpy as np
import pytest

from csvto.benchmarks.metrics import TAIL_STEPS, RunMetrics, SolveMetrics, aggregate
from csvto.core.particles import AugmentedParticle, TrajectoryParticle
from csvto.solver.config import SolverConfig
from csvto.solver.csvto import solve
from csvto.solver.mpc import STATUS_FAILED, MpcTrace, TraceRow


def _trace(points, violations, collisions=None, status="completed"):
    collisions = collisions or [False] * len(points)
    rows = [
        TraceRow(
            step=i + 1,
            state=np.array(p, dtype=float),
            control=np.zeros(1),
            violations={"surface": v},
            wall_time_ms=2.0,
            collision=c,
        )
        for i, (p, v, c) in enumerate(zip(points, violations, collisions))
    ]
    return MpcTrace(initial_state=np.zeros(2), constraint_names=("surface",), rows=rows, status=status)


class TestRunMetrics:
    """Tests for RunMetrics."""

    def test_success_within_threshold(self):
        trace = _trace([[3.0, 3.0], [3.9, 4.1]], [0.1, 0.3])
        metrics = RunMetrics.from_trace(trace, (4.0, 4.0), "quadrotor-none", "csvto", 0)
        assert metrics.success
        assert metrics.final_distance == pytest.approx(np.sqrt(0.02))
        assert metrics.steps == 2
        assert metrics.violations["surface"] == {
            "mean": pytest.approx(0.2),
            "max": pytest.approx(0.3),
            "tail": pytest.approx(0.2),
        }
        assert metrics.total_wall_ms == 4.0

    def test_failure_outside_threshold(self):
        trace = _trace([[3.0, 3.0]], [0.0])
        metrics = RunMetrics.from_trace(trace, (4.0, 4.0), "quadrotor-none", "mppi", 1, threshold=0.5)
        assert not metrics.success

    def test_collision_and_status(self):
        trace = _trace([[0.0, 0.0], [1.0, 1.0]], [0.0, 0.0], collisions=[False, True], status=STATUS_FAILED)
        metrics = RunMetrics.from_trace(trace, (4.0, 4.0), "quadrotor-static", "csvto", 2)
        assert metrics.collision
        assert metrics.status == STATUS_FAILED

    def test_empty_trace(self):
        trace = MpcTrace(initial_state=np.zeros(2), constraint_names=("surface",), status=STATUS_FAILED)
        metrics = RunMetrics.from_trace(trace, (4.0, 4.0), "quadrotor-none", "csvto", 0)
        assert metrics.steps == 0
        assert metrics.violations["surface"] == {"mean": 0.0, "max": 0.0, "tail": 0.0}
        assert metrics.final_distance == pytest.approx(np.sqrt(32.0))

    def test_tail_covers_last_steps_only(self):
        values = [1.0] * 10 + [0.1] * TAIL_STEPS
        trace = _trace([[0.0, 0.0]] * len(values), values)
        metrics = RunMetrics.from_trace(trace, (4.0, 4.0), "quadrotor-none", "csvto", 0)
        assert metrics.violations["surface"]["tail"] == pytest.approx(0.1)
        assert metrics.violations["surface"]["mean"] == pytest.approx((10.0 + 0.1 * TAIL_STEPS) / len(values))
        summary = aggregate([metrics])
        assert summary["tail_violations"]["surface"] == pytest.approx(0.1)

    def test_to_dict(self):
        metrics = RunMetrics.from_trace(_trace([[4.0, 4.0]], [0.0]), (4.0, 4.0), "quadrotor-none", "csvto", 5)
        data = metrics.to_dict()
        assert data["seed"] == 5
        assert data["success"] is True
        assert set(data) >= {"problem", "solver", "status", "final_distance", "collision", "violations"}


class TestSolveMetrics:
    """Tests for SolveMetrics."""

    def test_from_result(self, plane_problem):
        particles = [
            AugmentedParticle(TrajectoryParticle(np.array([p]), np.zeros((1, 0))), np.zeros(0))
            for p in ([1.0, 0.0, 0.0], [1.0, 1.0, 1.0])
        ]
        result = solve(np.zeros(3), particles, 0, False, plane_problem, SolverConfig())
        metrics = SolveMetrics.from_result(result, plane_problem, 4, 1000.0)
        assert metrics.best_index == 0
        assert metrics.best_penalty == pytest.approx(0.5)
        assert metrics.max_equality_violation == pytest.approx(2.0)
        assert metrics.max_inequality_violation == 0.0
        assert metrics.costs == pytest.approx([0.5, 1.5])
        assert metrics.iterations == 0
        assert metrics.to_dict()["seed"] == 4

    def test_inequality_violation(self, halfplane_problem):
        particles = [AugmentedParticle(TrajectoryParticle(np.array([[0.5, 0.0]]), np.zeros((1, 0))), np.zeros(1))]
        result = solve(np.zeros(2), particles, 0, False, halfplane_problem, SolverConfig())
        metrics = SolveMetrics.from_result(result, halfplane_problem, 0, 1000.0)
        assert metrics.max_inequality_violation == pytest.approx(1.5)


class TestAggregate:
    """Tests for aggregate."""

    def test_rates_and_means(self):
        good = RunMetrics.from_trace(_trace([[4.0, 4.0]], [0.2]), (4.0, 4.0), "quadrotor-none", "csvto", 0)
        bad = RunMetrics.from_trace(
            _trace([[0.0, 0.0]], [0.4], collisions=[True]), (4.0, 4.0), "quadrotor-none", "csvto", 1
        )
        summary = aggregate([good, bad])
        assert summary["success_rate"] == 0.5
        assert summary["collision_rate"] == 0.5
        assert summary["violations"]["surface"] == pytest.approx(0.3)
        assert [t["seed"] for t in summary["trials"]] == [0, 1]

    def test_empty(self):
        summary = aggregate([])
        assert summary["trials"] == []
        assert summary["success_rate"] == 0.0
