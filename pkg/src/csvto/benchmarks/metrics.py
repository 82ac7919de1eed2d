"""
csvto.benchmarks.metrics
========================

Metrics of receding-horizon runs and single solves.

Violations are always re-evaluated on what was executed (or, for a solve,
on the final particles), never taken from the planner's own bookkeeping.

Classes
-------
RunMetrics
    Outcome of one receding-horizon trial.
SolveMetrics
    Outcome of one warm-start solve.

Functions
---------
aggregate
    Summary over several trials.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from csvto.core.problem import ProblemDef
from csvto.core.transcription import eval_constraints
from csvto.solver.csvto import SolveResult, penalty
from csvto.solver.mpc import MpcTrace

DEFAULT_GOAL_THRESHOLD = 0.3
TAIL_STEPS = 50


@dataclass(frozen=True)
class RunMetrics:
    """
    Outcome of one receding-horizon trial.

    Attributes
    ----------
    problem : str
        Problem name.
    solver : str
        ``"csvto"`` or ``"mppi"``.
    seed : int
        Trial seed.
    status : str
        Trace status.
    success : bool
        Final planar goal distance below the threshold.
    final_distance : float
        Planar distance of the last executed state to the goal.
    collision : bool
        Any executed state intersected an obstacle.
    steps : int
        Executed steps.
    violations : Dict[str, Dict[str, float]]
        ``mean``, ``max`` and ``tail`` (mean over the last `TAIL_STEPS`
        steps) executed violation per constraint name.
    total_wall_ms : float
        Sum of per-step wall times.
    """

    problem: str
    solver: str
    seed: int
    status: str
    success: bool
    final_distance: float
    collision: bool
    steps: int
    violations: Dict[str, Dict[str, float]] = field(default_factory=dict)
    total_wall_ms: float = 0.0

    @classmethod
    def from_trace(
        cls,
        trace: MpcTrace,
        goal_xy: Sequence[float],
        problem: str,
        solver: str,
        seed: int,
        threshold: float = DEFAULT_GOAL_THRESHOLD,
    ) -> "RunMetrics":
        """
        Compute metrics from an execution trace.

        Parameters
        ----------
        trace : MpcTrace
            Executed trace.
        goal_xy : Sequence[float]
            Planar goal position.
        problem, solver : str
            Names echoed in the metrics.
        seed : int
            Trial seed.
        threshold : float
            Goal distance counted as success.

        Returns
        -------
        RunMetrics
            The metrics.
        """
        distance = float(np.linalg.norm(trace.final_state[:2] - np.asarray(goal_xy, dtype=float)))
        violations = {}
        for name in trace.constraint_names:
            values = trace.violations(name)
            violations[name] = {
                "mean": float(values.mean()) if values.size else 0.0,
                "max": float(values.max()) if values.size else 0.0,
                "tail": float(values[-TAIL_STEPS:].mean()) if values.size else 0.0,
            }
        return cls(
            problem=problem,
            solver=solver,
            seed=seed,
            status=trace.status,
            success=distance < threshold,
            final_distance=distance,
            collision=trace.collision,
            steps=len(trace.rows),
            violations=violations,
            total_wall_ms=float(sum(row.wall_time_ms for row in trace.rows)),
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready representation."""
        return {
            "problem": self.problem,
            "solver": self.solver,
            "seed": self.seed,
            "status": self.status,
            "success": self.success,
            "final_distance": self.final_distance,
            "collision": self.collision,
            "steps": self.steps,
            "violations": self.violations,
            "total_wall_ms": self.total_wall_ms,
        }


@dataclass(frozen=True)
class SolveMetrics:
    """
    Outcome of one warm-start solve.

    Attributes
    ----------
    problem : str
        Problem name.
    seed : int
        Seed of the initial particles.
    iterations : int
        Iterations run.
    best_index : int
        Index of the selected particle.
    best_penalty : float
        Penalty of the selected particle.
    max_equality_violation : float
        Largest ``|h|`` (user equalities and dynamics defects) over all particles.
    max_inequality_violation : float
        Largest ``max(g, 0)`` over all particles.
    penalties : List[float]
        Penalty of every particle.
    costs : List[float]
        Cost of every particle.
    excluded : List[int]
        Particles with non-finite penalties.
    """

    problem: str
    seed: int
    iterations: int
    best_index: int
    best_penalty: float
    max_equality_violation: float
    max_inequality_violation: float
    penalties: List[float]
    costs: List[float]
    excluded: List[int] = field(default_factory=list)

    @classmethod
    def from_result(cls, result: SolveResult, problem: ProblemDef, seed: int, penalty_weight: float) -> "SolveMetrics":
        """
        Re-evaluate the final particles of a solve.

        Parameters
        ----------
        result : SolveResult
            Solve outcome.
        problem : ProblemDef
            Problem the particles were solved against (with its ``x_0``).
        seed : int
            Seed echoed in the metrics.
        penalty_weight : float
            ``lambda`` of the penalty.

        Returns
        -------
        SolveMetrics
            The metrics.
        """
        equality_rows = problem.num_equality + problem.num_defects
        max_eq, max_ineq, costs, penalties = 0.0, 0.0, [], []
        for particle in result.particles:
            bundle = eval_constraints(problem, particle)
            trajectory = particle.particle.to_vector()
            max_eq = max(max_eq, float(np.max(np.abs(bundle.values[:equality_rows]), initial=0.0)))
            for group in problem.inequality:
                max_ineq = max(max_ineq, float(np.max(np.maximum(group.function(trajectory), 0.0), initial=0.0)))
            costs.append(float(problem.cost(trajectory)))
            penalties.append(penalty(problem, particle, penalty_weight, bundle))
        return cls(
            problem=problem.name,
            seed=seed,
            iterations=result.iterations,
            best_index=result.best_index,
            best_penalty=float(result.penalties[result.best_index]),
            max_equality_violation=max_eq,
            max_inequality_violation=max_ineq,
            penalties=penalties,
            costs=costs,
            excluded=list(result.excluded),
        )

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready representation."""
        return {
            "problem": self.problem,
            "seed": self.seed,
            "iterations": self.iterations,
            "best_index": self.best_index,
            "best_penalty": self.best_penalty,
            "max_equality_violation": self.max_equality_violation,
            "max_inequality_violation": self.max_inequality_violation,
            "penalties": self.penalties,
            "costs": self.costs,
            "excluded": self.excluded,
        }


def aggregate(metrics: Sequence[RunMetrics]) -> Dict[str, Any]:
    """
    Summary over several trials.

    Parameters
    ----------
    metrics : Sequence[RunMetrics]
        Per-trial metrics.

    Returns
    -------
    Dict[str, Any]
        ``trials`` (per-seed rows), ``success_rate``, ``collision_rate``,
        ``mean_final_distance``, and the mean executed violation per constraint
        over whole runs (``violations``) and over their last steps
        (``tail_violations``).
    """
    if not metrics:
        return {
            "trials": [],
            "success_rate": 0.0,
            "collision_rate": 0.0,
            "mean_final_distance": 0.0,
            "violations": {},
            "tail_violations": {},
        }
    names = sorted({name for m in metrics for name in m.violations})
    return {
        "trials": [m.to_dict() for m in metrics],
        "success_rate": float(np.mean([m.success for m in metrics])),
        "collision_rate": float(np.mean([m.collision for m in metrics])),
        "mean_final_distance": float(np.mean([m.final_distance for m in metrics])),
        "violations": {
            name: float(np.mean([m.violations[name]["mean"] for m in metrics if name in m.violations]))
            for name in names
        },
        "tail_violations": {
            name: float(np.mean([m.violations[name]["tail"] for m in metrics if name in m.violations]))
            for name in names
        },
    }
