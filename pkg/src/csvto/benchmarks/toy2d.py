"""
csvto.benchmarks.toy2d
======================

Constrained sampling from a 2D Gaussian mixture.

The "trajectory" is a single 2D point without dynamics. The posterior is an
equal-weight mixture of three isotropic Gaussians whose means lie on a
circle; particles must stay on that circle (equality) and outside a disk
centred on one of the means (inequality). The excluded mean is a local
optimum that unconstrained particles would be drawn to.

Classes
-------
Toy2DProblem
    Geometry of the toy problem.

Functions
---------
make_toy2d
    Build the toy `ProblemDef`.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from csvto.core.errors import ProblemDefinitionError
from csvto.core.problem import ConstraintGroup, ProblemDef


@dataclass(frozen=True)
class Toy2DProblem:
    """
    Geometry of the toy problem.

    Attributes
    ----------
    radius : float
        Circle radius ``r`` of ``h(x) = ||x||^2 - r^2``.
    mode_angles : Tuple[float, ...]
        Angles (degrees) of the mixture means on the circle.
    variance : float
        Shared isotropic variance of the mixture components.
    excluded_radius : float
        Radius of the excluded disk.
    excluded_mode : int
        Index of the mean at which the excluded disk is centred.
    initial_scale : float
        Standard deviation of the initial particles around the origin.
    """

    radius: float = 2.0
    mode_angles: Tuple[float, ...] = (90.0, 210.0, 330.0)
    variance: float = 0.25
    excluded_radius: float = 0.8
    excluded_mode: int = 2
    initial_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.radius <= 0 or self.variance <= 0 or self.excluded_radius <= 0:
            raise ProblemDefinitionError("Toy radii and variance must be positive")
        if not 0 <= self.excluded_mode < len(self.mode_angles):
            raise ProblemDefinitionError("Excluded mode index out of range", excluded_mode=self.excluded_mode)
        inside = np.linalg.norm(self.means - self.excluded_center, axis=1) < self.excluded_radius
        if int(inside.sum()) != 1:
            raise ProblemDefinitionError(
                "Exactly one mixture mean must lie in the excluded region",
                expected=1,
                actual=int(inside.sum()),
            )

    @property
    def means(self) -> np.ndarray:
        """Mixture means, shape ``(K, 2)``."""
        angles = np.deg2rad(np.asarray(self.mode_angles, dtype=float))
        return self.radius * np.column_stack([np.cos(angles), np.sin(angles)])

    @property
    def excluded_center(self) -> np.ndarray:
        """Centre of the excluded disk."""
        angle = np.deg2rad(self.mode_angles[self.excluded_mode])
        return self.radius * np.array([np.cos(angle), np.sin(angle)])

    def _scaled_sq_dist(self, x: np.ndarray) -> np.ndarray:
        return -np.sum((x - self.means) ** 2, axis=1) / (2.0 * self.variance)

    def cost(self, x: np.ndarray) -> float:
        """Negative log mixture density, shifted to be non-negative."""
        logits = self._scaled_sq_dist(np.asarray(x, dtype=float))
        return float(-logsumexp(logits) + np.log(len(self.mode_angles)))

    def cost_gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of `cost`."""
        x = np.asarray(x, dtype=float)
        weights = softmax(self._scaled_sq_dist(x))
        return weights @ (x - self.means) / self.variance

    def circle(self, x: np.ndarray) -> np.ndarray:
        """``h(x) = ||x||^2 - r^2``."""
        return np.array([x @ x - self.radius**2])

    def circle_jacobian(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(x, dtype=float)[None, :]

    def circle_hessian(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * np.eye(2)[None, :, :]

    def exclusion(self, x: np.ndarray) -> np.ndarray:
        """``g(x) = r_excl^2 - ||x - c||^2``, violated inside the disk."""
        diff = np.asarray(x, dtype=float) - self.excluded_center
        return np.array([self.excluded_radius**2 - diff @ diff])

    def exclusion_jacobian(self, x: np.ndarray) -> np.ndarray:
        return -2.0 * (np.asarray(x, dtype=float) - self.excluded_center)[None, :]

    def exclusion_hessian(self, x: np.ndarray) -> np.ndarray:
        return -2.0 * np.eye(2)[None, :, :]

    def nearest_mode(self, x: np.ndarray) -> int:
        """Index of the mixture mean closest in angle to `x`."""
        angle = np.arctan2(x[1], x[0])
        mode_angles = np.deg2rad(np.asarray(self.mode_angles, dtype=float))
        gaps = np.abs(np.angle(np.exp(1j * (mode_angles - angle))))
        return int(np.argmin(gaps))


def make_toy2d(params: Toy2DProblem | None = None) -> ProblemDef:
    """
    Build the toy `ProblemDef`.

    Horizon 1, two state coordinates, no controls and no dynamics. Both
    constraints supply analytic Hessians.

    Parameters
    ----------
    params : Toy2DProblem or None
        Geometry; defaults to `Toy2DProblem()`.

    Returns
    -------
    ProblemDef
        The toy problem, with ``x_0`` at the origin.
    """
    params = params or Toy2DProblem()
    return ProblemDef(
        name="toy2d",
        state_dim=2,
        control_dim=0,
        horizon=1,
        initial_state=np.zeros(2),
        cost=params.cost,
        cost_gradient=params.cost_gradient,
        equality=(
            ConstraintGroup("circle", 1, params.circle, params.circle_jacobian, params.circle_hessian),
        ),
        inequality=(
            ConstraintGroup(
                "exclusion", 1, params.exclusion, params.exclusion_jacobian, params.exclusion_hessian
            ),
        ),
    )
