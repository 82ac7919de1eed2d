"""
csvto.benchmarks.gp
===================

Gaussian-process fields over the planar workspace.

A field is the noise-free GP posterior mean of an RBF-kernel GP conditioned
on observations. Values are drawn from the GP prior on a regular grid with a
fixed seed, so the surface and obstacle fields are reproducible. The
posterior mean, its gradient and its Hessian are analytic.

Classes
-------
GpField
    Noise-free GP posterior mean with analytic derivatives.

Functions
---------
rbf_gram
    RBF Gram matrix between two point sets.
workspace_grid
    Regular grid over a square workspace.
sample_gp_prior
    Draw grid values from a (conditioned) GP prior.
gp_posterior_mean
    Posterior mean and gradient at one query point.
make_surface
    Surface height field (zero mean).
make_obstacle_field
    Obstacle field (constant mean -0.5, obstacle-free start and goal corners).
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigh, solve
from scipy.spatial.distance import cdist

from csvto.core.errors import LinearAlgebraError, ProblemDefinitionError

logger = logging.getLogger(__name__)

JITTER = 1e-8
EIGEN_FLOOR = 1e-2
OBSTACLE_MEAN = -0.5
OBSTACLE_FREE_CORNERS = np.array([[-4.0, -4.0], [4.0, 4.0]])
OBSTACLE_FREE_VALUE = -2.0


def rbf_gram(a: np.ndarray, b: np.ndarray, lengthscale: float) -> np.ndarray:
    """
    RBF Gram matrix ``exp(-||a_i - b_j||^2 / (2 l^2))``.

    Parameters
    ----------
    a : np.ndarray
        Points, shape ``(p, d)``.
    b : np.ndarray
        Points, shape ``(q, d)``.
    lengthscale : float
        Positive lengthscale ``l``.

    Returns
    -------
    np.ndarray
        Gram matrix of shape ``(p, q)``.
    """
    return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * lengthscale**2))


def workspace_grid(extent: float = 5.0, count: int = 10) -> np.ndarray:
    """
    Regular ``count x count`` grid over ``[-extent, extent]^2``.

    Returns
    -------
    np.ndarray
        Grid points, shape ``(count**2, 2)``, x varying fastest.
    """
    axis = np.linspace(-extent, extent, count)
    xx, yy = np.meshgrid(axis, axis)
    return np.column_stack([xx.ravel(), yy.ravel()])


def sample_gp_prior(
    points: np.ndarray,
    lengthscale: float,
    rng: np.random.Generator,
    mean: float = 0.0,
    fixed_points: Optional[np.ndarray] = None,
    fixed_values: Optional[np.ndarray] = None,
    eigen_floor: float = EIGEN_FLOOR,
) -> np.ndarray:
    """
    Draw values at `points` from a GP prior, optionally conditioned on fixed values.

    The draw is ``m + sum_k sqrt(lambda_k) xi_k v_k`` over the eigenpairs of the
    (conditional) covariance with ``lambda_k >= eigen_floor``. Dropping the
    near-null modes keeps the resulting observations exactly representable by
    the posterior mean at jitter 1e-8.

    Parameters
    ----------
    points : np.ndarray
        Sample locations, shape ``(p, 2)``.
    lengthscale : float
        RBF lengthscale.
    rng : np.random.Generator
        Random generator.
    mean : float
        Constant prior mean.
    fixed_points, fixed_values : Optional[np.ndarray]
        Observations to condition on.
    eigen_floor : float
        Smallest eigenvalue kept in the expansion.

    Returns
    -------
    np.ndarray
        Sampled values, shape ``(p,)``.
    """
    gram = rbf_gram(points, points, lengthscale)
    center = np.full(points.shape[0], mean)
    if fixed_points is not None and len(fixed_points):
        cross = rbf_gram(points, fixed_points, lengthscale)
        fixed_gram = rbf_gram(fixed_points, fixed_points, lengthscale) + JITTER * np.eye(len(fixed_points))
        center = center + cross @ solve(fixed_gram, np.asarray(fixed_values, dtype=float) - mean, assume_a="pos")
        gram = gram - cross @ solve(fixed_gram, cross.T, assume_a="pos")
    gram = 0.5 * (gram + gram.T)
    eigvals, eigvecs = eigh(gram)
    keep = eigvals >= eigen_floor
    coefficients = np.sqrt(eigvals[keep]) * rng.standard_normal(int(keep.sum()))
    logger.debug("GP prior draw keeps %d of %d modes", int(keep.sum()), eigvals.size)
    return center + eigvecs[:, keep] @ coefficients


@dataclass(frozen=True)
class GpField:
    """
    Noise-free GP posterior mean with analytic derivatives.

    ``f(q) = m + k(q)^T alpha`` with ``alpha = (K + 1e-8 I)^{-1} (y - m)``.

    Attributes
    ----------
    points : np.ndarray
        Observation locations, shape ``(p, 2)``.
    values : np.ndarray
        Observed values, shape ``(p,)``.
    lengthscale : float
        RBF lengthscale.
    mean : float
        Constant mean function.

    Raises
    ------
    LinearAlgebraError
        If the kernel matrix is not positive definite after jitter.
    """

    points: np.ndarray
    values: np.ndarray
    lengthscale: float
    mean: float = 0.0
    alpha: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        values = np.asarray(self.values, dtype=float).ravel()
        if points.shape[0] != values.size:
            raise ProblemDefinitionError(
                "GP observations need one value per point",
                expected=(points.shape[0],),
                actual=values.shape,
            )
        if self.lengthscale <= 0:
            raise ProblemDefinitionError("GP lengthscale must be positive", lengthscale=self.lengthscale)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)
        if values.size == 0:
            object.__setattr__(self, "alpha", np.zeros(0))
            return
        gram = rbf_gram(points, points, self.lengthscale) + JITTER * np.eye(values.size)
        try:
            factor = cho_factor(gram, lower=True)
        except LinAlgError as e:
            raise LinearAlgebraError(
                "GP kernel matrix is singular after jitter",
                operation="cholesky",
                jitter=JITTER,
            ) from e
        object.__setattr__(self, "alpha", cho_solve(factor, values - self.mean))

    def _weights(self, query: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        diff = np.asarray(query, dtype=float)[None, :] - self.points
        k = np.exp(-np.sum(diff**2, axis=1) / (2.0 * self.lengthscale**2))
        return k, diff

    def value(self, query: np.ndarray) -> float:
        """Posterior mean at one point ``(2,)``."""
        k, _ = self._weights(query)
        return float(self.mean + k @ self.alpha)

    def gradient(self, query: np.ndarray) -> np.ndarray:
        """Gradient of the posterior mean, shape ``(2,)``."""
        k, diff = self._weights(query)
        return -(k * self.alpha) @ diff / self.lengthscale**2

    def hessian(self, query: np.ndarray) -> np.ndarray:
        """Hessian of the posterior mean, shape ``(2, 2)``."""
        k, diff = self._weights(query)
        scale = self.lengthscale**2
        weights = k * self.alpha
        outer = np.einsum("p,pi,pj->ij", weights, diff, diff) / scale**2
        return outer - weights.sum() * np.eye(2) / scale

    def evaluate(self, query: np.ndarray) -> Tuple[float, np.ndarray]:
        """Value and gradient at one point."""
        return self.value(query), self.gradient(query)


def gp_posterior_mean(
    points: np.ndarray,
    values: np.ndarray,
    lengthscale: float,
    query: np.ndarray,
    mean: float = 0.0,
) -> Tuple[float, np.ndarray]:
    """
    Noise-free GP posterior mean and its gradient at one query point.

    Parameters
    ----------
    points : np.ndarray
        Observation locations, shape ``(p, 2)``; may be empty.
    values : np.ndarray
        Observed values, shape ``(p,)``.
    lengthscale : float
        RBF lengthscale.
    query : np.ndarray
        Query point, shape ``(2,)``.
    mean : float
        Constant mean function.

    Returns
    -------
    Tuple[float, np.ndarray]
        Posterior mean and gradient.
    """
    return GpField(points, values, lengthscale, mean).evaluate(query)


def make_surface(lengthscale: float = 2.0, seed: int = 0, extent: float = 5.0, count: int = 10) -> GpField:
    """
    Surface height field: zero-mean GP prior draw on the workspace grid.

    Parameters
    ----------
    lengthscale : float
        RBF lengthscale.
    seed : int
        Seed of the prior draw.
    extent, count : float, int
        Grid extent and points per axis.

    Returns
    -------
    GpField
        The fitted surface.
    """
    grid = workspace_grid(extent, count)
    values = sample_gp_prior(grid, lengthscale, np.random.default_rng(seed))
    return GpField(grid, values, lengthscale)


def make_obstacle_field(lengthscale: float = 2.0, seed: int = 0, extent: float = 5.0, count: int = 10) -> GpField:
    """
    Obstacle field: the obstacle-free region is ``{f_obs <= 0}``.

    The prior has constant mean -0.5 and is conditioned on ``-2`` at the start
    and goal corners so that they stay free.

    Parameters
    ----------
    lengthscale : float
        RBF lengthscale.
    seed : int
        Seed of the prior draw (offset from the surface's).
    extent, count : float, int
        Grid extent and points per axis.

    Returns
    -------
    GpField
        The fitted obstacle field.
    """
    grid = workspace_grid(extent, count)
    fixed_values = np.full(len(OBSTACLE_FREE_CORNERS), OBSTACLE_FREE_VALUE)
    values = sample_gp_prior(
        grid,
        lengthscale,
        np.random.default_rng(seed + 1),
        mean=OBSTACLE_MEAN,
        fixed_points=OBSTACLE_FREE_CORNERS,
        fixed_values=fixed_values,
    )
    return GpField(
        np.vstack([grid, OBSTACLE_FREE_CORNERS]),
        np.concatenate([values, fixed_values]),
        lengthscale,
        mean=OBSTACLE_MEAN,
    )
