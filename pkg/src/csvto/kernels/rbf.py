"""
csvto.kernels.rbf
=================

Scalar RBF kernel ``k(a, b) = exp(-||a - b||^2 / h)`` and the median heuristic.

Classes
-------
KernelEval
    Kernel value together with its gradient w.r.t. the second argument.

Functions
---------
rbf
    RBF kernel value.
rbf_gradient
    Gradient of the RBF kernel w.r.t. its second argument.
evaluate_rbf
    Value and gradient in one call.
median_bandwidth
    Median-heuristic bandwidth of a point set.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist

from csvto.core.errors import KernelError

BANDWIDTH_FLOOR = 1e-8


@dataclass(frozen=True)
class KernelEval:
    """
    Kernel value together with its gradient w.r.t. the second argument.

    Attributes
    ----------
    value : Union[float, np.ndarray]
        Scalar for the RBF and trajectory kernels, ``(D, D)`` for the tangent kernel.
    grad_wrt_second_arg : np.ndarray
        Gradient w.r.t. the second argument.
    """

    value: Union[float, np.ndarray]
    grad_wrt_second_arg: np.ndarray


def _check_bandwidth(bandwidth: float) -> None:
    if not bandwidth > 0:
        raise KernelError("Kernel bandwidth must be positive", bandwidth=bandwidth)


def rbf(a: np.ndarray, b: np.ndarray, bandwidth: float) -> float:
    """
    RBF kernel value ``exp(-||a - b||^2 / bandwidth)``.

    Parameters
    ----------
    a, b : np.ndarray
        Points of equal shape.
    bandwidth : float
        Positive bandwidth ``h``.

    Returns
    -------
    float
        Kernel value in ``(0, 1]``.
    """
    _check_bandwidth(bandwidth)
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return float(np.exp(-np.dot(diff.ravel(), diff.ravel()) / bandwidth))


def rbf_gradient(a: np.ndarray, b: np.ndarray, bandwidth: float) -> np.ndarray:
    """
    Gradient of the RBF kernel w.r.t. ``b``, ``2 (a - b) / h * k(a, b)``.

    Parameters
    ----------
    a, b : np.ndarray
        Points of equal shape.
    bandwidth : float
        Positive bandwidth ``h``.

    Returns
    -------
    np.ndarray
        Gradient with the shape of ``b``.
    """
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return 2.0 * diff / bandwidth * rbf(a, b, bandwidth)


def evaluate_rbf(a: np.ndarray, b: np.ndarray, bandwidth: float) -> KernelEval:
    """Value and gradient w.r.t. ``b`` of the RBF kernel."""
    value = rbf(a, b, bandwidth)
    diff = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return KernelEval(value=value, grad_wrt_second_arg=2.0 * diff / bandwidth * value)


def median_bandwidth(points: np.ndarray) -> float:
    """
    Median-heuristic bandwidth ``median(||p_i - p_j||)^2 / log N``.

    The median runs over distinct pairs ``i < j``. A single point gives 1 and
    coincident points are floored to 1e-8.

    Parameters
    ----------
    points : np.ndarray
        Point set, shape ``(N, d)``.

    Returns
    -------
    float
        Positive bandwidth.
    """
    points = np.asarray(points, dtype=float)
    count = points.shape[0]
    if count < 2:
        return 1.0
    distances = pdist(points.reshape(count, -1))
    bandwidth = float(np.median(distances)) ** 2 / np.log(count)
    return max(bandwidth, BANDWIDTH_FLOOR)
