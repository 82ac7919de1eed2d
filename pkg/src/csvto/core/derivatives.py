"""
csvto.core.derivatives
======================

Central finite-difference derivatives.

Used as oracles for the analytic providers and, when enabled, as a fallback
for constraint groups that do not supply Hessians.

Functions
---------
finite_diff_jacobian
    Central-difference Jacobian of a vector function.
finite_diff_hessian
    Central-difference Hessians of each row of a vector function, from its Jacobian.
"""

from typing import Callable

import numpy as np

from csvto.core.errors import NonFiniteError

VectorFn = Callable[[np.ndarray], np.ndarray]


def finite_diff_jacobian(fn: VectorFn, point: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """
    Central-difference Jacobian of a vector function.

    Column ``j`` is ``(fn(point + step e_j) - fn(point - step e_j)) / (2 step)``.

    Parameters
    ----------
    fn : Callable[[np.ndarray], np.ndarray]
        Function mapping an ``(n,)`` vector to an ``(m,)`` vector (scalars are
        treated as ``m = 1``).
    point : np.ndarray
        Evaluation point, shape ``(n,)``.
    step : float
        Positive difference step.

    Returns
    -------
    np.ndarray
        Jacobian of shape ``(m, n)``.

    Raises
    ------
    ValueError
        If `step` is not positive.
    NonFiniteError
        If any evaluation is NaN or infinite (``index`` is the column).
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    point = np.asarray(point, dtype=float)
    columns = []
    for j in range(point.size):
        offset = np.zeros_like(point)
        offset[j] = step
        forward = np.atleast_1d(np.asarray(fn(point + offset), dtype=float))
        backward = np.atleast_1d(np.asarray(fn(point - offset), dtype=float))
        if not (np.all(np.isfinite(forward)) and np.all(np.isfinite(backward))):
            raise NonFiniteError(
                "Non-finite evaluation in finite differences",
                location="finite_diff_jacobian",
                index=j,
            )
        columns.append((forward - backward) / (2.0 * step))
    if not columns:
        rows = np.atleast_1d(np.asarray(fn(point), dtype=float)).size
        return np.zeros((rows, 0))
    return np.stack(columns, axis=1)


def finite_diff_hessian(jacobian: VectorFn, point: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """
    Central-difference Hessians of each row of a vector function, from its Jacobian.

    Parameters
    ----------
    jacobian : Callable[[np.ndarray], np.ndarray]
        Analytic Jacobian provider returning ``(m, n)``.
    point : np.ndarray
        Evaluation point, shape ``(n,)``.
    step : float
        Positive difference step.

    Returns
    -------
    np.ndarray
        Symmetrised Hessians of shape ``(m, n, n)``.
    """
    point = np.asarray(point, dtype=float)
    m = np.atleast_2d(jacobian(point)).shape[0]
    n = point.size
    # d(J[r, j]) / d(point_k) stacked as (m * n, n), then reshaped per row
    flat = finite_diff_jacobian(lambda p: np.atleast_2d(jacobian(p)).ravel(), point, step)
    hessians = flat.reshape(m, n, n)
    return 0.5 * (hessians + hessians.transpose(0, 2, 1))
