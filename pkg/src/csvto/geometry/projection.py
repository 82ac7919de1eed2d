"""
csvto.geometry.projection
=========================

Linear algebra of the constraint manifold.

For a constraint Jacobian ``J`` (``M x D``) the tangent-space projector is
``P = I - J^T G J`` with ``G = (J J^T)^+`` computed by a truncated SVD. The
same ``G`` yields the Gauss-Newton feasibility step ``-J^T G h``. Second-order
information enters through the derivative of ``P`` w.r.t. the decision vector,
available either as the full ``D x D x D`` tensor or directly as its
divergence, which is all the Stein update needs.

Classes
-------
ProjectionData
    Projector, Gram pseudo-inverse and the Jacobian they were built from.

Functions
---------
gram_pinv
    Pseudo-inverse of ``J J^T`` by truncated SVD.
projection_matrix
    Tangent-space projector of a Jacobian.
feasibility_step
    Gauss-Newton step reducing ``||h||``.
projection_derivative
    Derivative of the projector w.r.t. every decision coordinate.
projection_divergence
    Row-wise divergence of the projector field.
divergence_of
    Divergence from a full projector-derivative tensor.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from csvto.core.errors import LinearAlgebraError, ProblemDefinitionError

DEFAULT_SVD_CUTOFF = 1e-6

HessianList = Optional[Sequence[Optional[np.ndarray]]]


@dataclass(frozen=True)
class ProjectionData:
    """
    Projector, Gram pseudo-inverse and the Jacobian they were built from.

    Attributes
    ----------
    projection : np.ndarray
        ``P``, shape ``(D, D)``; symmetric and idempotent.
    gram_pinv : np.ndarray
        ``(J J^T)^+``, shape ``(M, M)``.
    jacobian : np.ndarray
        ``J``, shape ``(M, D)``.
    retained_rank : int
        Number of singular values of ``J J^T`` kept by the truncation.
    """

    projection: np.ndarray
    gram_pinv: np.ndarray
    jacobian: np.ndarray
    retained_rank: int

    @property
    def weighted_jacobian(self) -> np.ndarray:
        """``G J``, shape ``(M, D)``."""
        return self.gram_pinv @ self.jacobian


def gram_pinv(jacobian: np.ndarray, cutoff: float = DEFAULT_SVD_CUTOFF) -> Tuple[np.ndarray, int]:
    """
    Pseudo-inverse of ``J J^T`` by truncated SVD.

    Singular values of ``J J^T`` below `cutoff` are discarded.

    Parameters
    ----------
    jacobian : np.ndarray
        ``J``, shape ``(M, D)``.
    cutoff : float
        Absolute singular-value threshold.

    Returns
    -------
    Tuple[np.ndarray, int]
        ``(G, retained_rank)`` with ``G`` of shape ``(M, M)``.

    Raises
    ------
    LinearAlgebraError
        If the SVD fails (e.g. non-finite input).
    """
    jacobian = np.asarray(jacobian, dtype=float)
    rows = jacobian.shape[0]
    if rows == 0:
        return np.zeros((0, 0)), 0
    gram = jacobian @ jacobian.T
    try:
        u, s, vt = linalg.svd(gram)
    except (linalg.LinAlgError, ValueError) as exc:
        raise LinearAlgebraError("SVD of the Gram matrix failed", operation="svd", rows=rows) from exc
    keep = s >= cutoff
    inverse = (vt[keep].T / s[keep]) @ u[:, keep].T
    return 0.5 * (inverse + inverse.T), int(np.count_nonzero(keep))


def projection_matrix(jacobian: np.ndarray, cutoff: float = DEFAULT_SVD_CUTOFF) -> ProjectionData:
    """
    Tangent-space projector ``P = I - J^T (J J^T)^+ J``.

    Parameters
    ----------
    jacobian : np.ndarray
        ``J``, shape ``(M, D)``.
    cutoff : float
        Singular-value threshold passed to `gram_pinv`.

    Returns
    -------
    ProjectionData
        The projector and the quantities it was built from.
    """
    jacobian = np.asarray(jacobian, dtype=float)
    size = jacobian.shape[1]
    gram, rank = gram_pinv(jacobian, cutoff)
    projection = np.eye(size) - jacobian.T @ gram @ jacobian
    projection = 0.5 * (projection + projection.T)
    return ProjectionData(projection=projection, gram_pinv=gram, jacobian=jacobian, retained_rank=rank)


def feasibility_step(
    jacobian: np.ndarray,
    values: np.ndarray,
    cutoff: float = DEFAULT_SVD_CUTOFF,
    gram: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Gauss-Newton step ``delta = -J^T (J J^T)^+ h``.

    Adding ``delta`` to the decision vector decreases ``||h||`` to first
    order; for linear constraints with full row rank it solves them exactly.

    Parameters
    ----------
    jacobian : np.ndarray
        ``J``, shape ``(M, D)``.
    values : np.ndarray
        ``h``, shape ``(M,)``.
    cutoff : float
        Singular-value threshold, used when `gram` is not supplied.
    gram : Optional[np.ndarray]
        Precomputed ``(J J^T)^+``.

    Returns
    -------
    np.ndarray
        Step of shape ``(D,)``.
    """
    jacobian = np.asarray(jacobian, dtype=float)
    values = np.asarray(values, dtype=float).ravel()
    if values.shape[0] != jacobian.shape[0]:
        raise ProblemDefinitionError(
            "Constraint values do not match Jacobian rows",
            expected=(jacobian.shape[0],),
            actual=values.shape,
        )
    if gram is None:
        gram, _ = gram_pinv(jacobian, cutoff)
    return -jacobian.T @ (gram @ values)


def _stack_hessians(hessians: HessianList, rows: int, size: int) -> np.ndarray:
    stacked = np.zeros((rows, size, size))
    if hessians is None:
        return stacked
    if len(hessians) != rows:
        raise ProblemDefinitionError(
            "One Hessian entry is required per Jacobian row",
            expected=(rows,),
            actual=(len(hessians),),
        )
    for r, hessian in enumerate(hessians):
        if hessian is None:
            continue
        hessian = np.asarray(hessian, dtype=float)
        if hessian.shape != (size, size):
            raise ProblemDefinitionError(
                "Hessian does not match Jacobian columns",
                expected=(size, size),
                actual=hessian.shape,
                row=r,
            )
        stacked[r] = hessian
    return stacked


def projection_derivative(
    jacobian: np.ndarray,
    hessians: HessianList = None,
    cutoff: float = DEFAULT_SVD_CUTOFF,
) -> np.ndarray:
    """
    Derivative of the projector w.r.t. every decision coordinate.

    With ``W = G J`` and ``dJ_k[r, j] = H_r[j, k]``::

        dP/dtau_k = -(dJ_k^T W + W^T dJ_k) + W^T (dJ_k J^T + J dJ_k^T) W

    Rows whose Hessian is None are treated as having a zero Hessian.

    Parameters
    ----------
    jacobian : np.ndarray
        ``J``, shape ``(M, D)``.
    hessians : Optional[Sequence[Optional[np.ndarray]]]
        One ``(D, D)`` Hessian per row or None; None for all-zero.
    cutoff : float
        Singular-value threshold passed to `gram_pinv`.

    Returns
    -------
    np.ndarray
        Tensor of shape ``(D, D, D)`` whose ``[k]`` slice is ``dP/dtau_k``.
    """
    jacobian = np.asarray(jacobian, dtype=float)
    rows, size = jacobian.shape
    stacked = _stack_hessians(hessians, rows, size)
    gram, _ = gram_pinv(jacobian, cutoff)
    weighted = gram @ jacobian
    d_jac = stacked.transpose(2, 0, 1)  # [k, r, j] = H_r[j, k]
    first = np.einsum("krn,rm->knm", d_jac, weighted)
    d_gram = np.einsum("krj,sj->krs", d_jac, jacobian)
    d_gram = d_gram + d_gram.transpose(0, 2, 1)
    second = np.einsum("rn,krs,sm->knm", weighted, d_gram, weighted)
    return -(first + first.transpose(0, 2, 1)) + second


def projection_divergence(projection: ProjectionData, hessians: HessianList = None) -> np.ndarray:
    """
    Row-wise divergence of the projector field, ``div(P)_n = sum_m dP[n, m]/dtau_m``.

    Computed without forming the ``D x D x D`` derivative tensor. Rows whose
    Hessian is None contribute no second-order terms.

    Parameters
    ----------
    projection : ProjectionData
        Output of `projection_matrix` at the current point.
    hessians : Optional[Sequence[Optional[np.ndarray]]]
        One ``(D, D)`` Hessian per Jacobian row or None.

    Returns
    -------
    np.ndarray
        Divergence of shape ``(D,)``.
    """
    jacobian = projection.jacobian
    rows, size = jacobian.shape
    if hessians is None or rows == 0:
        return np.zeros(size)
    if len(hessians) != rows:
        raise ProblemDefinitionError(
            "One Hessian entry is required per Jacobian row",
            expected=(rows,),
            actual=(len(hessians),),
        )
    weighted = projection.weighted_jacobian
    normal = jacobian.T @ weighted  # J^T G J
    curvature = np.zeros(size)
    traces = np.zeros(rows)
    inner = np.zeros(rows)
    for r, hessian in enumerate(hessians):
        if hessian is None:
            continue
        curvature += hessian @ weighted[r]
        traces[r] = np.trace(hessian)
        inner[r] = np.sum(hessian * normal)
    inner += jacobian @ curvature
    return -curvature - weighted.T @ traces + weighted.T @ inner


def divergence_of(derivative: np.ndarray) -> np.ndarray:
    """
    Divergence from a full projector-derivative tensor.

    Parameters
    ----------
    derivative : np.ndarray
        Output of `projection_derivative`, shape ``(D, D, D)``.

    Returns
    -------
    np.ndarray
        ``sum_m derivative[m][n, m]`` for every ``n``.
    """
    return np.einsum("mnm->n", derivative)
