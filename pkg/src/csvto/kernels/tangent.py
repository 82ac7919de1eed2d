"""
csvto.kernels.tangent
=====================

Matrix-valued tangent-space kernel ``K_perp(ti, tj) = k(ti, tj) P_i P_j``.

The scalar kernel only sees the trajectory part of the augmented vectors,
while the projectors act on the full augmented space, slack included.

Functions
---------
tangent_kernel
    Matrix kernel value.
tangent_kernel_gradient
    Divergence of the matrix kernel w.r.t. its second argument.
"""

import numpy as np

from csvto.core.errors import KernelError
from csvto.kernels.rbf import KernelEval


def _check_square(*matrices: np.ndarray) -> int:
    size = matrices[0].shape[0]
    for matrix in matrices:
        if matrix.shape != (size, size):
            raise KernelError(
                "Projection matrices must be square and of equal size",
                expected=(size, size),
                actual=matrix.shape,
            )
    return size


def tangent_kernel(k_scalar: float, p_i: np.ndarray, p_j: np.ndarray) -> np.ndarray:
    """
    Matrix kernel value ``k P_i P_j``.

    Parameters
    ----------
    k_scalar : float
        Scalar kernel value ``k(ti, tj)``.
    p_i, p_j : np.ndarray
        Projectors at the two particles, shape ``(D, D)``.

    Returns
    -------
    np.ndarray
        Matrix of shape ``(D, D)``.
    """
    _check_square(p_i, p_j)
    return k_scalar * (p_i @ p_j)


def tangent_kernel_gradient(
    scalar: KernelEval,
    p_i: np.ndarray,
    p_j: np.ndarray,
    div_p_j: np.ndarray,
) -> np.ndarray:
    """
    Divergence of the matrix kernel w.r.t. its second argument.

    Entry ``l`` is ``sum_m d[K_perp]_{l,m} / d[tj]_m``, which expands to
    ``P_i P_j grad k + k P_i div(P_j)``.

    Parameters
    ----------
    scalar : KernelEval
        Scalar kernel value and its gradient w.r.t. ``tj``. The gradient may
        cover only the trajectory part; missing slack entries are zero.
    p_i, p_j : np.ndarray
        Projectors at the two particles, shape ``(D, D)``.
    div_p_j : np.ndarray
        Divergence of the projector field at ``tj`` (see
        `csvto.geometry.projection.projection_divergence`), shape ``(D,)``.

    Returns
    -------
    np.ndarray
        Vector of shape ``(D,)``.
    """
    size = _check_square(p_i, p_j)
    grad = np.zeros(size)
    grad_k = np.asarray(scalar.grad_wrt_second_arg, dtype=float).ravel()
    if grad_k.size > size or div_p_j.shape != (size,):
        raise KernelError(
            "Kernel gradient or divergence does not match projector size",
            expected=(size,),
            actual=(grad_k.size, div_p_j.size),
        )
    grad[: grad_k.size] = grad_k
    return p_i @ (p_j @ grad + float(scalar.value) * div_p_j)
