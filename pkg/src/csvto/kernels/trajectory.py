"""
csvto.kernels.trajectory
========================

Sliding-window trajectory kernel.

Each trajectory is decomposed into overlapping windows
``[x_{s..s+W}, u_{s..s+W}]`` (0-indexed rows, ``s = 0..T-W-1``) and the kernel
is the mean RBF value over windows, each window with its own median-heuristic
bandwidth computed over the whole particle set.

Classes
-------
TrajectoryKernel
    Batched kernel matrix and gradients over a particle set.

Functions
---------
window_indices
    Flat-vector indices of every window.
trajectory_kernel
    Kernel value between two trajectory particles.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from csvto.core.errors import KernelError
from csvto.core.particles import DecisionLayout, TrajectoryParticle
from csvto.kernels.rbf import KernelEval, median_bandwidth

logger = logging.getLogger(__name__)


def window_indices(layout: DecisionLayout, window: int) -> List[np.ndarray]:
    """
    Flat-vector indices of every window.

    Parameters
    ----------
    layout : DecisionLayout
        Layout of the trajectory vector.
    window : int
        Window length ``W``; each window spans ``W + 1`` rows.

    Returns
    -------
    List[np.ndarray]
        ``T - W`` index arrays of length ``(W + 1) (d_x + d_u)``.

    Raises
    ------
    KernelError
        If ``W < 1`` or ``W >= T``.
    """
    T = layout.horizon
    if window < 1 or window >= T:
        raise KernelError("Window length must satisfy 1 <= W < T", window=window, horizon=T)
    windows = []
    for start in range(T - window):
        rows = range(start, start + window + 1)
        states = [layout.state_index(t, i) for t in rows for i in range(layout.state_dim)]
        controls = [layout.control_index(t, i) for t in rows for i in range(layout.control_dim)]
        windows.append(np.array(states + controls, dtype=int))
    return windows


def trajectory_kernel(
    ti: TrajectoryParticle,
    tj: TrajectoryParticle,
    window: int,
    population: Optional[Sequence[TrajectoryParticle]] = None,
) -> KernelEval:
    """
    Kernel value between two trajectory particles.

    ``K(ti, tj) = 1 / (T - W) * sum_s exp(-||ti^s - tj^s||^2 / h_s)``.

    Parameters
    ----------
    ti, tj : TrajectoryParticle
        The two trajectories.
    window : int
        Window length ``W < T``.
    population : Optional[Sequence[TrajectoryParticle]]
        Particle set the per-window bandwidths are computed over. Defaults to
        ``(ti, tj)``.

    Returns
    -------
    KernelEval
        Scalar value and gradient w.r.t. the flat vector of ``tj``.
    """
    population = list(population) if population is not None else [ti, tj]
    layout = ti.layout
    vec_i, vec_j = ti.to_vector(), tj.to_vector()
    stacked = np.stack([p.to_vector() for p in population])
    windows = window_indices(layout, window)
    value = 0.0
    grad = np.zeros_like(vec_j)
    for idx in windows:
        bandwidth = median_bandwidth(stacked[:, idx])
        diff = vec_i[idx] - vec_j[idx]
        k = float(np.exp(-np.dot(diff, diff) / bandwidth))
        value += k
        grad[idx] += 2.0 * diff / bandwidth * k
    scale = 1.0 / len(windows)
    return KernelEval(value=value * scale, grad_wrt_second_arg=grad * scale)


class TrajectoryKernel:
    """
    Batched kernel matrix and gradients over a particle set.

    Bandwidths are recomputed on every call from the particles passed in.

    Parameters
    ----------
    layout : DecisionLayout
        Layout of the trajectory vectors.
    window : Optional[int]
        Window length. None, or a value ``>= T``, uses one RBF on the whole
        trajectory vector.

    Attributes
    ----------
    windows : List[np.ndarray]
        Index arrays of the windows.
    last_bandwidths : List[float]
        Bandwidths used by the most recent call.
    """

    def __init__(self, layout: DecisionLayout, window: Optional[int] = None) -> None:
        self.layout = layout
        if window is None or window >= layout.horizon:
            self.windows = [np.arange(layout.trajectory_size)]
        else:
            self.windows = window_indices(layout, window)
        self.last_bandwidths: List[float] = []

    def __call__(self, trajectories: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Kernel matrix and gradients w.r.t. the second argument.

        Parameters
        ----------
        trajectories : np.ndarray
            Trajectory vectors, shape ``(N, n)``.

        Returns
        -------
        Tuple[np.ndarray, np.ndarray]
            ``K`` of shape ``(N, N)`` and ``grad`` of shape ``(N, N, n)`` with
            ``grad[i, j] = d K(tau_i, tau_j) / d tau_j``.
        """
        trajectories = np.asarray(trajectories, dtype=float)
        count, size = trajectories.shape
        kernel = np.zeros((count, count))
        grad = np.zeros((count, count, size))
        self.last_bandwidths = []
        for idx in self.windows:
            points = trajectories[:, idx]
            bandwidth = median_bandwidth(points)
            self.last_bandwidths.append(bandwidth)
            diff = points[:, None, :] - points[None, :, :]
            k = np.exp(-np.einsum("ijd,ijd->ij", diff, diff) / bandwidth)
            kernel += k
            grad[:, :, idx] += 2.0 / bandwidth * diff * k[:, :, None]
        scale = 1.0 / len(self.windows)
        logger.debug("Kernel bandwidths: %s", self.last_bandwidths)
        return kernel * scale, grad * scale
