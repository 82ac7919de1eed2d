"""
csvto.kernels
=============

Stein kernels: scalar RBF with median-heuristic bandwidth, the sliding-window
trajectory kernel and the matrix-valued tangent-space kernel.

Modules
-------
rbf
    Scalar RBF kernel and bandwidth heuristic.
trajectory
    Sliding-window trajectory kernel.
tangent
    Tangent-space matrix kernel and its divergence.
"""

from csvto.kernels.rbf import KernelEval, evaluate_rbf, median_bandwidth, rbf, rbf_gradient
from csvto.kernels.tangent import tangent_kernel, tangent_kernel_gradient
from csvto.kernels.trajectory import TrajectoryKernel, trajectory_kernel, window_indices

__all__ = [
    "KernelEval",
    "TrajectoryKernel",
    "evaluate_rbf",
    "median_bandwidth",
    "rbf",
    "rbf_gradient",
    "tangent_kernel",
    "tangent_kernel_gradient",
    "trajectory_kernel",
    "window_indices",
]
