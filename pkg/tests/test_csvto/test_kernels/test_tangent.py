"""
test_csvto.test_kernels.test_tangent
====================================

Tests for csvto.kernels.tangent module.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from csvto.core.errors import KernelError
from csvto.geometry.projection import projection_divergence, projection_matrix
from csvto.kernels.rbf import KernelEval, evaluate_rbf, rbf
from csvto.kernels.tangent import tangent_kernel, tangent_kernel_gradient


def _quadratic_constraints(rng, size, rows):
    """Jacobian field and Hessians of ``c_r(t) = t^T A_r t / 2 + b_r^T t``."""
    hessians = []
    for _ in range(rows):
        a = rng.standard_normal((size, size))
        hessians.append(0.5 * (a + a.T))
    offsets = rng.standard_normal((rows, size))

    def jacobian(point):
        return np.array([h @ point + b for h, b in zip(hessians, offsets)])

    return jacobian, hessians


def _assembled_kernel(t_i, t_j, p_i, jacobian, bandwidth):
    return rbf(t_i, t_j, bandwidth) * p_i @ projection_matrix(jacobian(t_j)).projection


class TestTangentKernel:
    """Tests for tangent_kernel and tangent_kernel_gradient."""

    def test_value(self, rng):
        p_i = projection_matrix(rng.standard_normal((1, 3))).projection
        p_j = projection_matrix(rng.standard_normal((1, 3))).projection
        assert_allclose(tangent_kernel(0.5, p_i, p_j), 0.5 * p_i @ p_j)

    def test_identity_projectors_reduce_to_scalar_kernel(self):
        assert_allclose(tangent_kernel(0.3, np.eye(2), np.eye(2)), 0.3 * np.eye(2))

    def test_gradient_matches_finite_differences(self, rng):
        """Divergence w.r.t. ``tj`` of ``k(ti, tj) P_i P(tj)`` under curved constraints."""
        size, rows, bandwidth, step = 4, 2, 2.0, 1e-5
        for _ in range(20):
            jacobian, hessians = _quadratic_constraints(rng, size, rows)
            t_j = rng.standard_normal(size)
            t_i = t_j + 0.5 * rng.standard_normal(size)
            p_i = projection_matrix(jacobian(t_i)).projection
            data_j = projection_matrix(jacobian(t_j))
            analytic = tangent_kernel_gradient(
                evaluate_rbf(t_i, t_j, bandwidth),
                p_i,
                data_j.projection,
                projection_divergence(data_j, hessians),
            )
            numeric = np.zeros(size)
            for m in range(size):
                shift = np.zeros(size)
                shift[m] = step
                forward = _assembled_kernel(t_i, t_j + shift, p_i, jacobian, bandwidth)
                backward = _assembled_kernel(t_i, t_j - shift, p_i, jacobian, bandwidth)
                numeric += (forward[:, m] - backward[:, m]) / (2.0 * step)
            assert np.linalg.norm(analytic - numeric) < 1e-4 * np.linalg.norm(numeric)

    def test_gradient_pads_slack_entries(self):
        scalar = KernelEval(value=1.0, grad_wrt_second_arg=np.array([1.0, 2.0]))
        result = tangent_kernel_gradient(scalar, np.eye(3), np.eye(3), np.zeros(3))
        assert_allclose(result, [1.0, 2.0, 0.0])

    def test_non_square_projector(self):
        with pytest.raises(KernelError):
            tangent_kernel(1.0, np.eye(3), np.ones((3, 2)))

    def test_divergence_size_checked(self):
        scalar = KernelEval(value=1.0, grad_wrt_second_arg=np.zeros(2))
        with pytest.raises(KernelError):
            tangent_kernel_gradient(scalar, np.eye(2), np.eye(2), np.zeros(3))
