"""
csvto.geometry.slack
====================

Slack variables turning ``g(tau) <= 0`` into ``g(tau) + z^2 / 2 = 0``.

Functions
---------
init_slack
    Initial slack values ``z = sqrt(2 |g|)``.
"""

import numpy as np


def init_slack(g_values: np.ndarray) -> np.ndarray:
    """
    Initial slack values ``z_i = sqrt(2 |g_i|)``.

    Satisfied inequalities (``g_i <= 0``) become exactly feasible augmented
    equalities; violated ones are left for the feasibility step.

    Parameters
    ----------
    g_values : np.ndarray
        Inequality values ``g(tau)``.

    Returns
    -------
    np.ndarray
        Slack vector of the same length.
    """
    return np.sqrt(2.0 * np.abs(np.asarray(g_values, dtype=float).ravel()))

