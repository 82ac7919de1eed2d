"""
csvto.core.problem
==================

Problem definition for constrained trajectory optimization.

A problem bundles the dynamics, a non-negative cost with its gradient, named
groups of equality and inequality constraints with derivative providers, box
bounds on states and controls, an optional Gaussian control prior and the
initial state. All providers act on the flat trajectory vector described by
`csvto.core.particles.DecisionLayout` (states first, then controls).

Classes
-------
ConstraintGroup
    Named block of scalar constraints with derivative providers.
Bounds
    Box bounds on states and controls.
ControlPrior
    Gaussian prior on each control row.
ProblemDef
    Full trajectory optimization problem.
ConstraintBundle
    Stacked constraint values, Jacobian and per-row Hessians.

Functions
---------
posterior_gradient
    Gradient of the log-posterior over the trajectory vector.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from csvto.core.errors import ProblemDefinitionError
from csvto.core.particles import DecisionLayout

ArrayFn = Callable[[np.ndarray], np.ndarray]
Dynamics = Callable[[np.ndarray, np.ndarray], np.ndarray]
DynamicsJacobian = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]

SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class ConstraintGroup:
    """
    Named block of scalar constraints with derivative providers.

    Attributes
    ----------
    name : str
        Group name, used in traces and error messages.
    dim : int
        Number of scalar rows produced by `function`.
    function : Callable[[np.ndarray], np.ndarray]
        Maps the trajectory vector ``(n,)`` to values ``(dim,)``.
    jacobian : Callable[[np.ndarray], np.ndarray]
        Maps the trajectory vector to the Jacobian ``(dim, n)``.
    hessian : Optional[Callable[[np.ndarray], np.ndarray]]
        Maps the trajectory vector to per-row Hessians ``(dim, n, n)``. None
        means second-order terms of this group are omitted.
    """

    name: str
    dim: int
    function: ArrayFn
    jacobian: ArrayFn
    hessian: Optional[ArrayFn] = None

    def __post_init__(self) -> None:
        if self.dim < 0:
            raise ProblemDefinitionError("Constraint dimension must be non-negative", group=self.name)

    @property
    def has_hessian(self) -> bool:
        """Whether the group provides analytic Hessians."""
        return self.hessian is not None


@dataclass(frozen=True)
class Bounds:
    """
    Box bounds on states and controls.

    Infinite entries denote unbounded components.

    Attributes
    ----------
    state_min, state_max : np.ndarray
        Per-component state bounds, shape ``(d_x,)``.
    control_min, control_max : np.ndarray
        Per-component control bounds, shape ``(d_u,)``.
    """

    state_min: np.ndarray
    state_max: np.ndarray
    control_min: np.ndarray
    control_max: np.ndarray

    def __post_init__(self) -> None:
        for name in ("state_min", "state_max", "control_min", "control_max"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        if self.state_min.shape != self.state_max.shape or self.control_min.shape != self.control_max.shape:
            raise ProblemDefinitionError("Lower and upper bounds must have equal shapes")
        if np.any(self.state_min > self.state_max) or np.any(self.control_min > self.control_max):
            raise ProblemDefinitionError("Bounds must satisfy min <= max componentwise")

    @classmethod
    def unbounded(cls, state_dim: int, control_dim: int) -> "Bounds":
        """Bounds with every component unbounded."""
        return cls(
            np.full(state_dim, -np.inf),
            np.full(state_dim, np.inf),
            np.full(control_dim, -np.inf),
            np.full(control_dim, np.inf),
        )

    def lower(self, layout: DecisionLayout) -> np.ndarray:
        """Lower bound for every entry of the trajectory vector."""
        return np.concatenate([np.tile(self.state_min, layout.horizon), np.tile(self.control_min, layout.horizon)])

    def upper(self, layout: DecisionLayout) -> np.ndarray:
        """Upper bound for every entry of the trajectory vector."""
        return np.concatenate([np.tile(self.state_max, layout.horizon), np.tile(self.control_max, layout.horizon)])


@dataclass(frozen=True)
class ControlPrior:
    """
    Gaussian prior on each control row, ``u_t ~ N(mean, diag(sigma^2))``.

    Attributes
    ----------
    mean : np.ndarray
        Prior mean, shape ``(d_u,)``.
    sigma : np.ndarray
        Prior standard deviation, shape ``(d_u,)``; every entry positive.
    include_in_posterior : bool
        Whether the prior's log-density gradient enters the posterior gradient.
        Problems whose cost already contains the equivalent quadratic control
        term leave this off.
    """

    mean: np.ndarray
    sigma: np.ndarray
    include_in_posterior: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float).ravel())
        object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float).ravel())
        if self.mean.shape != self.sigma.shape:
            raise ProblemDefinitionError(
                "Prior mean and sigma must have equal shapes",
                expected=self.mean.shape,
                actual=self.sigma.shape,
            )
        if not np.all(np.isfinite(self.sigma)) or np.any(self.sigma <= 0):
            raise ProblemDefinitionError("Prior sigma must be positive and finite", sigma=self.sigma.tolist())

    def log_density_gradient(self, controls: np.ndarray) -> np.ndarray:
        """
        Gradient of the log-density w.r.t. the controls, ``-(u - mean) / sigma^2``.

        Parameters
        ----------
        controls : np.ndarray
            Control rows, shape ``(T, d_u)``.

        Returns
        -------
        np.ndarray
            Gradient of the same shape.
        """
        return -(controls - self.mean) / self.sigma**2

    def sample(self, horizon: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        """
        Draw one control sequence from the prior.

        Parameters
        ----------
        horizon : int
            Number of control rows.
        rng : np.random.Generator
            Random generator.
        scale : float
            Multiplier on the prior standard deviation.

        Returns
        -------
        np.ndarray
            Controls of shape ``(horizon, d_u)``.
        """
        noise = rng.standard_normal((horizon, self.mean.size))
        return self.mean + scale * self.sigma * noise


@dataclass(frozen=True)
class ProblemDef:
    """
    Full trajectory optimization problem under direct transcription.

    Attributes
    ----------
    name : str
        Problem name.
    state_dim : int
        State dimension ``d_x``.
    control_dim : int
        Control dimension ``d_u``.
    horizon : int
        Number of timesteps ``T``.
    initial_state : np.ndarray
        ``x_0``, shape ``(d_x,)``.
    cost : Callable[[np.ndarray], float]
        Non-negative cost of the trajectory vector.
    cost_gradient : Callable[[np.ndarray], np.ndarray]
        Gradient of `cost`, shape ``(n,)``.
    dynamics : Optional[Callable]
        ``f(x, u) -> x'``. None for problems without dynamics, which then
        contribute no defect rows.
    dynamics_jacobian : Optional[Callable]
        ``(x, u) -> (df/dx, df/du)``. Required when `dynamics` is set.
    dynamics_hessian : Optional[Callable]
        ``(x, u) -> (d_x, d_x + d_u, d_x + d_u)`` second derivatives of each
        output component w.r.t. ``[x, u]``. None omits them.
    equality : Tuple[ConstraintGroup, ...]
        Equality groups ``h(tau) = 0``.
    inequality : Tuple[ConstraintGroup, ...]
        Inequality groups ``g(tau) <= 0``.
    bounds : Optional[Bounds]
        Box bounds. None means unbounded.
    control_prior : Optional[ControlPrior]
        Gaussian control prior.
    likelihood_temperature : float
        ``gamma_lik``, scaling of the cost in the likelihood ``exp(-gamma C)``.
    """

    name: str
    state_dim: int
    control_dim: int
    horizon: int
    initial_state: np.ndarray
    cost: Callable[[np.ndarray], float]
    cost_gradient: ArrayFn
    dynamics: Optional[Dynamics] = None
    dynamics_jacobian: Optional[DynamicsJacobian] = None
    dynamics_hessian: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    equality: Tuple[ConstraintGroup, ...] = ()
    inequality: Tuple[ConstraintGroup, ...] = ()
    bounds: Optional[Bounds] = None
    control_prior: Optional[ControlPrior] = None
    likelihood_temperature: float = 1.0

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ProblemDefinitionError("Horizon must be positive", horizon=self.horizon)
        x0 = np.asarray(self.initial_state, dtype=float).ravel()
        if x0.shape != (self.state_dim,):
            raise ProblemDefinitionError(
                "Initial state does not match state dimension",
                expected=(self.state_dim,),
                actual=x0.shape,
            )
        object.__setattr__(self, "initial_state", x0)
        object.__setattr__(self, "equality", tuple(self.equality))
        object.__setattr__(self, "inequality", tuple(self.inequality))
        if self.dynamics is not None and self.dynamics_jacobian is None:
            raise ProblemDefinitionError("Dynamics require a Jacobian provider", problem=self.name)
        if self.likelihood_temperature <= 0:
            raise ProblemDefinitionError(
                "Likelihood temperature must be positive",
                likelihood_temperature=self.likelihood_temperature,
            )
        if self.bounds is not None and (
            self.bounds.state_min.size != self.state_dim or self.bounds.control_min.size != self.control_dim
        ):
            raise ProblemDefinitionError("Bounds do not match problem dimensions", problem=self.name)
        if self.control_prior is not None and self.control_prior.mean.size != self.control_dim:
            raise ProblemDefinitionError(
                "Control prior does not match control dimension",
                expected=(self.control_dim,),
                actual=self.control_prior.mean.shape,
            )

    @property
    def num_equality(self) -> int:
        """Number of scalar user equality rows (excluding dynamics defects)."""
        return sum(group.dim for group in self.equality)

    @property
    def num_defects(self) -> int:
        """Number of dynamics defect rows, ``T * d_x`` when dynamics are present."""
        return self.horizon * self.state_dim if self.dynamics is not None else 0

    @property
    def num_inequality(self) -> int:
        """Number of scalar inequality rows (= number of slack variables)."""
        return sum(group.dim for group in self.inequality)

    @property
    def num_constraints(self) -> int:
        """Total number of rows of the augmented equality system."""
        return self.num_equality + self.num_defects + self.num_inequality

    @property
    def layout(self) -> DecisionLayout:
        """Layout of the augmented decision vector."""
        return DecisionLayout(self.horizon, self.state_dim, self.control_dim, self.num_inequality)

    @property
    def effective_bounds(self) -> Bounds:
        """Bounds of the problem, unbounded when none are set."""
        return self.bounds if self.bounds is not None else Bounds.unbounded(self.state_dim, self.control_dim)

    def with_initial_state(self, initial_state: np.ndarray) -> "ProblemDef":
        """Copy of the problem with a new ``x_0``."""
        return replace(self, initial_state=np.asarray(initial_state, dtype=float))

    def with_inequality(self, groups: Sequence[ConstraintGroup]) -> "ProblemDef":
        """Copy of the problem with replaced inequality groups."""
        return replace(self, inequality=tuple(groups))


@dataclass(frozen=True)
class ConstraintBundle:
    """
    Stacked constraint values, Jacobian and per-row Hessians.

    Rows are ordered as user equalities, dynamics defects, then augmented
    inequalities ``g + z^2 / 2``. Columns are the augmented decision vector.

    Attributes
    ----------
    values : np.ndarray
        Stacked values, shape ``(M,)``.
    jacobian : np.ndarray
        Jacobian, shape ``(M, D)``.
    hessians : Tuple[Optional[np.ndarray], ...]
        One ``(D, D)`` Hessian per row, or None where second-order terms are
        omitted.
    groups : Tuple[Tuple[str, int, int], ...]
        ``(name, start, stop)`` row ranges of every constraint group.
    """

    values: np.ndarray
    jacobian: np.ndarray
    hessians: Tuple[Optional[np.ndarray], ...] = ()
    groups: Tuple[Tuple[str, int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        rows = self.values.shape[0]
        if self.jacobian.ndim != 2 or self.jacobian.shape[0] != rows:
            raise ProblemDefinitionError(
                "Jacobian row count must equal the number of constraint values",
                expected=(rows,),
                actual=self.jacobian.shape,
            )
        if self.hessians and len(self.hessians) != rows:
            raise ProblemDefinitionError(
                "One Hessian entry is required per constraint row",
                expected=(rows,),
                actual=(len(self.hessians),),
            )
        for row, hessian in enumerate(self.hessians):
            if hessian is not None and np.max(np.abs(hessian - hessian.T), initial=0.0) > SYMMETRY_TOL:
                raise ProblemDefinitionError("Constraint Hessian is not symmetric", row=row)

    @property
    def hessian_available(self) -> np.ndarray:
        """Boolean flag per row telling whether a Hessian is present."""
        if not self.hessians:
            return np.zeros(self.values.shape[0], dtype=bool)
        return np.array([h is not None for h in self.hessians], dtype=bool)

    def group_values(self, name: str) -> np.ndarray:
        """
        Values of one named group.

        Parameters
        ----------
        name : str
            Group name.

        Returns
        -------
        np.ndarray
            The rows of that group.

        Raises
        ------
        KeyError
            If no group has that name.
        """
        for group_name, start, stop in self.groups:
            if group_name == name:
                return self.values[start:stop]
        raise KeyError(name)


def posterior_gradient(problem: ProblemDef, trajectory: np.ndarray) -> np.ndarray:
    """
    Gradient of the log-posterior over the trajectory vector.

    ``grad log p(tau | o=1) = -gamma_lik grad C(tau) + grad log p(U)``; the
    dynamics factor is handled by the defect constraints instead.

    Parameters
    ----------
    problem : ProblemDef
        The problem.
    trajectory : np.ndarray
        Flat trajectory vector ``(n,)``.

    Returns
    -------
    np.ndarray
        Gradient of shape ``(n,)``.
    """
    grad = -problem.likelihood_temperature * np.asarray(problem.cost_gradient(trajectory), dtype=float)
    prior = problem.control_prior
    if prior is not None and prior.include_in_posterior and problem.control_dim:
        layout = problem.layout
        _, controls, _ = layout.split(trajectory)
        grad = grad.copy()
        grad[layout.controls_slice] += prior.log_density_gradient(controls).ravel()
    return grad
