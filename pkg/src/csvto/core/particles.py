"""
csvto.core.particles
====================

Decision-variable containers for direct transcription.

A trajectory particle holds the state rows ``x_1..x_T`` and the control rows
``u_0..u_{T-1}`` of one candidate trajectory. Its flat decision vector is the
row-major states followed by the row-major controls; an augmented particle
appends one slack entry per scalar inequality constraint.

Classes
-------
DecisionLayout
    Sizes and index helpers of the flat (augmented) decision vector.
TrajectoryParticle
    A candidate trajectory with states and controls as decision variables.
AugmentedParticle
    A trajectory particle together with its slack vector.

Functions
---------
stack_vectors
    Stack the augmented decision vectors of a particle list into an array.
"""

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from csvto.core.errors import NonFiniteError, ProblemDefinitionError


@dataclass(frozen=True)
class DecisionLayout:
    """
    Sizes and index helpers of the flat (augmented) decision vector.

    Attributes
    ----------
    horizon : int
        Number of timesteps ``T``.
    state_dim : int
        State dimension ``d_x``.
    control_dim : int
        Control dimension ``d_u``.
    num_slack : int
        Number of slack entries (scalar inequality rows).
    """

    horizon: int
    state_dim: int
    control_dim: int
    num_slack: int = 0

    def __post_init__(self) -> None:
        if self.horizon < 0 or self.state_dim < 0 or self.control_dim < 0 or self.num_slack < 0:
            raise ProblemDefinitionError(
                "Layout sizes must be non-negative",
                horizon=self.horizon,
                state_dim=self.state_dim,
                control_dim=self.control_dim,
                num_slack=self.num_slack,
            )

    @property
    def trajectory_size(self) -> int:
        """Length of the trajectory part, ``T * (d_x + d_u)``."""
        return self.horizon * (self.state_dim + self.control_dim)

    @property
    def size(self) -> int:
        """Length of the augmented decision vector."""
        return self.trajectory_size + self.num_slack

    @property
    def states_slice(self) -> slice:
        """Slice of the flat vector holding the states."""
        return slice(0, self.horizon * self.state_dim)

    @property
    def controls_slice(self) -> slice:
        """Slice of the flat vector holding the controls."""
        return slice(self.horizon * self.state_dim, self.trajectory_size)

    @property
    def slack_slice(self) -> slice:
        """Slice of the flat vector holding the slack variables."""
        return slice(self.trajectory_size, self.size)

    def state_index(self, t: int, i: int) -> int:
        """Flat index of state component ``i`` of row ``t`` (0-indexed)."""
        return t * self.state_dim + i

    def control_index(self, t: int, i: int) -> int:
        """Flat index of control component ``i`` of row ``t`` (0-indexed)."""
        return self.horizon * self.state_dim + t * self.control_dim + i

    def split(self, vector: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Split a flat vector into states, controls and slack.

        Parameters
        ----------
        vector : np.ndarray
            Flat vector of length `trajectory_size` or `size`.

        Returns
        -------
        Tuple[np.ndarray, np.ndarray, np.ndarray]
            Views of shape ``(T, d_x)``, ``(T, d_u)`` and ``(num_slack,)``.
            The slack view is empty when the vector has no slack part.

        Raises
        ------
        ProblemDefinitionError
            If the vector length matches neither layout size.
        """
        vector = np.asarray(vector, dtype=float)
        if vector.shape not in ((self.trajectory_size,), (self.size,)):
            raise ProblemDefinitionError(
                "Decision vector does not match layout",
                expected=(self.size,),
                actual=vector.shape,
            )
        states = vector[self.states_slice].reshape(self.horizon, self.state_dim)
        controls = vector[self.controls_slice].reshape(self.horizon, self.control_dim)
        slack = vector[self.trajectory_size :]
        return states, controls, slack

    def column_names(self) -> List[str]:
        """
        Column names of the flat augmented vector.

        Returns
        -------
        List[str]
            ``x{t}_{i}`` for states (t from 1), ``u{t}_{i}`` for controls
            (t from 0) and ``z{k}`` for slack entries.
        """
        names = [f"x{t + 1}_{i}" for t in range(self.horizon) for i in range(self.state_dim)]
        names += [f"u{t}_{i}" for t in range(self.horizon) for i in range(self.control_dim)]
        names += [f"z{k}" for k in range(self.num_slack)]
        return names


def _check_finite(values: np.ndarray, location: str) -> None:
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteError(
            f"Non-finite entry in {location}",
            location=location,
            index=int(bad[0]),
        )


@dataclass(frozen=True)
class TrajectoryParticle:
    """
    A candidate trajectory with states and controls as decision variables.

    Attributes
    ----------
    states : np.ndarray
        State rows ``x_1..x_T``, shape ``(T, d_x)``.
    controls : np.ndarray
        Control rows ``u_0..u_{T-1}``, shape ``(T, d_u)``.

    Raises
    ------
    ProblemDefinitionError
        If states and controls disagree on the horizon.
    NonFiniteError
        If any entry is NaN or infinite (``index`` is the offending row).
    """

    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self) -> None:
        states = np.array(self.states, dtype=float)
        controls = np.array(self.controls, dtype=float)
        if states.ndim != 2 or controls.ndim != 2:
            raise ProblemDefinitionError(
                "States and controls must be 2-D arrays",
                actual=(states.ndim, controls.ndim),
            )
        if states.shape[0] != controls.shape[0]:
            raise ProblemDefinitionError(
                "States and controls must share the horizon",
                expected=(states.shape[0],),
                actual=(controls.shape[0],),
            )
        _check_finite(states, "states")
        _check_finite(controls, "controls")
        states.flags.writeable = False
        controls.flags.writeable = False
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "controls", controls)

    @property
    def horizon(self) -> int:
        """Number of timesteps ``T``."""
        return int(self.states.shape[0])

    @property
    def state_dim(self) -> int:
        """State dimension ``d_x``."""
        return int(self.states.shape[1])

    @property
    def control_dim(self) -> int:
        """Control dimension ``d_u``."""
        return int(self.controls.shape[1])

    @property
    def layout(self) -> DecisionLayout:
        """Layout of this particle's flat decision vector."""
        return DecisionLayout(self.horizon, self.state_dim, self.control_dim)

    def to_vector(self) -> np.ndarray:
        """Flatten to ``[vec(X), vec(U)]`` of length ``T * (d_x + d_u)``."""
        return np.concatenate([self.states.ravel(), self.controls.ravel()])

    @classmethod
    def from_vector(cls, vector: np.ndarray, layout: DecisionLayout) -> "TrajectoryParticle":
        """
        Rebuild a particle from its flat vector (any slack part is ignored).

        Parameters
        ----------
        vector : np.ndarray
            Flat trajectory or augmented vector.
        layout : DecisionLayout
            Layout describing the vector.

        Returns
        -------
        TrajectoryParticle
            The particle.
        """
        states, controls, _ = layout.split(vector)
        return cls(states.copy(), controls.copy())


@dataclass(frozen=True)
class AugmentedParticle:
    """
    A trajectory particle together with its slack vector.

    Attributes
    ----------
    particle : TrajectoryParticle
        The trajectory part.
    slack : np.ndarray
        One slack entry per scalar inequality constraint.
    """

    particle: TrajectoryParticle
    slack: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self) -> None:
        slack = np.array(self.slack, dtype=float).ravel()
        _check_finite(slack, "slack")
        slack.flags.writeable = False
        object.__setattr__(self, "slack", slack)

    @property
    def layout(self) -> DecisionLayout:
        """Layout of the augmented decision vector."""
        base = self.particle.layout
        return DecisionLayout(base.horizon, base.state_dim, base.control_dim, self.slack.size)

    def to_vector(self) -> np.ndarray:
        """Flatten to ``[vec(X), vec(U), z]``."""
        return np.concatenate([self.particle.to_vector(), self.slack])

    @classmethod
    def from_vector(cls, vector: np.ndarray, layout: DecisionLayout) -> "AugmentedParticle":
        """
        Rebuild an augmented particle from its flat vector.

        Parameters
        ----------
        vector : np.ndarray
            Flat augmented vector of length ``layout.size``.
        layout : DecisionLayout
            Layout describing the vector.

        Returns
        -------
        AugmentedParticle
            The augmented particle.
        """
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (layout.size,):
            raise ProblemDefinitionError(
                "Augmented vector does not match layout",
                expected=(layout.size,),
                actual=vector.shape,
            )
        states, controls, slack = layout.split(vector)
        return cls(TrajectoryParticle(states.copy(), controls.copy()), slack.copy())


def stack_vectors(particles: Sequence[AugmentedParticle]) -> np.ndarray:
    """
    Stack the augmented decision vectors of a particle list into an array.

    Parameters
    ----------
    particles : Sequence[AugmentedParticle]
        Particles sharing one layout.

    Returns
    -------
    np.ndarray
        Array of shape ``(N, layout.size)``.
    """
    return np.stack([p.to_vector() for p in particles])
