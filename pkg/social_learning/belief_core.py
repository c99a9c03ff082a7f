"""Belief, observation and cost primitives plus the social learning filter.

Every object here is an immutable value and every function is pure, so the
module can be shared freely between threads and worker processes.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from social_learning.exceptions import (
    DimensionMismatch,
    ImpossibleAction,
    InvalidBelief,
    ZeroLikelihood,
)

logger = logging.getLogger(__name__)

# Absolute tolerance for probability sums and comparisons
TOLERANCE = 1e-9


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Belief:
    """A point on the probability simplex over the state space.

    The vector is renormalized on construction, so any nonnegative vector
    with positive mass is accepted.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.size == 0:
            raise InvalidBelief("Belief needs at least one state")
        if not np.all(np.isfinite(probs)):
            raise InvalidBelief(f"Belief has non-finite entries: {probs}")
        if np.any(probs < -TOLERANCE):
            raise InvalidBelief(f"Belief has negative entries: {probs}")
        probs = np.clip(probs, 0.0, None)
        total = probs.sum()
        if total <= 0.0:
            raise InvalidBelief("Belief has no probability mass")
        object.__setattr__(self, "probs", _frozen(probs / total))

    @classmethod
    def point_mass(cls, state: int, n_states: int) -> "Belief":
        """Degenerate belief e_state."""
        if not 0 <= state < n_states:
            raise DimensionMismatch(f"State {state} outside 0..{n_states - 1}")
        probs = np.zeros(n_states)
        probs[state] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, n_states: int) -> "Belief":
        return cls(np.full(n_states, 1.0 / n_states))

    @property
    def n_states(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.n_states

    def __getitem__(self, state: int) -> float:
        return float(self.probs[state])

    def is_degenerate(self) -> bool:
        return bool(np.isclose(self.probs.max(), 1.0, atol=TOLERANCE, rtol=0.0))

    def allclose(self, other: "Belief", atol: float = TOLERANCE) -> bool:
        return self.n_states == other.n_states and bool(
            np.allclose(self.probs, other.probs, atol=atol, rtol=0.0)
        )

    def to_list(self) -> list:
        return [float(p) for p in self.probs]


@dataclass(frozen=True)
class FiniteSpace:
    """A finite index set with optional labels."""

    cardinality: int
    labels: Tuple[str, ...] = field(default=())

    min_cardinality = 1

    def __post_init__(self):
        if self.cardinality < self.min_cardinality:
            raise DimensionMismatch(
                f"{type(self).__name__} needs at least {self.min_cardinality} elements, "
                f"got {self.cardinality}"
            )
        if self.labels and len(self.labels) != self.cardinality:
            raise DimensionMismatch(
                f"{type(self).__name__} has {self.cardinality} elements but "
                f"{len(self.labels)} labels"
            )
        object.__setattr__(self, "labels", tuple(self.labels))

    def label(self, index: int) -> str:
        return self.labels[index] if self.labels else str(index)


class StateSpace(FiniteSpace):
    min_cardinality = 2


class ActionSpace(FiniteSpace):
    min_cardinality = 2


class ObservationSpace(FiniteSpace):
    min_cardinality = 1


@dataclass(frozen=True, eq=False)
class ObservationModel:
    """Row-stochastic matrix B with B[x, y] = P(y | x)."""

    b: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float)
        if b.ndim != 2 or b.shape[0] < 1 or b.shape[1] < 1:
            raise DimensionMismatch(f"Observation matrix must be 2-D, got shape {b.shape}")
        if not np.all(np.isfinite(b)) or np.any(b < 0.0) or np.any(b > 1.0):
            raise InvalidBelief("Observation matrix entries must lie in [0, 1]")
        row_sums = b.sum(axis=1)
        bad_rows = np.flatnonzero(np.abs(row_sums - 1.0) > TOLERANCE)
        if bad_rows.size:
            raise InvalidBelief(
                f"Observation matrix rows {bad_rows.tolist()} do not sum to 1: "
                f"{row_sums[bad_rows].tolist()}"
            )
        object.__setattr__(self, "b", _frozen(b))

    @property
    def n_states(self) -> int:
        return int(self.b.shape[0])

    @property
    def n_observations(self) -> int:
        return int(self.b.shape[1])

    def row(self, state: int) -> np.ndarray:
        return self.b[state]

    def is_uninformative(self) -> bool:
        return bool(np.allclose(self.b, self.b[0], atol=TOLERANCE, rtol=0.0))

    @classmethod
    def from_csv(cls, path: str) -> "ObservationModel":
        from utils.matrix_io import read_matrix_csv

        return cls(read_matrix_csv(path))

    def to_csv(self, path: str) -> None:
        from utils.matrix_io import write_matrix_csv

        write_matrix_csv(self.b, path, row_prefix="state", column_prefix="obs")


@dataclass(frozen=True, eq=False)
class CostModel:
    """Cost table c[x, u] for taking action u when the state is x."""

    c: np.ndarray

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        if c.ndim != 2 or c.shape[0] < 2 or c.shape[1] < 2:
            raise DimensionMismatch(
                f"Cost matrix must be X x U with X, U >= 2, got shape {c.shape}"
            )
        if not np.all(np.isfinite(c)):
            raise InvalidBelief("Cost matrix entries must be finite")
        object.__setattr__(self, "c", _frozen(c))

    @property
    def n_states(self) -> int:
        return int(self.c.shape[0])

    @property
    def n_actions(self) -> int:
        return int(self.c.shape[1])

    @classmethod
    def from_csv(cls, path: str) -> "CostModel":
        from utils.matrix_io import read_matrix_csv

        return cls(read_matrix_csv(path))

    def to_csv(self, path: str) -> None:
        from utils.matrix_io import write_matrix_csv

        write_matrix_csv(self.c, path, row_prefix="state", column_prefix="action")


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def misclassification_cost(n_states: int) -> CostModel:
    """0/1 loss with actions identified with states."""
    return CostModel(1.0 - np.eye(n_states))


def hate_speech_cost(n_states: int = 6, literal: bool = False) -> CostModel:
    """Cost for flagging users of graded hate intensity.

    State and action 0 mean "not hateful", 1..n-1 are intensity levels.
    By default the indicator 1(x != 0) multiplies only the missed-flag term,
    c(x, u) = 1(x != 0) 1(u = 0) + |x - u|. With ``literal=True`` it
    multiplies both terms, which makes every action free when x = 0.
    """
    states = np.arange(n_states)[:, None]
    actions = np.arange(n_states)[None, :]
    missed = ((states != 0) & (actions == 0)).astype(float)
    distance = np.abs(states - actions).astype(float)
    if literal:
        return CostModel((states != 0) * (((actions == 0).astype(float)) + distance))
    return CostModel(missed + distance)


def type_one_error_cost(false_flag_cost: float = 1.0) -> CostModel:
    """Two-state flagging cost: unit cost for a missed hateful user.

    ``false_flag_cost`` is charged for flagging a benign user; with 0 the
    herd action flags every user that is not certainly benign.
    """
    return CostModel(np.array([[0.0, false_flag_cost], [1.0, 0.0]]))


def toxic_observation_model(p_toxic_hateful: float = 0.7,
                            p_toxic_benign: float = 0.0) -> ObservationModel:
    """Binary toxic/non-toxic observation channel (columns: non-toxic, toxic).

    State 0 is a benign user and state 1 a hateful one. The stopping problem
    built on this channel targets state 0 ("not hateful") by default, so
    herding means announcing "not flagged".
    """
    return ObservationModel(np.array([
        [1.0 - p_toxic_benign, p_toxic_benign],
        [1.0 - p_toxic_hateful, p_toxic_hateful],
    ]))


def diagonal_observation_model(n_states: int, accuracy: float,
                               n_observations: Optional[int] = None) -> ObservationModel:
    """Square-ish channel reporting the true state with probability ``accuracy``.

    The remaining mass is spread evenly over the other observations.
    """
    n_obs = n_observations or n_states
    if n_obs < n_states:
        raise DimensionMismatch("Need at least as many observations as states")
    off = (1.0 - accuracy) / (n_obs - 1)
    b = np.full((n_states, n_obs), off)
    b[np.arange(n_states), np.arange(n_states)] = accuracy
    return ObservationModel(b)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def _check_states(belief: Belief, n_states: int, what: str) -> None:
    if belief.n_states != n_states:
        raise DimensionMismatch(
            f"Belief has {belief.n_states} states but the {what} has {n_states}"
        )


def _check_index(index: int, size: int, what: str) -> None:
    if not 0 <= index < size:
        raise DimensionMismatch(f"{what} {index} outside 0..{size - 1}")


def bayes_update(prior: Belief, obs_model: ObservationModel, y: int) -> Belief:
    """Posterior after a private observation y.

    Args:
        prior: Belief before the observation
        obs_model: Observation likelihoods
        y: Observation index

    Returns:
        Posterior belief

    Raises:
        ZeroLikelihood: if y has probability zero under the prior
    """
    _check_states(prior, obs_model.n_states, "observation model")
    _check_index(y, obs_model.n_observations, "Observation")
    unnormalized = obs_model.b[:, y] * prior.probs
    evidence = unnormalized.sum()
    if evidence <= 0.0:
        raise ZeroLikelihood(y)
    return Belief(unnormalized / evidence)


def expected_costs(belief: Belief, cost: CostModel) -> np.ndarray:
    """Expected cost of every action under ``belief``."""
    _check_states(belief, cost.n_states, "cost model")
    return cost.c.T @ belief.probs


def expected_cost(belief: Belief, cost: CostModel, u: int) -> float:
    _check_states(belief, cost.n_states, "cost model")
    _check_index(u, cost.n_actions, "Action")
    return float(cost.c[:, u] @ belief.probs)


def myopic_action(belief: Belief, cost: CostModel) -> int:
    """Action with the smallest expected cost; ties go to the lowest index."""
    return int(np.argmin(expected_costs(belief, cost)))


def observation_actions(prior: Belief, obs_model: ObservationModel,
                        cost: CostModel) -> np.ndarray:
    """Myopic action an agent would take after each possible observation.

    Observations with zero probability under the prior are assigned the
    prior's own myopic action. Whenever all possible observations share an
    action the prior picks it as well, so a degenerate belief is always
    reported as a cascade.
    """
    _check_states(prior, obs_model.n_states, "observation model")
    actions = np.full(obs_model.n_observations, myopic_action(prior, cost), dtype=int)
    if obs_model.is_uninformative():
        return actions
    for y in range(obs_model.n_observations):
        if obs_model.b[:, y] @ prior.probs > 0.0:
            actions[y] = myopic_action(bayes_update(prior, obs_model, y), cost)
    return actions


def likelihood_from_actions(actions: np.ndarray, obs_model: ObservationModel,
                             u: int) -> np.ndarray:
    mask = actions == u
    if mask.all():
        return np.ones(obs_model.n_states)
    return obs_model.b[:, mask].sum(axis=1)


def action_likelihood(prior: Belief, obs_model: ObservationModel, cost: CostModel,
                      u: int) -> np.ndarray:
    """P(u | x = i, prior) for every state i (the diagonal of R(prior, u))."""
    _check_index(u, cost.n_actions, "Action")
    actions = observation_actions(prior, obs_model, cost)
    return likelihood_from_actions(actions, obs_model, u)


def action_likelihood_matrix(prior: Belief, obs_model: ObservationModel,
                             cost: CostModel) -> np.ndarray:
    """X x U matrix of P(u | x, prior); every row sums to one."""
    actions = observation_actions(prior, obs_model, cost)
    return np.column_stack([
        likelihood_from_actions(actions, obs_model, u) for u in range(cost.n_actions)
    ])


def social_filter_update(prior: Belief, obs_model: ObservationModel, cost: CostModel,
                         u: int) -> Belief:
    """Public belief after observing action u.

    When the action likelihood is the same for every state the update is the
    identity and ``prior`` itself is returned, so a cascade freezes the
    public belief bit for bit.

    Raises:
        ImpossibleAction: if u has probability zero under the prior
    """
    return filter_with_likelihood(prior, action_likelihood(prior, obs_model, cost, u), u)


def filter_with_likelihood(prior: Belief, likelihood: np.ndarray, u: int) -> Belief:
    """Apply a precomputed action likelihood P(u | x, prior) to the prior."""
    if likelihood[0] > 0.0 and np.all(likelihood == likelihood[0]):
        return prior
    unnormalized = likelihood * prior.probs
    total = unnormalized.sum()
    if total <= 0.0:
        raise ImpossibleAction(u)
    return Belief(unnormalized / total)


def action_probabilities(prior: Belief, obs_model: ObservationModel,
                         cost: CostModel) -> np.ndarray:
    """Predictive probability sigma(prior, u) of each action."""
    return action_likelihood_matrix(prior, obs_model, cost).T @ prior.probs


def validate_model(obs_model: ObservationModel,
                   cost: CostModel) -> Tuple[StateSpace, ActionSpace, ObservationSpace]:
    """Check that observation and cost tables describe the same state space.

    Returns:
        The state, action and observation spaces the two tables span

    Raises:
        DimensionMismatch: on differing state counts or a space that is too small
    """
    if obs_model.n_states != cost.n_states:
        raise DimensionMismatch(
            f"Observation model has {obs_model.n_states} states, "
            f"cost model has {cost.n_states}"
        )
    return (StateSpace(obs_model.n_states), ActionSpace(cost.n_actions),
            ObservationSpace(obs_model.n_observations))
