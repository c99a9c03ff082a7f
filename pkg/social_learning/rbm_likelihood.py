"""Per-state restricted Boltzmann machines turning sensor flags into a likelihood matrix.

One binary RBM (6 visible flags, 4 hidden units) is trained per state with
contrastive divergence. Gibbs samples from each machine are reduced to
observations and counted, which yields an empirical observation model.
"""

import itertools
import json
import logging
import os
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.special import expit, logsumexp

from config.settings import RBM_DEFAULTS
from social_learning.belief_core import ObservationModel
from social_learning.exceptions import ConfigError, EmptyData
from utils.sensing import N_FLAGS, reduce_observation

logger = logging.getLogger(__name__)

INIT_WEIGHT_STD = 0.01


@dataclass(frozen=True, eq=False)
class RbmParams:
    weights: np.ndarray
    visible_bias: np.ndarray
    hidden_bias: np.ndarray

    def __post_init__(self):
        weights = np.array(self.weights, dtype=float)
        visible_bias = np.array(self.visible_bias, dtype=float).reshape(-1)
        hidden_bias = np.array(self.hidden_bias, dtype=float).reshape(-1)
        if weights.shape != (visible_bias.size, hidden_bias.size):
            raise ValueError(
                f"Weights shape {weights.shape} does not match biases "
                f"({visible_bias.size}, {hidden_bias.size})"
            )
        for name, array in (("weights", weights), ("visible_bias", visible_bias),
                            ("hidden_bias", hidden_bias)):
            if not np.all(np.isfinite(array)):
                raise ValueError(f"RBM {name} contain non-finite entries")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "visible_bias", visible_bias)
        object.__setattr__(self, "hidden_bias", hidden_bias)

    @property
    def n_visible(self) -> int:
        return int(self.visible_bias.size)

    @property
    def n_hidden(self) -> int:
        return int(self.hidden_bias.size)

    @classmethod
    def zeros(cls, n_visible: int = RBM_DEFAULTS["n_visible"],
              n_hidden: int = RBM_DEFAULTS["n_hidden"]) -> "RbmParams":
        return cls(np.zeros((n_visible, n_hidden)), np.zeros(n_visible), np.zeros(n_hidden))

    def to_dict(self) -> dict:
        return {
            "n_visible": self.n_visible,
            "n_hidden": self.n_hidden,
            "weights": self.weights.reshape(-1).tolist(),
            "visible_bias": self.visible_bias.tolist(),
            "hidden_bias": self.hidden_bias.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RbmParams":
        try:
            shape = (int(data["n_visible"]), int(data["n_hidden"]))
            return cls(np.asarray(data["weights"], dtype=float).reshape(shape),
                       data["visible_bias"], data["hidden_bias"])
        except (KeyError, ValueError, TypeError) as e:
            raise ConfigError(f"Invalid RBM parameter document: {e}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = RBM_DEFAULTS["epochs"]
    learning_rate: float = RBM_DEFAULTS["learning_rate"]
    cd_steps: int = RBM_DEFAULTS["cd_steps"]
    gibbs_samples: int = RBM_DEFAULTS["gibbs_samples"]
    gibbs_iterations: int = RBM_DEFAULTS["gibbs_iterations"]
    n_hidden: int = RBM_DEFAULTS["n_hidden"]
    rng_seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.cd_steps < 1:
            raise ValueError("epochs must be >= 0 and cd_steps >= 1")
        if self.gibbs_samples < 1 or self.gibbs_iterations < 1 or self.n_hidden < 1:
            raise ValueError("Sample, iteration and hidden-unit counts must be positive")
        if self.learning_rate < 0.0:
            raise ValueError(f"learning_rate must be nonnegative, got {self.learning_rate}")


def _bernoulli(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return (rng.random(probs.shape) < probs).astype(float)


def _as_data(data) -> np.ndarray:
    array = np.asarray(data, dtype=float)
    if array.size == 0:
        raise EmptyData("RBM training needs at least one visible vector")
    if array.ndim != 2:
        raise ValueError(f"Training data must be a 2-D array, got shape {array.shape}")
    if not np.all((array == 0.0) | (array == 1.0)):
        raise ValueError("Training data must be binary")
    return array


def hidden_probabilities(params: RbmParams, visible: np.ndarray) -> np.ndarray:
    return expit(params.hidden_bias + visible @ params.weights)


def visible_probabilities(params: RbmParams, hidden: np.ndarray) -> np.ndarray:
    return expit(params.visible_bias + hidden @ params.weights.T)


def train_cd(data, config: TrainConfig,
             on_epoch: Optional[Callable[[int, RbmParams], None]] = None) -> RbmParams:
    """
    Fit an RBM with full-batch CD-k.

    Args:
        data: Binary visible vectors, one per row
        config: Training configuration
        on_epoch: Optional callback receiving (epoch, params) after each epoch

    Returns:
        Trained parameters
    """
    visible = _as_data(data)
    rng = np.random.default_rng(config.rng_seed)
    n_visible = visible.shape[1]
    weights = rng.normal(0.0, INIT_WEIGHT_STD, size=(n_visible, config.n_hidden))
    visible_bias = np.zeros(n_visible)
    hidden_bias = np.zeros(config.n_hidden)
    batch = visible.shape[0]

    for epoch in range(1, config.epochs + 1):
        params = RbmParams(weights, visible_bias, hidden_bias)
        positive_hidden = hidden_probabilities(params, visible)

        negative_visible = visible
        hidden_sample = _bernoulli(positive_hidden, rng)
        for _ in range(config.cd_steps):
            negative_visible = _bernoulli(visible_probabilities(params, hidden_sample), rng)
            negative_hidden = hidden_probabilities(params, negative_visible)
            hidden_sample = _bernoulli(negative_hidden, rng)

        step = config.learning_rate / batch
        weights = weights + step * (visible.T @ positive_hidden - negative_visible.T @ negative_hidden)
        visible_bias = visible_bias + step * (visible - negative_visible).sum(axis=0)
        hidden_bias = hidden_bias + step * (positive_hidden - negative_hidden).sum(axis=0)

        if on_epoch is not None:
            on_epoch(epoch, RbmParams(weights, visible_bias, hidden_bias))
        if epoch % 25 == 0:
            logger.info(f"RBM epoch {epoch}/{config.epochs}")

    return RbmParams(weights, visible_bias, hidden_bias)


def gibbs_sample(params: RbmParams, n: int, iterations: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Run ``n`` independent chains from random visible states; returns the final states."""
    if n < 1:
        raise ValueError(f"Need at least one chain, got {n}")
    visible = _bernoulli(np.full((n, params.n_visible), 0.5), rng)
    for _ in range(iterations):
        hidden = _bernoulli(hidden_probabilities(params, visible), rng)
        visible = _bernoulli(visible_probabilities(params, hidden), rng)
    return visible.astype(int)


def free_energy(params: RbmParams, visible: np.ndarray) -> np.ndarray:
    """F(v) = -b'v - sum_j log(1 + exp(c_j + W_j'v)) for each row v."""
    visible = np.atleast_2d(np.asarray(visible, dtype=float))
    activation = params.hidden_bias + visible @ params.weights
    return -(visible @ params.visible_bias) - np.logaddexp(0.0, activation).sum(axis=1)


def all_visible_states(n_visible: int) -> np.ndarray:
    return np.array(list(itertools.product([0, 1], repeat=n_visible)), dtype=float)


def exact_marginal(params: RbmParams) -> np.ndarray:
    """P(v) over every visible configuration, in ``all_visible_states`` order."""
    energies = -free_energy(params, all_visible_states(params.n_visible))
    return np.exp(energies - logsumexp(energies))


def exact_nll(params: RbmParams, data) -> float:
    """Average negative log-likelihood of ``data`` by enumerating the partition function."""
    visible = _as_data(data)
    log_partition = logsumexp(-free_energy(params, all_visible_states(params.n_visible)))
    return float(np.mean(free_energy(params, visible)) + log_partition)


def estimate_likelihood(samples_per_state: Sequence[np.ndarray],
                        reducer: Callable[[Sequence[int]], int] = reduce_observation,
                        n_observations: int = N_FLAGS,
                        alpha: Optional[float] = None) -> ObservationModel:
    """
    Count reduced observations per state and normalize into an observation model.

    Args:
        samples_per_state: Visible samples for each state
        reducer: Map from a visible vector to an observation index
        n_observations: Size of the observation alphabet
        alpha: Additive smoothing per cell; defaults to 1 / (samples of that state)

    Returns:
        Row-stochastic ObservationModel
    """
    rows = []
    for state, samples in enumerate(samples_per_state):
        samples = np.asarray(samples)
        if samples.shape[0] == 0:
            raise EmptyData(f"State {state} has no samples")
        counts = np.zeros(n_observations)
        for sample in samples:
            counts[reducer(sample)] += 1.0
        smoothing = 1.0 / samples.shape[0] if alpha is None else alpha
        counts += smoothing
        rows.append(counts / counts.sum())
    return ObservationModel(np.vstack(rows))


def train_state_rbms(data_per_state: Sequence[np.ndarray], config: TrainConfig) -> List[RbmParams]:
    """Train one RBM per state; each machine gets its own seed derived from the config seed."""
    seeds = np.random.SeedSequence(config.rng_seed).spawn(len(data_per_state))
    machines = []
    for state, (data, seed) in enumerate(zip(data_per_state, seeds)):
        logger.info(f"Training RBM for state {state} on {len(data)} vectors")
        state_config = TrainConfig(
            epochs=config.epochs,
            learning_rate=config.learning_rate,
            cd_steps=config.cd_steps,
            gibbs_samples=config.gibbs_samples,
            gibbs_iterations=config.gibbs_iterations,
            n_hidden=config.n_hidden,
            rng_seed=int(seed.generate_state(1)[0]),
        )
        machines.append(train_cd(data, state_config))
    return machines


def sample_state_rbms(machines: Sequence[RbmParams], config: TrainConfig) -> List[np.ndarray]:
    seeds = np.random.SeedSequence([config.rng_seed, 1]).spawn(len(machines))
    return [
        gibbs_sample(params, config.gibbs_samples, config.gibbs_iterations,
                     np.random.default_rng(seed))
        for params, seed in zip(machines, seeds)
    ]


def likelihood_from_rbms(machines: Sequence[RbmParams], config: TrainConfig,
                         alpha: Optional[float] = None) -> ObservationModel:
    """Gibbs-sample every machine and estimate the observation model from the samples."""
    return estimate_likelihood(sample_state_rbms(machines, config), alpha=alpha)


def save_rbms(machines: Sequence[RbmParams], path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"states": [m.to_dict() for m in machines]}, f, indent=2)
    logger.info(f"Saved {len(machines)} RBMs to {path}")


def load_rbms(path: str) -> List[RbmParams]:
    if not os.path.exists(path):
        raise ConfigError(f"RBM parameter file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"RBM parameter file {path} is not valid JSON: {e}")
    if "states" not in document:
        raise ConfigError(f"RBM parameter file {path} has no 'states' list")
    return [RbmParams.from_dict(entry) for entry in document["states"]]


def dump_samples(samples: np.ndarray, path: str) -> None:
    """Write one bit string per line, e.g. ``010000``."""
    with open(path, "w", encoding="utf-8") as f:
        for row in np.asarray(samples, dtype=int):
            f.write("".join(str(bit) for bit in row) + "\n")
