"""Train per-state RBMs on sensor flags and estimate the likelihood matrix."""

import logging
import os
from typing import List

import numpy as np

from config.experiment import ExperimentConfig
from experiments.common import build_sensor
from social_learning.belief_core import ObservationModel
from social_learning.exceptions import ConfigError
from social_learning.rbm_likelihood import likelihood_from_rbms, save_rbms, train_state_rbms
from utils.sensing import load_dataset, make_synthetic_user, synthetic_training_data

logger = logging.getLogger(__name__)


def sensed_training_data(config: ExperimentConfig, rng: np.random.Generator) -> List[np.ndarray]:
    """Flag vectors per user type, sensed from dataset comments."""
    dataset = load_dataset(config.dataset_path)
    data = []
    for user_type in range(config.n_states):
        user = make_synthetic_user(user_type, dataset, rng, T=config.rbm.n_per_state)
        sensor = build_sensor(config, user_type, rng)
        data.append(np.array([sensor.sense(c.text).flags for c in user.comments], dtype=float))
        logger.info(f"Sensed {len(user.comments)} comments for user type {user_type}")
    return data


def train_rbm(config: ExperimentConfig) -> ObservationModel:
    """
    Train one RBM per state and return the Gibbs-estimated observation model.

    Parameters are saved to ``rbm.params_path`` (default: the output path
    with a ``.json`` suffix); the likelihood matrix is written to ``out``.
    """
    if config.likelihood.source == "rbm":
        raise ConfigError("train-rbm cannot use an RBM likelihood as its own training source")
    rng = np.random.default_rng(config.seed)
    if config.sensor == "synthetic":
        data = synthetic_training_data(config.observation_model(), config.rbm.n_per_state, rng)
    else:
        data = sensed_training_data(config, rng)

    train_config = config.train_config()
    machines = train_state_rbms(data, train_config)
    likelihood = likelihood_from_rbms(machines, train_config)

    params_path = config.rbm.params_path
    if params_path is None and config.out:
        params_path = os.path.splitext(config.out)[0] + ".json"
    if params_path:
        save_rbms(machines, params_path)
    if config.out:
        likelihood.to_csv(config.out)
        logger.info(f"Wrote estimated likelihood to {config.out}")
    return likelihood
