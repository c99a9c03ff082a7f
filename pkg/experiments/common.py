"""Helpers shared by the experiment runners."""

import logging
from typing import Optional

import numpy as np

from config.experiment import ExperimentConfig
from social_learning.exceptions import ConfigError
from utils.api_clients import CachedSensor, SensorClient
from utils.database import TranscriptCache
from utils.results import ResultTable
from utils.sensing import SyntheticSensor

logger = logging.getLogger(__name__)


def build_sensor(config: ExperimentConfig, true_state: int, rng: np.random.Generator,
                 client=None):
    """
    Sensor for one synthetic user.

    Args:
        config: Experiment configuration
        true_state: User type, used only by the synthetic sensor
        rng: Generator for the synthetic sensor
        client: Optional chat-completions client injected into the remote sensor

    Returns:
        Object with ``sense(comment) -> SensorReport``
    """
    if config.sensor == "synthetic":
        return SyntheticSensor(true_state, config.observation_model(), rng)
    cache = TranscriptCache(config.transcript_cache)
    if config.sensor == "cached":
        return CachedSensor(cache)
    return CachedSensor(cache, SensorClient(config.sensor_settings, client=client))


def finish(table: ResultTable, config: ExperimentConfig, out: Optional[str] = None) -> ResultTable:
    """Write ``table`` to the configured output path when there is one."""
    path = out or config.out
    if path:
        table.write_csv(path)
    return table


def require_states(config: ExperimentConfig, n_states: int, what: str) -> None:
    if config.n_states != n_states:
        raise ConfigError(f"{what} needs n_states = {n_states}, got {config.n_states}")
