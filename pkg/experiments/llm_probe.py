"""Run the agent workflow over synthetic users built from a comment dataset."""

import logging

import numpy as np
import pandas as pd

from agents.workflow import PROTOCOL_COLUMNS, run_llm_protocol
from config.experiment import ExperimentConfig
from experiments.common import build_sensor, finish
from social_learning.belief_core import Belief, validate_model
from utils.results import ResultTable
from utils.sensing import N_INTENSITIES, load_dataset, make_synthetic_user

logger = logging.getLogger(__name__)


def probe_llm(config: ExperimentConfig, client=None) -> ResultTable:
    """
    One protocol run per user type, starting from a uniform public belief.

    Args:
        config: Experiment configuration
        client: Optional chat-completions client for the remote sensor

    Returns:
        ResultTable with one row per agent, tagged with the user type
    """
    obs_model = config.observation_model()
    cost = config.cost_model()
    validate_model(obs_model, cost)
    dataset = load_dataset(config.dataset_path)
    rng = np.random.default_rng(config.seed)
    user_types = config.user_types if config.user_types is not None else list(range(N_INTENSITIES + 1))

    frames = []
    for user_type in user_types:
        user = make_synthetic_user(user_type, dataset, rng, T=config.comments_per_user)
        sensor = build_sensor(config, user_type, rng, client=client)
        frame = run_llm_protocol(user, sensor, obs_model, cost, Belief.uniform(obs_model.n_states),
                                 horizon=config.horizon)
        frame.insert(0, "user_type", user_type)
        frames.append(frame)
        logger.info(f"User type {user_type}: mean action {frame['action'].mean():.3f}")

    frame = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(
        columns=["user_type"] + PROTOCOL_COLUMNS)
    table = ResultTable.from_frame(frame, config.canonical(), config.seed, "probe-llm")
    return finish(table, config)
