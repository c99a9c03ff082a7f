"""Herding sweep over initial priors and true states."""

import logging

from config.experiment import ExperimentConfig
from experiments.common import finish
from social_learning.belief_core import validate_model
from social_learning.cascade_sim import monte_carlo_herding
from utils.results import ResultTable

logger = logging.getLogger(__name__)


def run_herding_experiment(config: ExperimentConfig) -> ResultTable:
    """
    Average action, cascade frequency and cascade time for every (state, prior) cell.

    Args:
        config: Experiment configuration

    Returns:
        ResultTable with one row per cell
    """
    obs_model = config.observation_model()
    cost = config.cost_model()
    validate_model(obs_model, cost)
    logger.info(f"Starting herding experiment: {len(config.prior_values())} priors, "
                f"{len(config.state_values())} states, {config.n_runs} runs")

    frame = monte_carlo_herding(
        prior_grid=config.prior_values(),
        true_states=config.state_values(),
        n_runs=config.n_runs,
        horizon=config.horizon,
        obs_model=obs_model,
        cost=cost,
        master_seed=config.seed,
        allocation=config.allocation,
        workers=config.workers,
    )
    table = ResultTable.from_frame(frame, config.canonical(), config.seed, "herding")
    logger.info("Herding experiment finished")
    return finish(table, config)
