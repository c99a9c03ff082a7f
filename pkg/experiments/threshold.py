"""Threshold-policy sweep and the value-iteration oracle for the two-state stopping problem."""

import logging
from typing import Tuple

import numpy as np
import pandas as pd

from config.experiment import ExperimentConfig
from experiments.common import finish, require_states
from social_learning.belief_core import Belief
from social_learning.cascade_sim import derive_seed
from social_learning.stopping_control import (
    THRESHOLD_COLUMNS,
    SpsaSettings,
    StoppingCostParams,
    ThresholdPolicy,
    evaluate_welfare_cost,
    exact_welfare_cost,
    simulate_stopping_run,
    spsa_optimize_threshold,
    sweep_thresholds,
    value_iteration_oracle,
)
from utils.results import ResultTable

logger = logging.getLogger(__name__)

NOT_FLAGGED = 0


def stopping_params(config: ExperimentConfig) -> StoppingCostParams:
    spec = config.stopping
    return StoppingCostParams(rho=spec.rho, d=spec.d, delta=spec.delta,
                              target_state=spec.target_state)


def two_state_belief(prior_p0: float) -> Belief:
    return Belief([prior_p0, 1.0 - prior_p0])


def run_threshold_experiment(config: ExperimentConfig) -> ResultTable:
    """
    Percentage of agents that do not flag a user, over a (gamma, prior) grid.

    Every episode plays the reveal-or-herd protocol against a user of the
    configured true state; the action 0 means "not flagged".
    """
    require_states(config, 2, "The threshold experiment")
    obs_model = config.observation_model()
    cost = config.cost_model()
    params = stopping_params(config)
    spec = config.stopping
    logger.info(f"Starting threshold experiment: {len(spec.gamma_values())} thresholds, "
                f"{len(config.prior_values())} priors, {spec.n_episodes} episodes")

    rows = []
    for i, gamma in enumerate(spec.gamma_values()):
        policy = ThresholdPolicy(gamma)
        for j, prior_p0 in enumerate(config.prior_values()):
            belief = two_state_belief(prior_p0)
            fractions = []
            for episode in range(spec.n_episodes):
                rng = np.random.default_rng(derive_seed(config.seed, i, j, episode))
                result = simulate_stopping_run(belief, spec.true_state, policy, obs_model,
                                               cost, params, spec.horizon_cap, rng)
                fractions.append(result.fraction_of_action(NOT_FLAGGED))
            rows.append({
                "gamma": gamma,
                "prior_p0": prior_p0,
                "pct_not_flagged": 100.0 * float(np.mean(fractions)),
            })
        logger.info(f"Finished threshold {gamma}")

    table = ResultTable.from_rows(rows, THRESHOLD_COLUMNS, config.canonical(), config.seed,
                                  "threshold")
    return finish(table, config)


def best_threshold(config: ExperimentConfig) -> Tuple[pd.DataFrame, float]:
    """Dense gamma sweep of the exact welfare cost averaged over the prior grid."""
    obs_model = config.observation_model()
    cost = config.cost_model()
    params = stopping_params(config)
    beliefs = [two_state_belief(p) for p in config.prior_values()]

    def evaluate(belief: Belief, policy: ThresholdPolicy) -> float:
        return exact_welfare_cost(belief, policy, obs_model, cost, params)

    return sweep_thresholds(config.stopping.gamma_values(), beliefs, evaluate)


def spsa_threshold(config: ExperimentConfig) -> float:
    """SPSA search of the threshold on the Monte Carlo welfare cost averaged over the prior grid."""
    obs_model = config.observation_model()
    cost = config.cost_model()
    params = stopping_params(config)
    spec = config.stopping
    beliefs = [two_state_belief(p) for p in config.prior_values()]
    seeds = np.random.SeedSequence([config.seed, 2])

    def evaluate(gamma: float) -> float:
        policy = ThresholdPolicy(gamma)
        return float(np.mean([
            evaluate_welfare_cost(belief, policy, obs_model, cost, params, spec.n_episodes,
                                  spec.horizon_cap, np.random.default_rng(seed))
            for belief, seed in zip(beliefs, seeds.spawn(len(beliefs)))
        ]))

    policy = spsa_optimize_threshold(spec.spsa_initial_gamma, evaluate, spec.spsa_iterations,
                                     SpsaSettings(), np.random.default_rng(seeds.spawn(1)[0]))
    return policy.gamma


def solve_oracle(config: ExperimentConfig) -> ResultTable:
    """Value-iteration values and decisions on the belief grid, plus the best swept threshold."""
    require_states(config, 2, "The value iteration oracle")
    obs_model = config.observation_model()
    cost = config.cost_model()
    spec = config.stopping
    logger.info(f"Solving oracle on a {spec.oracle_resolution}-point grid")

    solution = value_iteration_oracle(spec.oracle_resolution, obs_model, cost,
                                      stopping_params(config))
    _, swept_gamma = best_threshold(config)
    extra = {
        "switching_points": ",".join(f"{p:.6f}" for p in solution.switching_points()),
        "swept_gamma": f"{swept_gamma:.6f}",
        "sweeps": solution.sweeps,
    }
    if spec.spsa_iterations:
        extra["spsa_gamma"] = f"{spsa_threshold(config):.6f}"
    logger.info(f"Oracle switching points {extra['switching_points']}, "
                f"swept threshold {extra['swept_gamma']}")

    table = ResultTable.from_frame(solution.to_frame(), config.canonical(), config.seed,
                                   "solve-oracle", extra=extra)
    return finish(table, config)
