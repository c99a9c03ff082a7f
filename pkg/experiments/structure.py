"""Structural assumption report for a cost and observation model."""

import json
import logging
import os

from config.experiment import ExperimentConfig
from experiments.threshold import stopping_params
from social_learning.stopping_control import check_structural_assumptions, is_tp2

logger = logging.getLogger(__name__)


def run_structure_check(config: ExperimentConfig) -> dict:
    """
    Evaluate S1-S4 and write the report as JSON.

    Returns:
        Report with one verdict per assumption and every violated instance
    """
    obs_model = config.observation_model()
    cost = config.cost_model()
    report = check_structural_assumptions(cost, obs_model, stopping_params(config)).to_dict()
    report["observation_matrix_tp2"] = is_tp2(obs_model.b)
    report["n_states"] = obs_model.n_states
    logger.info(f"Structure check: S1={report['S1']} S2={report['S2']} "
                f"S3={report['S3']} S4={report['S4']}, {len(report['violations'])} violations")

    if config.out:
        directory = os.path.dirname(config.out)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(config.out, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, sort_keys=True)
        logger.info(f"Wrote structure report to {config.out}")
    return report
