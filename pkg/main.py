"""Main execution script."""

import argparse
import logging
import sys
from typing import List, Optional

from config.settings import LOG_LEVEL
from config.experiment import build_experiment_config, load_experiment_config
from experiments.herding import run_herding_experiment
from experiments.llm_probe import probe_llm
from experiments.rbm_training import train_rbm
from experiments.structure import run_structure_check
from experiments.threshold import run_threshold_experiment, solve_oracle
from social_learning.exceptions import ConfigError, SocialLearningError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

# Subcommand -> experiment kind
COMMANDS = {
    "simulate-herding": "herding",
    "simulate-threshold": "threshold",
    "train-rbm": "train-rbm",
    "probe-llm": "probe-llm",
    "check-structure": "check-structure",
    "solve-oracle": "solve-oracle",
}

# Defaults used when no config file is given
TWO_STATE_DEFAULTS = {
    "n_states": 2,
    "cost": {"preset": "type-one-error"},
    "likelihood": {"source": "preset", "preset": "toxic"},
}
KIND_DEFAULTS = {
    "threshold": TWO_STATE_DEFAULTS,
    "solve-oracle": TWO_STATE_DEFAULTS,
    "check-structure": TWO_STATE_DEFAULTS,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="llm-social-learning",
        description="Bayesian social learning with LLM sensors: herding, stopping control and RBM likelihoods",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", help="YAML experiment configuration")
        sub.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
        sub.add_argument("--out", help="Output path")
        sub.add_argument("--sensor", choices=["synthetic", "remote", "cached"],
                         help="Sensor mode")
    return parser


def run_command(command: str, config_path: Optional[str] = None, seed: Optional[int] = None,
                out: Optional[str] = None, sensor: Optional[str] = None):
    """Load the configuration and run one experiment."""
    kind = COMMANDS[command]
    overrides = {"kind": kind, "seed": seed, "out": out, "sensor": sensor}
    if config_path:
        config = load_experiment_config(config_path, **overrides)
    else:
        config = build_experiment_config(dict(KIND_DEFAULTS.get(kind, {})), **overrides)

    print(f"🚀 Starting {command} (seed {config.seed})...")
    if kind == "herding":
        result = run_herding_experiment(config)
        print(f"📊 {len(result)} herding cells")
    elif kind == "threshold":
        result = run_threshold_experiment(config)
        print(f"📊 {len(result)} threshold cells")
    elif kind == "train-rbm":
        result = train_rbm(config)
        print(f"🧠 Estimated {result.n_states}x{result.n_observations} likelihood")
    elif kind == "probe-llm":
        result = probe_llm(config)
        print(f"🤖 {len(result)} agents probed")
    elif kind == "check-structure":
        result = run_structure_check(config)
        verdicts = ", ".join(f"{name}={result[name]}" for name in ("S1", "S2", "S3", "S4"))
        print(f"🔎 {verdicts}")
    else:
        result = solve_oracle(config)
        print(f"📈 Switching points: {result.provenance.get('switching_points') or 'none'}")
    if config.out:
        print(f"💾 Output written to {config.out}")
    return result


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=LOG_LEVEL,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    args = build_parser().parse_args(argv)
    try:
        run_command(args.command, args.config, args.seed, args.out, args.sensor)
    except (ConfigError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except (SocialLearningError, ValueError) as e:
        logger.error(f"Run failed: {e}")
        return EXIT_RUNTIME_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
