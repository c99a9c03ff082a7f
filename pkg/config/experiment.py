"""
Experiment configuration.
One YAML document per experiment, validated with pydantic and pre-filled from settings.
"""

import logging
import os
from typing import List, Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from config.settings import (
    HORIZON,
    N_MC_RUNS,
    PRIOR_GRID_STEP,
    RBM_DEFAULTS,
    STOPPING_DEFAULTS,
    STOPPING_HORIZON_CAP,
    TRANSCRIPT_CACHE_PATH,
    USER_COMMENTS_T,
)
from social_learning.belief_core import (
    CostModel,
    ObservationModel,
    diagonal_observation_model,
    hate_speech_cost,
    misclassification_cost,
    toxic_observation_model,
    type_one_error_cost,
)
from social_learning.exceptions import ConfigError
from utils.api_clients import SensorConfig

logger = logging.getLogger(__name__)

ExperimentKind = Literal[
    "herding", "threshold", "train-rbm", "probe-llm", "check-structure", "solve-oracle"
]
SensorMode = Literal["synthetic", "remote", "cached"]


def _check_file(path: Optional[str], what: str) -> None:
    if path is None:
        raise ConfigError(f"{what} path is required")
    if not os.path.exists(path):
        raise ConfigError(f"{what} not found: {path}")


class CostSpec(BaseModel):
    preset: Literal["misclassification", "hate-speech", "type-one-error", "custom"] = "hate-speech"
    path: Optional[str] = None
    literal: bool = False
    false_flag_cost: float = Field(default=1.0, ge=0.0)


class LikelihoodSpec(BaseModel):
    source: Literal["preset", "matrix", "rbm"] = "preset"
    preset: Literal["diagonal", "toxic"] = "diagonal"
    accuracy: float = Field(default=0.4, gt=0.0, le=1.0)
    p_toxic_hateful: float = Field(default=0.7, ge=0.0, le=1.0)
    p_toxic_benign: float = Field(default=0.0, ge=0.0, le=1.0)
    path: Optional[str] = None


class StoppingSpec(BaseModel):
    rho: float = Field(default=STOPPING_DEFAULTS["rho"], ge=0.0, lt=1.0)
    d: float = Field(default=STOPPING_DEFAULTS["d"], ge=0.0)
    delta: float = Field(default=STOPPING_DEFAULTS["delta"], ge=0.0)
    target_state: int = Field(default=STOPPING_DEFAULTS["target_state"], ge=0)
    true_state: int = Field(default=1, ge=0)
    gamma_step: float = Field(default=PRIOR_GRID_STEP, gt=0.0, le=1.0)
    gammas: Optional[List[float]] = None
    horizon_cap: int = Field(default=STOPPING_HORIZON_CAP, ge=1)
    n_episodes: int = Field(default=N_MC_RUNS, ge=1)
    oracle_resolution: int = Field(default=1024, ge=16)
    spsa_iterations: int = Field(default=0, ge=0)
    spsa_initial_gamma: float = Field(default=0.5, ge=0.0, le=1.0)

    def gamma_values(self) -> List[float]:
        if self.gammas is not None:
            return list(self.gammas)
        return _grid(0.0, 1.0, self.gamma_step)


class RbmSpec(BaseModel):
    epochs: int = Field(default=RBM_DEFAULTS["epochs"], ge=0)
    learning_rate: float = Field(default=RBM_DEFAULTS["learning_rate"], ge=0.0)
    cd_steps: int = Field(default=RBM_DEFAULTS["cd_steps"], ge=1)
    n_hidden: int = Field(default=RBM_DEFAULTS["n_hidden"], ge=1)
    gibbs_samples: int = Field(default=RBM_DEFAULTS["gibbs_samples"], ge=1)
    gibbs_iterations: int = Field(default=RBM_DEFAULTS["gibbs_iterations"], ge=1)
    n_per_state: int = Field(default=1000, ge=1)
    params_path: Optional[str] = None


def _grid(start: float, stop: float, step: float) -> List[float]:
    count = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(count + 1)]


class ExperimentConfig(BaseModel):
    kind: ExperimentKind = "herding"
    seed: int = Field(default=0, ge=0, le=2**64 - 1)
    out: Optional[str] = None

    n_states: int = Field(default=6, ge=2)
    cost: CostSpec = Field(default_factory=CostSpec)
    likelihood: LikelihoodSpec = Field(default_factory=LikelihoodSpec)

    prior_grid: Optional[List[float]] = None
    prior_step: float = Field(default=PRIOR_GRID_STEP, gt=0.0, lt=1.0)
    true_states: Optional[List[int]] = None
    allocation: Literal["true_state", "uniform"] = "true_state"
    n_runs: int = Field(default=N_MC_RUNS, ge=1)
    horizon: int = Field(default=HORIZON, ge=1)
    workers: int = Field(default=1, ge=1)

    stopping: StoppingSpec = Field(default_factory=StoppingSpec)
    rbm: RbmSpec = Field(default_factory=RbmSpec)

    sensor: SensorMode = "synthetic"
    sensor_settings: SensorConfig = Field(default_factory=SensorConfig)
    transcript_cache: str = TRANSCRIPT_CACHE_PATH
    dataset_path: Optional[str] = None
    comments_per_user: int = Field(default=USER_COMMENTS_T, ge=1)
    user_types: Optional[List[int]] = None

    @model_validator(mode="after")
    def _check_grids(self):
        if self.prior_grid is not None:
            if not self.prior_grid:
                raise ValueError("prior_grid must not be empty")
            if any(not 0.0 <= p <= 1.0 for p in self.prior_grid):
                raise ValueError("prior_grid values must lie in [0, 1]")
        if self.true_states is not None:
            if not self.true_states:
                raise ValueError("true_states must not be empty")
            if any(not 0 <= s < self.n_states for s in self.true_states):
                raise ValueError(f"true_states must lie in 0..{self.n_states - 1}")
        if self.stopping.gammas is not None and not self.stopping.gammas:
            raise ValueError("stopping.gammas must not be empty")
        return self

    def prior_values(self) -> List[float]:
        if self.prior_grid is not None:
            return list(self.prior_grid)
        # Interior points only; the endpoints are degenerate priors
        return _grid(0.0, 1.0, self.prior_step)[1:-1]

    def state_values(self) -> List[int]:
        return list(self.true_states) if self.true_states is not None else list(range(self.n_states))

    def check_files(self) -> None:
        """Raise ConfigError for any referenced file that does not exist."""
        if self.cost.preset == "custom":
            _check_file(self.cost.path, "Cost matrix")
        if self.likelihood.source == "matrix":
            _check_file(self.likelihood.path, "Likelihood matrix")
        if self.likelihood.source == "rbm":
            _check_file(self.rbm.params_path, "RBM parameter file")
        if self.kind == "probe-llm" or (self.kind == "train-rbm" and self.sensor != "synthetic"):
            _check_file(self.dataset_path, "Comment dataset")

    def cost_model(self) -> CostModel:
        spec = self.cost
        if spec.preset == "misclassification":
            return misclassification_cost(self.n_states)
        if spec.preset == "hate-speech":
            return hate_speech_cost(self.n_states, literal=spec.literal)
        if spec.preset == "type-one-error":
            return type_one_error_cost(spec.false_flag_cost)
        _check_file(spec.path, "Cost matrix")
        return CostModel.from_csv(spec.path)

    def observation_model(self) -> ObservationModel:
        spec = self.likelihood
        if spec.source == "matrix":
            _check_file(spec.path, "Likelihood matrix")
            return ObservationModel.from_csv(spec.path)
        if spec.source == "rbm":
            from social_learning.rbm_likelihood import likelihood_from_rbms, load_rbms

            _check_file(self.rbm.params_path, "RBM parameter file")
            return likelihood_from_rbms(load_rbms(self.rbm.params_path), self.train_config())
        if spec.preset == "toxic":
            return toxic_observation_model(spec.p_toxic_hateful, spec.p_toxic_benign)
        return diagonal_observation_model(self.n_states, spec.accuracy)

    def train_config(self):
        from social_learning.rbm_likelihood import TrainConfig

        return TrainConfig(
            epochs=self.rbm.epochs,
            learning_rate=self.rbm.learning_rate,
            cd_steps=self.rbm.cd_steps,
            gibbs_samples=self.rbm.gibbs_samples,
            gibbs_iterations=self.rbm.gibbs_iterations,
            n_hidden=self.rbm.n_hidden,
            rng_seed=self.seed,
        )

    def canonical(self) -> dict:
        """Configuration as plain data, the input of the provenance hash."""
        return self.model_dump(mode="json", exclude={"out"})


def load_experiment_config(path: str, **overrides) -> ExperimentConfig:
    """
    Load and validate a YAML experiment configuration.

    Args:
        path: YAML file path
        **overrides: Top-level fields replacing the file's values when not None

    Returns:
        Validated ExperimentConfig
    """
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {path} is not valid YAML: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a mapping")
    return build_experiment_config(data, **overrides)


def build_experiment_config(data: dict, **overrides) -> ExperimentConfig:
    data = {**data, **{key: value for key, value in overrides.items() if value is not None}}
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {e}")
    config.check_files()
    logger.info(f"Loaded {config.kind} config (seed {config.seed})")
    return config
