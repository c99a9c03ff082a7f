"""Social learning protocol, cascade detection and Monte Carlo herding sweeps."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from social_learning.belief_core import (
    TOLERANCE,
    Belief,
    CostModel,
    ObservationModel,
    _check_index,
    action_likelihood,
    bayes_update,
    filter_with_likelihood,
    likelihood_from_actions,
    myopic_action,
    observation_actions,
    validate_model,
)
from social_learning.exceptions import DimensionMismatch

logger = logging.getLogger(__name__)

# Belief entries below this are clamped before taking logs
LOG_FLOOR = 1e-12

HERDING_COLUMNS = ["true_state", "prior_p0", "mean_action", "cascade_freq", "mean_cascade_time"]


@dataclass(frozen=True)
class AgentTrace:
    """What one agent saw, did, and did to the public belief."""

    k: int
    y: int
    u: int
    public_belief_before: Belief
    public_belief_after: Belief
    gamma_max_abs: float
    in_cascade: bool
    gamma: Optional[np.ndarray] = None
    clamped: bool = False


@dataclass(frozen=True)
class CascadeDiagnostics:
    """Log belief ratios and their last increments at the end of a run."""

    lambda_: np.ndarray
    gamma: np.ndarray
    cascade_detected: bool
    cascade_time: Optional[int]
    kappa_floor: float
    clamped: bool = False


@dataclass(frozen=True)
class ProtocolConfig:
    true_state: int
    horizon: int
    initial_public_belief: Belief
    rng_seed: int = 0

    def __post_init__(self):
        if self.horizon < 1:
            raise DimensionMismatch(f"Horizon must be at least 1, got {self.horizon}")
        _check_index(self.true_state, self.initial_public_belief.n_states, "True state")


@dataclass
class ProtocolRun:
    traces: List[AgentTrace] = field(default_factory=list)
    diagnostics: Optional[CascadeDiagnostics] = None

    @property
    def actions(self) -> List[int]:
        return [trace.u for trace in self.traces]


def _clamped_log(values: np.ndarray) -> Tuple[np.ndarray, bool]:
    clamped = bool(np.any(values < LOG_FLOOR))
    return np.log(np.maximum(values, LOG_FLOOR)), clamped


def log_ratio_matrix(values: np.ndarray) -> Tuple[np.ndarray, bool]:
    """Matrix M[i, j] = log(values[i] / values[j]) with clamping at LOG_FLOOR.

    Returns the matrix and whether any entry had to be clamped.
    """
    logs, clamped = _clamped_log(np.asarray(values, dtype=float))
    return logs[:, None] - logs[None, :], clamped


def belief_log_ratios(belief: Belief) -> Tuple[np.ndarray, bool]:
    """Lambda(i, j) = log(pi(i) / pi(j))."""
    return log_ratio_matrix(belief.probs)


def gamma_increments(prior: Belief, obs_model: ObservationModel, cost: CostModel,
                     u: int) -> Tuple[np.ndarray, bool]:
    """Gamma(i, j) = log(P(u | x=i, prior) / P(u | x=j, prior))."""
    return log_ratio_matrix(action_likelihood(prior, obs_model, cost, u))


def sample_observation(true_state: int, obs_model: ObservationModel,
                       rng: np.random.Generator) -> int:
    """Draw y from row ``true_state`` of B by inverse-CDF sampling."""
    _check_index(true_state, obs_model.n_states, "True state")
    cdf = np.cumsum(obs_model.row(true_state))
    draw = rng.random() * cdf[-1]
    y = int(np.searchsorted(cdf, draw, side="right"))
    # Guard against draw landing on a trailing zero-mass bin
    return min(y, obs_model.n_observations - 1)


def detect_cascade(public_belief: Belief, obs_model: ObservationModel,
                   cost: CostModel) -> bool:
    """True when every observation leads to the same myopic action."""
    actions = observation_actions(public_belief, obs_model, cost)
    return bool(np.all(actions == actions[0]))


def agent_step(public_belief: Belief, true_state: int, obs_model: ObservationModel,
               cost: CostModel, rng: np.random.Generator, k: int = 1) -> AgentTrace:
    """
    One agent of the protocol: observe, act myopically, update the public belief.

    Args:
        public_belief: Public belief before the agent acts
        true_state: State generating the private observation
        obs_model: Observation likelihoods
        cost: Cost table
        rng: Generator owned by the run
        k: Step index (1-based)

    Returns:
        AgentTrace for this step
    """
    actions = observation_actions(public_belief, obs_model, cost)
    in_cascade = bool(np.all(actions == actions[0]))
    y = sample_observation(true_state, obs_model, rng)
    private_posterior = bayes_update(public_belief, obs_model, y)
    u = myopic_action(private_posterior, cost)
    likelihood = likelihood_from_actions(actions, obs_model, u)
    after = filter_with_likelihood(public_belief, likelihood, u)
    gamma, clamped = log_ratio_matrix(likelihood)
    return AgentTrace(
        k=k,
        y=y,
        u=u,
        public_belief_before=public_belief,
        public_belief_after=after,
        gamma_max_abs=float(np.max(np.abs(gamma))),
        in_cascade=in_cascade,
        gamma=gamma,
        clamped=clamped,
    )


def run_protocol(config: ProtocolConfig, obs_model: ObservationModel,
                 cost: CostModel) -> ProtocolRun:
    """Run ``config.horizon`` agents, threading the public belief."""
    validate_model(obs_model, cost)
    rng = np.random.default_rng(config.rng_seed)
    belief = config.initial_public_belief
    run = ProtocolRun()
    kappa_floor = math.inf
    gamma = np.zeros((obs_model.n_states, obs_model.n_states))
    clamped = False

    trace = None
    for k in range(1, config.horizon + 1):
        if trace is not None and trace.in_cascade:
            # Frozen public belief: only the private observation changes
            trace = replace(trace, k=k, y=sample_observation(config.true_state, obs_model, rng))
        else:
            trace = agent_step(belief, config.true_state, obs_model, cost, rng, k=k)
        run.traces.append(trace)
        gamma = trace.gamma
        clamped = clamped or trace.clamped
        if not trace.in_cascade and trace.gamma_max_abs > TOLERANCE:
            positive = np.abs(gamma)[np.abs(gamma) > TOLERANCE]
            kappa_floor = min(kappa_floor, float(positive.min()))
        belief = trace.public_belief_after

    final_cascade = detect_cascade(belief, obs_model, cost)
    lambda_, lambda_clamped = belief_log_ratios(belief)
    run.diagnostics = CascadeDiagnostics(
        lambda_=lambda_,
        gamma=np.zeros_like(gamma) if final_cascade else gamma,
        cascade_detected=final_cascade,
        cascade_time=_cascade_time(run.traces, final_cascade),
        kappa_floor=kappa_floor,
        clamped=clamped or lambda_clamped,
    )
    return run


def _cascade_time(traces: Sequence[AgentTrace], final_cascade: bool) -> Optional[int]:
    if not final_cascade:
        return None
    cascade_time = len(traces) + 1
    for trace in reversed(traces):
        if not trace.in_cascade:
            break
        cascade_time = trace.k
    return cascade_time


def initial_prior(prior_p0: float, true_state: int, n_states: int,
                  allocation: str = "true_state") -> Belief:
    """Prior with mass ``prior_p0`` on state 0 and the rest allocated.

    ``true_state`` puts the residual mass on the true state (a point mass on
    state 0 when the true state is 0); ``uniform`` spreads it over states
    1..X-1.
    """
    probs = np.zeros(n_states)
    probs[0] = prior_p0
    residual = 1.0 - prior_p0
    if allocation == "true_state":
        probs[true_state] += residual
    elif allocation == "uniform":
        probs[1:] += residual / (n_states - 1)
    else:
        raise ValueError(f"Unknown prior allocation: {allocation}")
    return Belief(probs)


def derive_seed(master_seed: int, *indices: int) -> np.random.SeedSequence:
    """Seed for one run, a pure function of the master seed and its indices."""
    return np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, indices)])


def _run_cell(args) -> dict:
    (cell_index, true_state, prior_p0, n_runs, horizon, obs_model, cost,
     master_seed, allocation) = args
    prior = initial_prior(prior_p0, true_state, obs_model.n_states, allocation)
    mean_actions = []
    cascade_times = []
    for run_index in range(n_runs):
        seed = derive_seed(master_seed, *cell_index, run_index)
        config = ProtocolConfig(
            true_state=true_state,
            horizon=horizon,
            initial_public_belief=prior,
            rng_seed=int(seed.generate_state(1, dtype=np.uint64)[0]),
        )
        run = run_protocol(config, obs_model, cost)
        mean_actions.append(float(np.mean(run.actions)))
        if run.diagnostics.cascade_detected:
            cascade_times.append(run.diagnostics.cascade_time)
    return {
        "true_state": true_state,
        "prior_p0": prior_p0,
        "mean_action": float(np.mean(mean_actions)),
        "cascade_freq": len(cascade_times) / n_runs,
        "mean_cascade_time": float(np.mean(cascade_times)) if cascade_times else float("nan"),
    }


def monte_carlo_herding(prior_grid: Iterable[float], true_states: Iterable[int], n_runs: int,
                        horizon: int, obs_model: ObservationModel, cost: CostModel,
                        master_seed: int = 0, allocation: str = "true_state",
                        workers: int = 1) -> pd.DataFrame:
    """
    Average action, cascade frequency and cascade time over a prior x state grid.

    Args:
        prior_grid: Values of the initial prior probability of state 0
        true_states: States generating the observations
        n_runs: Independent runs per cell
        horizon: Agents per run
        obs_model: Observation likelihoods
        cost: Cost table
        master_seed: Seed from which every run's seed is derived
        allocation: Where the residual prior mass goes (see ``initial_prior``)
        workers: Worker processes; 1 runs in-process

    Returns:
        DataFrame with one row per (true_state, prior_p0) cell
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be at least 1, got {n_runs}")
    validate_model(obs_model, cost)
    priors = [float(p) for p in prior_grid]
    states = [int(s) for s in true_states]
    tasks = [
        ((i, j), state, p0, n_runs, horizon, obs_model, cost, master_seed, allocation)
        for i, state in enumerate(states)
        for j, p0 in enumerate(priors)
    ]
    logger.info(f"Herding sweep: {len(tasks)} cells x {n_runs} runs, horizon {horizon}")

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_cell, tasks))
    else:
        rows = []
        for task in tasks:
            rows.append(_run_cell(task))
            logger.debug(f"Finished cell state={task[1]} p0={task[2]}")

    table = pd.DataFrame(rows, columns=HERDING_COLUMNS)
    return table.sort_values(["true_state", "prior_p0"], kind="mergesort").reset_index(drop=True)
