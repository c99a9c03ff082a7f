"""Quickest-time herding: stopping costs, threshold policies and their solvers.

Decisions follow the threshold rule: 2 means continue (the agent reveals its
observation by playing u = y), 1 means stop (every later agent herds on the
myopic action of the public belief).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import SPSA_GAINS
from social_learning.belief_core import (
    TOLERANCE,
    Belief,
    CostModel,
    ObservationModel,
    _check_index,
    bayes_update,
    expected_costs,
    myopic_action,
    validate_model,
)
from social_learning.cascade_sim import sample_observation
from social_learning.exceptions import DimensionMismatch, NonConvergence

logger = logging.getLogger(__name__)

STOP = 1
CONTINUE = 2

# Minors above this negative slack count as nonnegative
TP2_SLACK = 1e-12
DISCOUNT_FLOOR = 1e-14

THRESHOLD_COLUMNS = ["gamma", "prior_p0", "pct_not_flagged"]
ORACLE_COLUMNS = ["belief_gridpoint", "value", "decision"]


@dataclass(frozen=True)
class StoppingCostParams:
    rho: float
    d: float
    delta: float
    target_state: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"Discount factor must lie in [0, 1), got {self.rho}")
        if self.d < 0.0 or self.delta < 0.0:
            raise ValueError("Delay and error costs must be nonnegative")


@dataclass(frozen=True)
class ThresholdPolicy:
    """Continue while pi(0) <= gamma, stop once pi(0) > gamma."""

    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"Threshold must lie in [0, 1], got {self.gamma}")


@dataclass
class EpisodeResult:
    tau: int
    cost: float
    actions: List[Tuple[int, int]] = field(default_factory=list)
    stopped: bool = True

    def fraction_of_action(self, u: int) -> float:
        if not self.actions:
            return 0.0
        return sum(1 for _, action in self.actions if action == u) / len(self.actions)


@dataclass
class SpsaSettings:
    """Gain schedule a_n = a / (n + A)^alpha, c_n = c / n^gamma."""

    a: float = SPSA_GAINS["a"]
    big_a: float = SPSA_GAINS["A"]
    c: float = SPSA_GAINS["c"]
    alpha: float = SPSA_GAINS["alpha"]
    gamma: float = SPSA_GAINS["gamma"]

    def step_size(self, n: int) -> float:
        return self.a / (n + self.big_a) ** self.alpha

    def perturbation(self, n: int) -> float:
        return self.c / n ** self.gamma


@dataclass
class OracleSolution:
    grid: np.ndarray
    values: np.ndarray
    decisions: np.ndarray
    sweeps: int

    def switching_points(self) -> List[float]:
        """Grid points at which the decision differs from its left neighbour."""
        changes = np.flatnonzero(np.diff(self.decisions) != 0) + 1
        return [float(self.grid[i]) for i in changes]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "belief_gridpoint": self.grid,
            "value": self.values,
            "decision": self.decisions.astype(int),
        }, columns=ORACLE_COLUMNS)


@dataclass
class StructureReport:
    s1: bool
    s2: bool
    s3: bool
    s4: bool
    violations: List[Dict[str, object]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {"S1": self.s1, "S2": self.s2, "S3": self.s3, "S4": self.s4,
                "violations": self.violations}


# ---------------------------------------------------------------------------
# Costs and decisions
# ---------------------------------------------------------------------------

def _require_reveal(obs_model: ObservationModel, cost: CostModel) -> None:
    if obs_model.n_observations > cost.n_actions:
        raise DimensionMismatch(
            f"Revealing needs every observation to be an action: "
            f"{obs_model.n_observations} observations, {cost.n_actions} actions"
        )


def stop_cost(belief: Belief, cost: CostModel, params: StoppingCostParams) -> float:
    """C(pi, 1): discounted cost of herding forever on the myopic action."""
    return float(np.min(expected_costs(belief, cost))) / (1.0 - params.rho)


def reveal_cost(belief: Belief, obs_model: ObservationModel, cost: CostModel) -> float:
    """Expected one-step cost of playing u = y: sum_y c_y' B_y pi."""
    _require_reveal(obs_model, cost)
    n_obs = obs_model.n_observations
    per_state = (cost.c[:, :n_obs] * obs_model.b).sum(axis=1)
    return float(per_state @ belief.probs)


def continue_cost(belief: Belief, obs_model: ObservationModel, cost: CostModel,
                  params: StoppingCostParams) -> float:
    """C(pi, 2): reveal cost plus the transformed delay and error terms."""
    _check_index(params.target_state, belief.n_states, "Target state")
    penalty = (params.d + (1.0 - params.rho) * params.delta) * belief[params.target_state]
    return reveal_cost(belief, obs_model, cost) + penalty - (1.0 - params.rho) * params.delta


def constrained_decision(public_belief: Belief, y: int, a: int, cost: CostModel) -> int:
    """Action under decision a: reveal y (a = 2) or herd on the myopic action (a = 1)."""
    if a == CONTINUE:
        _check_index(y, cost.n_actions, "Revealed observation as action")
        return y
    if a == STOP:
        return myopic_action(public_belief, cost)
    raise ValueError(f"Decision must be 1 or 2, got {a}")


def threshold_decide(public_belief: Belief, policy: ThresholdPolicy) -> int:
    return CONTINUE if public_belief[0] <= policy.gamma else STOP


def _terminal_term(belief: Belief, cost: CostModel, params: StoppingCostParams) -> float:
    return params.delta * (1.0 - belief[params.target_state]) + stop_cost(belief, cost, params)


def _running_term(belief: Belief, obs_model: ObservationModel, cost: CostModel,
                  params: StoppingCostParams) -> float:
    return reveal_cost(belief, obs_model, cost) + params.d * belief[params.target_state]


# ---------------------------------------------------------------------------
# Simulation and evaluation
# ---------------------------------------------------------------------------

def simulate_stopping_run(initial_belief: Belief, true_state: int, policy: ThresholdPolicy,
                          obs_model: ObservationModel, cost: CostModel,
                          params: StoppingCostParams, horizon_cap: int,
                          rng: np.random.Generator) -> EpisodeResult:
    """
    Play one episode of the reveal-or-herd protocol under a threshold policy.

    Conditional expectations in the welfare cost are taken from the current
    public belief, so the realized cost depends on the observations only
    through the beliefs they produce.

    Args:
        initial_belief: Public belief before the first agent
        true_state: State generating the observations
        policy: Threshold policy
        obs_model: Observation likelihoods
        cost: Cost table
        params: Discount, delay and error parameters
        horizon_cap: Number of agents simulated
        rng: Generator owned by the episode

    Returns:
        EpisodeResult with the stopping time, discounted cost and (a_k, u_k) log
    """
    if horizon_cap < 1:
        raise ValueError(f"Horizon cap must be at least 1, got {horizon_cap}")
    validate_model(obs_model, cost)
    _require_reveal(obs_model, cost)

    belief = initial_belief
    total = 0.0
    discount = 1.0
    actions: List[Tuple[int, int]] = []
    for k in range(1, horizon_cap + 1):
        if threshold_decide(belief, policy) == STOP:
            total += discount * _terminal_term(belief, cost, params)
            herd_action = myopic_action(belief, cost)
            actions.extend((STOP, herd_action) for _ in range(horizon_cap - k + 1))
            return EpisodeResult(tau=k, cost=total, actions=actions)

        total += discount * _running_term(belief, obs_model, cost, params)
        y = sample_observation(true_state, obs_model, rng)
        actions.append((CONTINUE, constrained_decision(belief, y, CONTINUE, cost)))
        belief = bayes_update(belief, obs_model, y)
        discount *= params.rho

    return EpisodeResult(tau=horizon_cap + 1, cost=total, actions=actions, stopped=False)


def evaluate_welfare_cost(initial_belief: Belief, policy: ThresholdPolicy,
                          obs_model: ObservationModel, cost: CostModel,
                          params: StoppingCostParams, n_episodes: int, horizon_cap: int,
                          rng: np.random.Generator) -> float:
    """Monte Carlo estimate of J_mu(pi); the true state is drawn from the belief."""
    if n_episodes < 1:
        raise ValueError(f"n_episodes must be at least 1, got {n_episodes}")
    costs = np.empty(n_episodes)
    # One generator per episode so episodes can be farmed out independently
    seeds = rng.integers(0, 2**63 - 1, size=n_episodes)
    for i, seed in enumerate(seeds):
        episode_rng = np.random.default_rng(int(seed))
        true_state = int(episode_rng.choice(initial_belief.n_states, p=initial_belief.probs))
        episode = simulate_stopping_run(initial_belief, true_state, policy, obs_model,
                                        cost, params, horizon_cap, episode_rng)
        costs[i] = episode.cost
    return float(costs.mean())


def exact_welfare_cost(initial_belief: Belief, policy: ThresholdPolicy,
                       obs_model: ObservationModel, cost: CostModel,
                       params: StoppingCostParams, max_depth: int = 200) -> float:
    """
    J_mu(pi) by expanding the observation tree of a threshold policy.

    Beliefs reached along different paths are shared through memoization, so
    the expansion stays small whenever the number of distinct beliefs does.
    Paths still continuing at ``max_depth``, or once rho**depth is negligible, are truncated.
    """
    validate_model(obs_model, cost)
    _require_reveal(obs_model, cost)
    memo: Dict[Tuple[bytes, int], float] = {}

    def value(belief: Belief, depth: int) -> float:
        if threshold_decide(belief, policy) == STOP:
            return _terminal_term(belief, cost, params)
        if depth >= max_depth or params.rho ** depth < DISCOUNT_FLOOR:
            return 0.0
        key = (np.round(belief.probs, 15).tobytes(), depth)
        if key in memo:
            return memo[key]
        predictive = belief.probs @ obs_model.b
        continuation = 0.0
        for y in np.flatnonzero(predictive > 0.0):
            continuation += predictive[y] * value(bayes_update(belief, obs_model, int(y)),
                                                  depth + 1)
        result = _running_term(belief, obs_model, cost, params) + params.rho * continuation
        memo[key] = result
        return result

    return value(initial_belief, 0)


def sweep_thresholds(gammas: Sequence[float], initial_beliefs: Sequence[Belief],
                     evaluate: Callable[[Belief, ThresholdPolicy], float],
                     tolerance: float = 1e-9) -> Tuple[pd.DataFrame, float]:
    """
    Evaluate a grid of thresholds, averaging the welfare cost over initial beliefs.

    Args:
        gammas: Thresholds to evaluate
        initial_beliefs: Beliefs the average is taken over
        evaluate: Welfare cost of a policy from one initial belief
        tolerance: Slack under which two costs count as tied

    Returns:
        Table with columns gamma and welfare_cost, and the midpoint of the
        thresholds whose cost is within ``tolerance`` of the minimum
    """
    if not initial_beliefs:
        raise ValueError("sweep_thresholds needs at least one initial belief")
    costs = [
        float(np.mean([evaluate(belief, ThresholdPolicy(float(g))) for belief in initial_beliefs]))
        for g in gammas
    ]
    table = pd.DataFrame({"gamma": list(gammas), "welfare_cost": costs})
    best = table["welfare_cost"].min()
    minimizers = table.loc[table["welfare_cost"] <= best + tolerance, "gamma"]
    return table, float((minimizers.min() + minimizers.max()) / 2.0)


def spsa_optimize_threshold(initial_gamma: float, evaluate: Callable[[float], float],
                            iterations: int, settings: Optional[SpsaSettings] = None,
                            rng: Optional[np.random.Generator] = None,
                            history: Optional[List[float]] = None) -> ThresholdPolicy:
    """
    Search the threshold with simultaneous perturbation stochastic approximation.

    Args:
        initial_gamma: Starting threshold
        evaluate: Objective J(gamma), typically a wrapper of evaluate_welfare_cost
        iterations: Number of SPSA iterations
        settings: Gain schedule
        rng: Generator for the perturbation signs
        history: Optional list receiving every iterate

    Returns:
        ThresholdPolicy at the final iterate
    """
    if iterations < 1:
        raise ValueError(f"iterations must be at least 1, got {iterations}")
    settings = settings or SpsaSettings()
    rng = rng if rng is not None else np.random.default_rng()
    gamma = float(np.clip(initial_gamma, 0.0, 1.0))

    for n in range(1, iterations + 1):
        direction = 1.0 if rng.integers(0, 2) else -1.0
        spread = settings.perturbation(n) * direction
        plus = float(np.clip(gamma + spread, 0.0, 1.0))
        minus = float(np.clip(gamma - spread, 0.0, 1.0))
        if plus == minus:
            gradient = 0.0
        else:
            gradient = (evaluate(plus) - evaluate(minus)) / (plus - minus)
        gamma = float(np.clip(gamma - settings.step_size(n) * gradient, 0.0, 1.0))
        if history is not None:
            history.append(gamma)
        logger.debug(f"SPSA iteration {n}: gamma={gamma:.6f} gradient={gradient:.6f}")

    return ThresholdPolicy(gamma)


# ---------------------------------------------------------------------------
# Value iteration oracle (two states)
# ---------------------------------------------------------------------------

def value_iteration_oracle(resolution: int, obs_model: ObservationModel, cost: CostModel,
                           params: StoppingCostParams, tolerance: float = 1e-8,
                           max_sweeps: int = 100_000) -> OracleSolution:
    """
    Optimal stopping values on a grid over pi(0) for a two-state model.

    The Bellman operator runs on the transformed costs C(pi, 1) and C(pi, 2)
    with linear interpolation between grid points. Returned values add back
    delta * (1 - pi(target)), so they are welfare costs J*(pi). Ties go to
    stopping.

    Raises:
        NonConvergence: if the sup-norm change stays above ``tolerance``
    """
    if obs_model.n_states != 2:
        raise DimensionMismatch("The value iteration oracle needs exactly two states")
    if resolution < 16:
        raise ValueError(f"Grid resolution must be at least 16, got {resolution}")
    validate_model(obs_model, cost)
    _require_reveal(obs_model, cost)

    grid = np.linspace(0.0, 1.0, resolution)
    beliefs = [Belief([p, 1.0 - p]) for p in grid]
    stop_values = np.array([stop_cost(b, cost, params) for b in beliefs])
    continue_values = np.array([continue_cost(b, obs_model, cost, params) for b in beliefs])

    # Predictive probabilities and posterior pi(0) for every grid point and observation
    n_obs = obs_model.n_observations
    predictive = np.zeros((resolution, n_obs))
    posterior_p0 = np.zeros((resolution, n_obs))
    for i, belief in enumerate(beliefs):
        for y in range(n_obs):
            predictive[i, y] = obs_model.b[:, y] @ belief.probs
            if predictive[i, y] > 0.0:
                posterior_p0[i, y] = bayes_update(belief, obs_model, y)[0]

    values = stop_values.copy()
    for sweep in range(1, max_sweeps + 1):
        continuation = np.zeros(resolution)
        for y in range(n_obs):
            continuation += predictive[:, y] * np.interp(posterior_p0[:, y], grid, values)
        updated = np.minimum(stop_values, continue_values + params.rho * continuation)
        change = float(np.max(np.abs(updated - values)))
        values = updated
        if change < tolerance:
            break
    else:
        raise NonConvergence(
            f"Value iteration did not converge in {max_sweeps} sweeps (last change {change:.3e})"
        )

    continuation = np.zeros(resolution)
    for y in range(n_obs):
        continuation += predictive[:, y] * np.interp(posterior_p0[:, y], grid, values)
    decisions = np.where(stop_values <= continue_values + params.rho * continuation,
                         STOP, CONTINUE)
    target_mass = np.array([b[params.target_state] for b in beliefs])
    welfare = values + params.delta * (1.0 - target_mass)
    logger.info(f"Value iteration converged after {sweep} sweeps on a {resolution}-point grid")
    return OracleSolution(grid=grid, values=welfare, decisions=decisions, sweeps=sweep)


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

def is_tp2(matrix: np.ndarray) -> bool:
    """True when every 2x2 minor is at least -1e-12."""
    return not _negative_minors(np.asarray(matrix, dtype=float))


def _negative_minors(matrix: np.ndarray) -> List[Tuple[int, int, int, int, float]]:
    rows, cols = matrix.shape
    bad = []
    for i in range(rows):
        for j in range(i + 1, rows):
            for k in range(cols):
                for l in range(k + 1, cols):
                    minor = matrix[i, k] * matrix[j, l] - matrix[i, l] * matrix[j, k]
                    if minor < -TP2_SLACK:
                        bad.append((i, j, k, l, float(minor)))
    return bad


def mlr_dominates(p1: Belief, p2: Belief) -> bool:
    """p1 >=_r p2: p1(i) p2(j) <= p1(j) p2(i) for all i < j."""
    if p1.n_states != p2.n_states:
        raise DimensionMismatch("Beliefs have different dimensions")
    a, b = p1.probs, p2.probs
    # lhs[i, j] = a_i b_j, rhs[i, j] = a_j b_i
    lhs = np.outer(a, b)
    upper = np.triu_indices(a.size, k=1)
    return bool(np.all(lhs[upper] <= lhs.T[upper] + TOLERANCE))


def fosd_dominates(p1: Belief, p2: Belief) -> bool:
    """p1 >=_s p2: every upper tail sum of p1 is at least that of p2."""
    if p1.n_states != p2.n_states:
        raise DimensionMismatch("Beliefs have different dimensions")
    tail1 = np.cumsum(p1.probs[::-1])[::-1]
    tail2 = np.cumsum(p2.probs[::-1])[::-1]
    return bool(np.all(tail1 >= tail2 - TOLERANCE))


def check_structural_assumptions(cost: CostModel, obs_model: ObservationModel,
                                 params: StoppingCostParams) -> StructureReport:
    """
    Evaluate the S1-S4 inequalities as stated, listing every violated instance.

    S1: c(e_i, u) - c(e_{i+1}, u) >= 0
    S2: c(e_X, u) - c(e_i, u) >= (1 - rho) sum_y (c(e_X, u) B_{X,y} - c(e_i, u) B_{i,y})
    S3: (1 - rho) sum_y (c(e_1, u) B_{1,y} - c(e_i, u) B_{i,y}) >= c(e_1, u) - c(e_i, u)
    S4: B is TP2
    """
    validate_model(obs_model, cost)
    c, b, rho = cost.c, obs_model.b, params.rho
    n_states, n_actions = c.shape
    row_mass = b.sum(axis=1)
    last, first = n_states - 1, 0
    violations: List[Dict[str, object]] = []

    def record(assumption: str, i: int, u: int, lhs: float, rhs: float) -> None:
        violations.append({"assumption": assumption, "state": i, "action": u,
                           "lhs": float(lhs), "rhs": float(rhs)})

    for u in range(n_actions):
        for i in range(n_states - 1):
            lhs = c[i, u] - c[i + 1, u]
            if lhs < -TOLERANCE:
                record("S1", i, u, lhs, 0.0)
        for i in range(n_states):
            lhs = c[last, u] - c[i, u]
            rhs = (1.0 - rho) * (c[last, u] * row_mass[last] - c[i, u] * row_mass[i])
            if lhs < rhs - TOLERANCE:
                record("S2", i, u, lhs, rhs)
            lhs = (1.0 - rho) * (c[first, u] * row_mass[first] - c[i, u] * row_mass[i])
            rhs = c[first, u] - c[i, u]
            if lhs < rhs - TOLERANCE:
                record("S3", i, u, lhs, rhs)

    for i, j, k, l, minor in _negative_minors(b):
        violations.append({"assumption": "S4", "rows": [i, j], "columns": [k, l],
                           "minor": minor})

    failed = {v["assumption"] for v in violations}
    return StructureReport(
        s1="S1" not in failed,
        s2="S2" not in failed,
        s3="S3" not in failed,
        s4="S4" not in failed,
        violations=violations,
    )
