"""Decision rules: the solved policy, four benchmarks, and a tabular-Q learner.

Schedulers are stateful (round-robin cursors, chain state, learned tables)
and belong to a single simulation run; `decide` maps an observation to the
set of attribute ids to query this slot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig
from .env import Observation, Simulator
from .errors import CapacityError, ContractError, InfeasibleError
from .solver import Policy, sample_action


def importance_weights(config: SystemConfig) -> dict[int, float]:
    """Attribute weight: how many actuation agents require it."""
    weights = {m: 0.0 for m in config.relevant_attributes()}
    for subset in config.required_sets:
        for m in subset:
            weights[m] += 1.0
    return weights


class PolicyScheduler:
    def __init__(self, policy: Policy, config: SystemConfig):
        self.policy = policy
        self.actions = (0,) + config.relevant_attributes()
        self.n_states = (config.max_aoi * len(config.usefulness.levels)) ** len(
            config.relevant_attributes()
        )

    def decide(self, obs: Observation, t: int, rng) -> tuple[int, ...]:
        if not 0 <= obs.state_index < self.n_states:
            raise ContractError(f"state index {obs.state_index} out of range")
        a = sample_action(self.policy, obs.state_index, rng)
        return () if a == 0 else (self.actions[a],)


class WrrScheduler:
    """Smooth weighted round-robin; queries every slot."""

    def __init__(self, weights: dict[int, float], limit: int):
        self.attrs = tuple(sorted(weights))
        total = sum(weights.values())
        self.shares = np.asarray([weights[m] / total for m in self.attrs])
        self.credit = np.zeros(len(self.attrs))
        self.limit = min(limit, len(self.attrs))

    def decide(self, obs, t, rng) -> tuple[int, ...]:
        self.credit += self.shares * self.limit
        order = sorted(range(len(self.attrs)), key=lambda i: (-self.credit[i], i))
        chosen = order[: self.limit]
        for i in chosen:
            self.credit[i] -= 1.0
        return tuple(sorted(self.attrs[i] for i in chosen))


class LwgfScheduler:
    """Query the attributes whose weighted previous-slot grade is lowest."""

    def __init__(self, weights: dict[int, float], limit: int):
        self.attrs = tuple(sorted(weights))
        self.weights = np.asarray([weights[m] for m in self.attrs])
        self.limit = min(limit, len(self.attrs))

    def decide(self, obs: Observation, t, rng) -> tuple[int, ...]:
        scored = self.weights * obs.goe_components
        order = sorted(range(len(self.attrs)), key=lambda i: (scored[i], i))
        return tuple(sorted(self.attrs[i] for i in order[: self.limit]))


class UniformScheduler:
    def __init__(self, relevant: tuple[int, ...], limit: int):
        self.attrs = relevant
        self.limit = min(limit, len(relevant))

    def decide(self, obs, t, rng) -> tuple[int, ...]:
        picks = rng.choice(len(self.attrs), size=self.limit, replace=False)
        return tuple(sorted(self.attrs[i] for i in picks))


class MarkovianScheduler:
    """Two-state query/idle chain whose stationary query rate is q_rate.

    p(query | query) = rho + (1 - rho) * q_rate and
    p(query | idle) = (1 - rho) * q_rate; attributes rotate round-robin.
    """

    def __init__(self, rho: float, q_rate: float, relevant: tuple[int, ...], limit: int):
        self.rho = rho
        self.q_rate = q_rate
        self.attrs = relevant
        self.limit = min(limit, len(relevant))
        self.cursor = 0
        self.querying: bool | None = None  # drawn from the stationary law first

    def decide(self, obs, t, rng) -> tuple[int, ...]:
        if self.querying is None:
            self.querying = bool(rng.random() < self.q_rate)
        else:
            p = self.rho + (1 - self.rho) * self.q_rate if self.querying else (
                1 - self.rho
            ) * self.q_rate
            self.querying = bool(rng.random() < p)
        if not self.querying:
            return ()
        block = []
        for _ in range(self.limit):
            block.append(self.attrs[self.cursor])
            self.cursor = (self.cursor + 1) % len(self.attrs)
        return tuple(sorted(block))


class TabularQScheduler:
    def __init__(self, q_values: np.ndarray, config: SystemConfig):
        self.q_values = q_values
        self.actions = (0,) + config.relevant_attributes()

    def decide(self, obs: Observation, t, rng) -> tuple[int, ...]:
        a = int(np.argmax(self.q_values[obs.state_index]))
        return () if a == 0 else (self.actions[a],)


def make_scheduler(config: SystemConfig, kind: str, *, policy: Policy | None = None,
                   q_values: np.ndarray | None = None, weights=None,
                   rho: float | None = None, q_rate: float | None = None):
    relevant = config.relevant_attributes()
    limit = config.query_limit
    settings = config.scheduler
    if weights is None:
        if settings.weights is not None:
            weights = {m: w for m, w in zip(relevant, settings.weights)}
        else:
            weights = importance_weights(config)
    if kind == "policy":
        if policy is None:
            raise ContractError("policy scheduler needs a solved policy")
        return PolicyScheduler(policy, config)
    if kind == "wrr":
        return WrrScheduler(weights, limit)
    if kind == "lwgf":
        return LwgfScheduler(weights, limit)
    if kind == "uniform":
        return UniformScheduler(relevant, limit)
    if kind == "markovian":
        rho = settings.rho if rho is None else rho
        if q_rate is None:
            q_rate = settings.q_rate if settings.q_rate is not None else config.cost_flex
        return MarkovianScheduler(rho, q_rate, relevant, limit)
    if kind == "tabular_q":
        if q_values is None:
            raise ContractError("tabular_q scheduler needs a trained table")
        return TabularQScheduler(q_values, config)
    raise ContractError(f"unknown scheduler kind {kind!r}")


# ---------------------------------------------------------------------------
# Tabular Q-learning stand-in for the learned schedulers


@dataclass
class QTable:
    values: np.ndarray  # (n_states, n_actions)
    visits: np.ndarray

    def greedy_policy(self) -> Policy:
        return Policy(kind="deterministic", table=np.argmax(self.values, axis=1))

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["state", "action", "value", "visits"])
            for s in range(self.values.shape[0]):
                for a in range(self.values.shape[1]):
                    writer.writerow([s, a, repr(float(self.values[s, a])),
                                     int(self.visits[s, a])])


def _schedule(spec, fraction: float) -> float:
    if isinstance(spec, (tuple, list)):
        start, end = spec
        return start + (end - start) * fraction
    return float(spec)


def train_tabular_q(config: SystemConfig, mu: float, episodes: int,
                    steps_per_episode: int, learning_rate=(0.5, 0.05),
                    exploration=(1.0, 0.05), seed: int | None = None) -> tuple[QTable, Policy]:
    """One-step temporal-difference learning against the simulator.

    Rewards are the net slot rewards at the given multiplier; exploration and
    the learning rate interpolate linearly over the total step count when
    given as (start, end) pairs.
    """
    if config.query_limit != 1:
        raise ContractError("tabular Q-learning supports a query limit of 1 only")
    sim = Simulator(config)
    relevant = config.relevant_attributes()
    n_states = (config.max_aoi * len(config.usefulness.levels)) ** len(relevant)
    if n_states > config.max_states:
        raise CapacityError(f"{n_states} states exceed the configured cap")
    n_actions = len(relevant) + 1
    actions = (0,) + relevant

    table = QTable(
        values=np.zeros((n_states, n_actions)),
        visits=np.zeros((n_states, n_actions), dtype=np.int64),
    )
    rng = np.random.default_rng(config.seed if seed is None else seed)
    total = max(episodes * steps_per_episode, 1)
    done = 0
    for ep in range(episodes):
        state = sim.reset(int(rng.integers(2**32)))
        s = sim.observe(state).state_index
        for _ in range(steps_per_episode):
            frac = done / total
            eps = _schedule(exploration, frac)
            lr = _schedule(learning_rate, frac)
            if rng.random() < eps:
                a = int(rng.integers(n_actions))
            else:
                a = int(np.argmax(table.values[s]))
            state, _ = sim.step(state, actions[a])
            s_next = sim.observe(state).state_index
            r = sim.slot_reward(actions[a], state, mu)
            target = r + config.discount * float(np.max(table.values[s_next]))
            table.values[s, a] += lr * (target - table.values[s, a])
            table.visits[s, a] += 1
            s = s_next
            done += 1
    return table, table.greedy_policy()


def solve_tabular_q(config: SystemConfig, episodes: int = 40,
                    steps_per_episode: int = 2000, seed: int | None = None,
                    **train_kwargs):
    """Budget-respecting tabular-Q policy via the same outer bisection loop.

    The learner itself never sees the kernel; only the feasibility test of
    the outer loop scores greedy policies analytically.
    """
    from .cmdp import build_transitions
    from .config import max_budget
    from .solver import Policy as _P
    from .solver import _cost_vector

    table = build_transitions(config)
    budget = max_budget(config)

    def learn(mu):
        _, policy = train_tabular_q(
            config, mu, episodes, steps_per_episode, seed=seed, **train_kwargs
        )
        cost = float(_cost_vector(table, policy.table, config)[0])
        return policy, cost

    pol0, cost0 = learn(0.0)
    if cost0 <= budget:
        return 0.0, pol0
    mu_lo, mu_hi = 0.0, config.mu_hi_init
    pol_lo, pol_hi, cost_hi = pol0, None, None
    cost_lo = cost0
    while True:
        pol_hi, cost_hi = learn(mu_hi)
        if cost_hi <= budget:
            break
        mu_lo, pol_lo, cost_lo = mu_hi, pol_hi, cost_hi
        mu_hi *= 2.0
        if mu_hi > 2.0**20:
            raise InfeasibleError("no multiplier satisfies the budget")
    mu_mid = mu_hi
    while mu_hi - mu_lo >= config.mu_tolerance:
        mu_mid = (mu_lo + mu_hi) / 2.0
        pol_mid, cost_mid = learn(mu_mid)
        if cost_mid >= budget:
            mu_lo, pol_lo, cost_lo = mu_mid, pol_mid, cost_mid
        else:
            mu_hi, pol_hi, cost_hi = mu_mid, pol_mid, cost_mid
    if cost_hi < budget and cost_lo > cost_hi:
        eta = float(np.clip((budget - cost_hi) / (cost_lo - cost_hi), 0.0, 1.0))
        return mu_mid, _P(
            kind="mixture", table_minus=pol_lo.table, table_plus=pol_hi.table, eta=eta
        )
    return mu_mid, pol_hi
