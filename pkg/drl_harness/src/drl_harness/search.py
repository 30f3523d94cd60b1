"""Bisection on the cost multiplier with Monte-Carlo feasibility tests.

The learner never sees the transition model: each candidate multiplier
trains a fresh policy through the gateway and its discounted query cost is
estimated from greedy rollouts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spec import TrainSpec
from .train import TrainResult, rollout_metrics, train

MU_DOUBLING_CAP = 2.0**20


class BracketNotFound(RuntimeError):
    pass


@dataclass
class SearchResult:
    mu_star: float
    result: TrainResult  # the feasible-side training run
    eta: float  # probability of the infeasible-side table per slot
    table_minus: np.ndarray | None
    cost: float  # Monte-Carlo discounted cost of the returned policy
    outer_steps: int


def bisect_mu(spec: TrainSpec, clients, budget: float, tolerance: float = 1e-6,
              mu_hi_init: float = 16.0, rollout_episodes: int = 20,
              rollout_steps: int = 300, seed: int = 0) -> SearchResult:
    gamma = clients[0].spec()["gamma"]

    def learn(mu):
        result = train(spec, clients, mu, seed=seed)
        metrics = rollout_metrics(
            clients[0], result.policy_table, rollout_episodes, rollout_steps, gamma, mu
        )
        return result, metrics["discounted_cost"]

    res0, cost0 = learn(0.0)
    if cost0 <= budget:
        return SearchResult(0.0, res0, 0.0, None, cost0, 0)

    mu_lo, res_lo, cost_lo = 0.0, res0, cost0
    mu_hi = mu_hi_init
    while True:
        res_hi, cost_hi = learn(mu_hi)
        if cost_hi <= budget:
            break
        mu_lo, res_lo, cost_lo = mu_hi, res_hi, cost_hi
        mu_hi *= 2.0
        if mu_hi > MU_DOUBLING_CAP:
            raise BracketNotFound("no multiplier satisfies the budget")

    outer = 0
    mu_mid = mu_hi
    while mu_hi - mu_lo >= tolerance:
        outer += 1
        mu_mid = (mu_lo + mu_hi) / 2.0
        res_mid, cost_mid = learn(mu_mid)
        if cost_mid >= budget:
            mu_lo, res_lo, cost_lo = mu_mid, res_mid, cost_mid
        else:
            mu_hi, res_hi, cost_hi = mu_mid, res_mid, cost_mid

    if cost_hi < budget and cost_lo > cost_hi:
        eta = float(np.clip((budget - cost_hi) / (cost_lo - cost_hi), 0.0, 1.0))
        mixed_cost = eta * cost_lo + (1 - eta) * cost_hi
        return SearchResult(mu_mid, res_hi, eta, res_lo.policy_table, mixed_cost, outer)
    return SearchResult(mu_mid, res_hi, 0.0, None, cost_hi, outer)
