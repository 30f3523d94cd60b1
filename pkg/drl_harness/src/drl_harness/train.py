"""Training entry point, learning curves, evaluation, and artifact export."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass

import numpy as np

from .actor_critic import ActorCriticLearner
from .client import GatewayClient
from .dqn import DqnLearner
from .spec import TrainSpec

CURVE_WINDOW = 20


@dataclass
class TrainResult:
    algorithm: str
    mu: float
    policy_table: np.ndarray
    curve: list[float]
    moving_avg: list[float]
    steps: int
    wall_clock: float


def make_learner(spec: TrainSpec, n_states: int, n_actions: int, gamma: float, seed: int):
    if spec.algorithm == "dqn":
        return DqnLearner(spec, n_states, n_actions, gamma, seed)
    return ActorCriticLearner(spec, n_states, n_actions, gamma, seed)


def moving_average(curve, window: int = CURVE_WINDOW) -> list[float]:
    out = []
    acc = 0.0
    for i, value in enumerate(curve):
        acc += value
        if i >= window:
            acc -= curve[i - window]
        out.append(acc / min(i + 1, window))
    return out


def episodes_to_reach(moving_avg, fraction: float = 0.95) -> int | None:
    """First episode whose smoothed reward reaches the fraction of the final
    smoothed reward (range-based when the final value is not positive)."""
    if not moving_avg:
        return None
    final = moving_avg[-1]
    if final > 0:
        threshold = fraction * final
    else:
        lo = min(moving_avg)
        threshold = final - (1 - fraction) * (final - lo)
    for i, value in enumerate(moving_avg):
        if value >= threshold:
            return i + 1
    return None


def train(spec: TrainSpec, clients: list[GatewayClient], mu: float, seed: int = 0) -> TrainResult:
    spec.validate()
    info = clients[0].spec()
    start = time.perf_counter()
    learner = make_learner(spec, info["n_states"], info["n_actions"], info["gamma"], seed)
    curve = learner.train(clients, mu, seed=seed)
    table = learner.greedy_table()
    return TrainResult(
        algorithm=spec.algorithm,
        mu=mu,
        policy_table=table,
        curve=list(curve),
        moving_avg=moving_average(curve),
        steps=spec.total_steps,
        wall_clock=time.perf_counter() - start,
    )


def rollout_metrics(client: GatewayClient, table: np.ndarray, episodes: int,
                    steps_per_episode: int, gamma: float, mu: float,
                    base_seed: int = 10_000) -> dict:
    """Greedy Monte-Carlo estimates: discounted cost/return and mean grade."""
    client.set_mu(mu)
    costs, returns, goes = [], [], []
    for episode in range(episodes):
        state = client.reset(base_seed + episode)
        cost = ret = goe = 0.0
        g = 1.0
        for _ in range(steps_per_episode):
            out = client.step(int(table[state]))
            cost += g * out.cost
            ret += g * out.reward
            goe += out.goe
            g *= gamma
            state = out.state
        costs.append(cost)
        returns.append(ret)
        goes.append(goe / steps_per_episode)
    return {
        "discounted_cost": float(np.mean(costs)),
        "discounted_return": float(np.mean(returns)),
        "mean_goe": float(np.mean(goes)),
        "episodes": episodes,
    }


# ---------------------------------------------------------------------------
# Artifacts (policy CSV uses the solver package's file schema)


def export_policy_csv(table: np.ndarray, mu: float, config_hash: str, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(
            f"# effectsched-policy v1 kind=deterministic mu_star={float(mu)!r} "
            f"eta=0.0 config={config_hash}\n"
        )
        writer = csv.writer(fh)
        writer.writerow(["state_index", "action"])
        for s, a in enumerate(table):
            writer.writerow([s, int(a)])


def write_curve_csv(result: TrainResult, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["episode", "reward", "moving_avg"])
        for i, (reward, avg) in enumerate(zip(result.curve, result.moving_avg), start=1):
            writer.writerow([i, repr(reward), repr(avg)])


def write_result_json(result: TrainResult, path, extra: dict | None = None):
    doc = {
        "algorithm": result.algorithm,
        "mu_star": result.mu,
        "steps": result.steps,
        "wall_clock_seconds": result.wall_clock,
        "episodes": len(result.curve),
        "final_moving_avg": result.moving_avg[-1] if result.moving_avg else None,
        "episodes_to_95pct": episodes_to_reach(result.moving_avg),
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
