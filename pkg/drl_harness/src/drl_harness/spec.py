"""Training specifications with the reference hyperparameter set as defaults."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class TrainSpec:
    algorithm: str
    hidden: tuple[int, ...] = (64, 64)
    optimizer: str = "adam"
    learning_rate: float = 3e-4
    total_steps: int = 100 * 10_000
    episodes: int = 100
    episode_steps: int = 10_000
    replay_size: int | None = None  # DQN
    rollout_steps: int | None = None  # A2C / PPO
    n_envs: int = 1
    batch_size: int | None = None
    epochs: int | None = None
    gae_lambda: float | None = None  # bias-variance trade-off
    # off-policy extras (DQN)
    learning_starts: int = 1_000
    train_freq: int = 1
    target_update: int = 1_000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_fraction: float = 0.5
    # on-policy extras (A2C / PPO)
    clip_range: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    max_grad_norm: float = 0.5
    normalize_advantage: bool = False  # PPO always normalizes; A2C opt-in

    def validate(self):
        if self.algorithm not in ("dqn", "a2c", "ppo"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.total_steps < 0 or self.episode_steps < 1 or self.n_envs < 1:
            raise ValueError("step counts must be positive")


def defaults(algorithm: str) -> TrainSpec:
    if algorithm == "dqn":
        return TrainSpec(
            algorithm="dqn",
            optimizer="adam",
            learning_rate=1e-4,
            replay_size=1_000_000,
            batch_size=32,
        )
    if algorithm == "a2c":
        return TrainSpec(
            algorithm="a2c",
            optimizer="rmsprop",
            learning_rate=3e-4,
            rollout_steps=20,
            n_envs=8,
            gae_lambda=1.0,
        )
    if algorithm == "ppo":
        return TrainSpec(
            algorithm="ppo",
            optimizer="adam",
            learning_rate=3e-4,
            rollout_steps=2048,
            n_envs=1,
            batch_size=64,
            epochs=10,
            gae_lambda=0.95,
        )
    raise ValueError(f"unknown algorithm {algorithm!r}")


def load_spec_file(path) -> TrainSpec:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    algorithm = doc.pop("algorithm")
    base = defaults(algorithm)
    for key, value in doc.items():
        if not hasattr(base, key):
            raise ValueError(f"unknown TrainSpec field {key!r}")
        if isinstance(value, list):
            value = tuple(value)
        base = dataclasses.replace(base, **{key: value})
    base.validate()
    return base
