"""Network builders and the shared environment-pool driver."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


def mlp(n_in: int, hidden: tuple[int, ...], n_out: int) -> nn.Sequential:
    layers: list[nn.Module] = []
    last = n_in
    for width in hidden:
        layers += [nn.Linear(last, width), nn.ReLU()]
        last = width
    layers.append(nn.Linear(last, n_out))
    return nn.Sequential(*layers)


def one_hot(states, n_states: int) -> torch.Tensor:
    idx = torch.as_tensor(np.asarray(states, dtype=np.int64))
    return torch.nn.functional.one_hot(idx, n_states).float()


def make_optimizer(name: str, params, lr: float):
    if name == "adam":
        return torch.optim.Adam(params, lr=lr)
    if name == "rmsprop":
        return torch.optim.RMSprop(params, lr=lr)
    raise ValueError(f"unknown optimizer {name!r}")


class EnvPool:
    """Drives one gateway session per environment with episode accounting.

    Episodes are `episode_steps` long (never longer than the gateway's own
    limit); boundaries are truncations, so every transition remains valid for
    bootstrapping and exposes its pre-reset successor state.
    """

    def __init__(self, clients, episode_steps: int, base_seed: int):
        self.clients = list(clients)
        self.episode_steps = episode_steps
        self.base_seed = base_seed
        self.episode_index = [0] * len(self.clients)
        self.t_in_episode = [0] * len(self.clients)
        self.episode_reward = [0.0] * len(self.clients)
        self.curve: list[float] = []  # completed-episode rewards, completion order
        self.states = [
            client.reset(self._seed(i)) for i, client in enumerate(self.clients)
        ]

    def _seed(self, i: int) -> int:
        return self.base_seed + 100_000 * i + self.episode_index[i]

    def step(self, actions):
        """Returns per-env transitions (s, a, r, s_next, truncated)."""
        out = []
        for i, (client, action) in enumerate(zip(self.clients, actions)):
            s = self.states[i]
            result = client.step(action)
            self.episode_reward[i] += result.reward
            self.t_in_episode[i] += 1
            truncated = result.done or self.t_in_episode[i] >= self.episode_steps
            if truncated:
                self.curve.append(self.episode_reward[i])
                self.episode_reward[i] = 0.0
                self.t_in_episode[i] = 0
                self.episode_index[i] += 1
                self.states[i] = client.reset(self._seed(i))
            else:
                self.states[i] = result.state
            out.append((s, action, result.reward, result.state, truncated))
        return out
