"""Deep Q-network learner: replay buffer, target network, epsilon-greedy."""

from __future__ import annotations

import numpy as np
import torch

from .nets import EnvPool, make_optimizer, mlp, one_hot


class ReplayBuffer:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self.states = np.zeros(capacity, dtype=np.int64)
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity, dtype=np.float32)
        self.next_states = np.zeros(capacity, dtype=np.int64)
        self.size = 0
        self.cursor = 0

    def add(self, s, a, r, s2):
        i = self.cursor
        self.states[i] = s
        self.actions[i] = a
        self.rewards[i] = r
        self.next_states[i] = s2
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng, batch_size):
        idx = rng.integers(0, self.size, size=batch_size)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx]


class DqnLearner:
    def __init__(self, spec, n_states: int, n_actions: int, gamma: float, seed: int = 0):
        self.spec = spec
        self.n_states = n_states
        self.n_actions = n_actions
        self.gamma = gamma
        torch.manual_seed(seed)
        self.rng = np.random.default_rng(seed)
        self.q_net = mlp(n_states, spec.hidden, n_actions)
        self.target_net = mlp(n_states, spec.hidden, n_actions)
        self.target_net.load_state_dict(self.q_net.state_dict())
        self.optimizer = make_optimizer(spec.optimizer, self.q_net.parameters(), spec.learning_rate)
        self.buffer = ReplayBuffer(min(spec.replay_size or 100_000, max(spec.total_steps, 1)))

    def epsilon(self, step: int) -> float:
        spec = self.spec
        horizon = max(int(spec.total_steps * spec.epsilon_fraction), 1)
        frac = min(step / horizon, 1.0)
        return spec.epsilon_start + (spec.epsilon_end - spec.epsilon_start) * frac

    def act(self, state: int, step: int) -> int:
        if self.rng.random() < self.epsilon(step):
            return int(self.rng.integers(self.n_actions))
        with torch.no_grad():
            q = self.q_net(one_hot([state], self.n_states))
        return int(q.argmax(dim=1).item())

    def train_batch(self):
        s, a, r, s2 = self.buffer.sample(self.rng, self.spec.batch_size)
        with torch.no_grad():
            target = torch.as_tensor(r) + self.gamma * self.target_net(
                one_hot(s2, self.n_states)
            ).max(dim=1).values
        q = self.q_net(one_hot(s, self.n_states)).gather(
            1, torch.as_tensor(a).unsqueeze(1)
        ).squeeze(1)
        loss = torch.nn.functional.smooth_l1_loss(q, target)
        self.optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(self.q_net.parameters(), 10.0)
        self.optimizer.step()

    def train(self, clients, mu: float, seed: int = 0):
        spec = self.spec
        for client in clients:
            client.set_mu(mu)
        pool = EnvPool(clients[:1], spec.episode_steps, seed)
        for step in range(spec.total_steps):
            action = self.act(pool.states[0], step)
            (s, a, r, s2, _), = pool.step([action])
            self.buffer.add(s, a, r, s2)
            if step >= spec.learning_starts and step % spec.train_freq == 0:
                self.train_batch()
            if step % spec.target_update == 0:
                self.target_net.load_state_dict(self.q_net.state_dict())
        return pool.curve

    def greedy_table(self) -> np.ndarray:
        with torch.no_grad():
            q = self.q_net(torch.eye(self.n_states))
        return q.argmax(dim=1).numpy().astype(np.int64)
