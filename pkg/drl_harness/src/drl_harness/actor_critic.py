"""On-policy learners: synchronous advantage actor-critic and PPO.

Both collect fixed-length rollouts, estimate advantages with generalized
advantage estimation (the bias-variance parameter), and update a softmax
policy head plus a value head over one-hot state inputs. PPO additionally
re-uses each rollout for several epochs under a clipped probability-ratio
objective.
"""

from __future__ import annotations

import numpy as np
import torch

from .nets import EnvPool, make_optimizer, mlp, one_hot


class ActorCriticLearner:
    def __init__(self, spec, n_states: int, n_actions: int, gamma: float, seed: int = 0):
        self.spec = spec
        self.n_states = n_states
        self.n_actions = n_actions
        self.gamma = gamma
        torch.manual_seed(seed)
        self.rng = np.random.default_rng(seed)
        self.policy_net = mlp(n_states, spec.hidden, n_actions)
        self.value_net = mlp(n_states, spec.hidden, 1)
        params = list(self.policy_net.parameters()) + list(self.value_net.parameters())
        self.optimizer = make_optimizer(spec.optimizer, params, spec.learning_rate)

    def _distribution(self, states) -> torch.distributions.Categorical:
        logits = self.policy_net(one_hot(states, self.n_states))
        return torch.distributions.Categorical(logits=logits)

    def act(self, states) -> tuple[list[int], torch.Tensor]:
        with torch.no_grad():
            dist = self._distribution(states)
            actions = dist.sample()
            log_prob = dist.log_prob(actions)
        return [int(a) for a in actions], log_prob

    def _collect(self, pool: EnvPool):
        spec = self.spec
        steps = spec.rollout_steps
        n = len(pool.clients)
        states = np.zeros((steps, n), dtype=np.int64)
        actions = np.zeros((steps, n), dtype=np.int64)
        rewards = np.zeros((steps, n), dtype=np.float32)
        next_states = np.zeros((steps, n), dtype=np.int64)
        boundary = np.zeros((steps, n), dtype=bool)
        log_probs = torch.zeros((steps, n))
        for t in range(steps):
            acts, lp = self.act(pool.states)
            log_probs[t] = lp
            for i, (s, a, r, s2, truncated) in enumerate(pool.step(acts)):
                states[t, i] = s
                actions[t, i] = a
                rewards[t, i] = r
                next_states[t, i] = s2
                boundary[t, i] = truncated
        return states, actions, rewards, next_states, boundary, log_probs

    def _advantages(self, rewards, values, next_values, boundary):
        """Generalized advantage estimation; accumulation stops at episode
        boundaries because the following row starts from a reset state."""
        lam = self.spec.gae_lambda if self.spec.gae_lambda is not None else 1.0
        steps, n = rewards.shape
        delta = rewards + self.gamma * next_values - values
        adv = np.zeros_like(rewards)
        running = np.zeros(n, dtype=np.float32)
        for t in reversed(range(steps)):
            running = delta[t] + self.gamma * lam * np.where(boundary[t], 0.0, running)
            adv[t] = running
        return adv

    def _evaluate_values(self, states, next_states):
        with torch.no_grad():
            v = self.value_net(one_hot(states.ravel(), self.n_states)).squeeze(1)
            v2 = self.value_net(one_hot(next_states.ravel(), self.n_states)).squeeze(1)
        return (
            v.numpy().reshape(states.shape).astype(np.float32),
            v2.numpy().reshape(states.shape).astype(np.float32),
        )

    def _update_a2c(self, batch):
        states, actions, advantages, returns, _ = batch
        dist = self._distribution(states)
        log_prob = dist.log_prob(torch.as_tensor(actions))
        values = self.value_net(one_hot(states, self.n_states)).squeeze(1)
        adv = torch.as_tensor(advantages)
        if self.spec.normalize_advantage:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        policy_loss = -(log_prob * adv).mean()
        value_loss = torch.nn.functional.mse_loss(values, torch.as_tensor(returns))
        loss = (
            policy_loss
            + self.spec.value_coef * value_loss
            - self.spec.entropy_coef * dist.entropy().mean()
        )
        self.optimizer.zero_grad()
        loss.backward()
        torch.nn.utils.clip_grad_norm_(
            list(self.policy_net.parameters()) + list(self.value_net.parameters()),
            self.spec.max_grad_norm,
        )
        self.optimizer.step()

    def _update_ppo(self, batch):
        spec = self.spec
        states, actions, advantages, returns, old_log_probs = batch
        n = len(states)
        actions_t = torch.as_tensor(actions)
        adv = torch.as_tensor(advantages)
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        returns_t = torch.as_tensor(returns)
        old_lp = torch.as_tensor(old_log_probs)
        for _ in range(spec.epochs):
            order = self.rng.permutation(n)
            for lo in range(0, n, spec.batch_size):
                idx = order[lo: lo + spec.batch_size]
                dist = self._distribution(states[idx])
                log_prob = dist.log_prob(actions_t[idx])
                ratio = torch.exp(log_prob - old_lp[idx])
                clipped = torch.clamp(ratio, 1 - spec.clip_range, 1 + spec.clip_range)
                policy_loss = -torch.min(ratio * adv[idx], clipped * adv[idx]).mean()
                values = self.value_net(one_hot(states[idx], self.n_states)).squeeze(1)
                value_loss = torch.nn.functional.mse_loss(values, returns_t[idx])
                loss = (
                    policy_loss
                    + spec.value_coef * value_loss
                    - spec.entropy_coef * dist.entropy().mean()
                )
                self.optimizer.zero_grad()
                loss.backward()
                torch.nn.utils.clip_grad_norm_(
                    list(self.policy_net.parameters()) + list(self.value_net.parameters()),
                    spec.max_grad_norm,
                )
                self.optimizer.step()

    def train(self, clients, mu: float, seed: int = 0):
        spec = self.spec
        for client in clients:
            client.set_mu(mu)
        pool = EnvPool(clients[: spec.n_envs], spec.episode_steps, seed)
        chunk = spec.rollout_steps * len(pool.clients)
        collected = 0
        while collected < spec.total_steps:
            states, actions, rewards, next_states, boundary, log_probs = self._collect(pool)
            values, next_values = self._evaluate_values(states, next_states)
            advantages = self._advantages(rewards, values, next_values, boundary)
            returns = advantages + values
            batch = (
                states.ravel(),
                actions.ravel(),
                advantages.ravel(),
                returns.ravel(),
                log_probs.reshape(-1),
            )
            if spec.algorithm == "ppo":
                self._update_ppo(batch)
            else:
                self._update_a2c(batch)
            collected += chunk
        return pool.curve

    def greedy_table(self) -> np.ndarray:
        with torch.no_grad():
            logits = self.policy_net(torch.eye(self.n_states))
        return logits.argmax(dim=1).numpy().astype(np.int64)
