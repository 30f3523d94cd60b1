"""Independent brute-force references for the solver tests.

Policies are evaluated by solving their linear fixed points directly, never
through the iteration loops they are meant to check.
"""

import itertools

import numpy as np

from effectsched.cmdp import action_cost_vector, reward_vector


def enumerate_policy_values(table, config):
    """(actions, objective vector, cost vector) for every deterministic policy."""
    space = table.space
    rnext = reward_vector(config, space)
    act_cost = action_cost_vector(config, space)
    gamma = config.discount
    n = space.n_states

    out = []
    for actions in itertools.product(range(space.n_actions), repeat=n):
        P = np.zeros((n, n))
        rbar = np.zeros(n)
        cbar = np.zeros(n)
        for s in range(n):
            for succ, p in table.row(s, actions[s]):
                P[s, succ] += p
                rbar[s] += p * rnext[succ]
            cbar[s] = act_cost[actions[s]]
        A = np.eye(n) - gamma * P
        out.append((actions, np.linalg.solve(A, rbar), np.linalg.solve(A, cbar)))
    return out


def best_net_values(evals, mu):
    """Per-state maximum of objective minus mu times cost over all policies."""
    return np.max([J - mu * C for _, J, C in evals], axis=0)


def constrained_optimum(evals, budget, eta_step=0.01):
    """Best feasible two-policy mixture on the eta grid plus the exact
    budget-boundary eta of each pair."""
    J0 = [J[0] for _, J, C in evals]
    C0 = [C[0] for _, J, C in evals]
    grid = [k * eta_step for k in range(int(round(1 / eta_step)) + 1)]
    best = -np.inf
    for i in range(len(evals)):
        for j in range(len(evals)):
            etas = list(grid)
            if C0[i] != C0[j]:
                boundary = (budget - C0[j]) / (C0[i] - C0[j])
                if 0.0 <= boundary <= 1.0:
                    etas.append(boundary)
            for eta in etas:
                if eta * C0[i] + (1 - eta) * C0[j] <= budget + 1e-12:
                    best = max(best, eta * J0[i] + (1 - eta) * J0[j])
    return best
