"""Agreement checks between the analytic kernel and the simulator.

Row frequencies are measured by conditional sampling: the simulator is
placed in a chosen state, stepped once with a chosen action, and the
successor tallied, so every checked row gets a controlled sample size.
"""

from __future__ import annotations

import numpy as np

from .cmdp import TransitionTable, build_transitions, check_weak_accessibility
from .config import SystemConfig
from .env import Simulator


def default_probe_states(space) -> list[int]:
    """A fresh, a mixed, a clamped, and a fresh/stale state."""
    n_rel = len(space.relevant)
    n_lvl = space.n_levels
    cap = space.max_aoi

    def enc(aois, lvls):
        return space.encode(np.asarray(aois), np.asarray(lvls))

    mixed_aoi = [min(2 + (i % 2), cap) for i in range(n_rel)]
    mixed_lvl = [n_lvl if i % 2 == 0 else 1 for i in range(n_rel)]
    clamp_lvl = [min(3 + (i % 2), n_lvl) for i in range(n_rel)]
    split_aoi = [1 if i % 2 == 0 else cap for i in range(n_rel)]
    split_lvl = [n_lvl if i % 2 == 0 else max(1, n_lvl - 1) for i in range(n_rel)]
    states = {
        0,
        enc(mixed_aoi, mixed_lvl),
        enc([cap] * n_rel, clamp_lvl),
        enc(split_aoi, split_lvl),
    }
    return sorted(states)


def measure_row(sim: Simulator, space, state: int, action: int, draws: int,
                rng: np.random.Generator) -> dict[int, float]:
    """Empirical successor distribution of one (state, action) row."""
    aoi, level = space.decode(state)
    attrs = () if action == 0 else (space.relevant[action - 1],)
    env_state = sim.reset(0)
    env_state.rng = rng
    counts: dict[int, int] = {}
    rel_idx = [m - 1 for m in space.relevant]
    pows = space.base ** np.arange(len(rel_idx), dtype=np.int64)
    n_levels = space.n_levels
    for _ in range(draws):
        env_state.aoi[:] = 1
        env_state.level[:] = 1
        env_state.aoi[rel_idx] = aoi
        env_state.level[rel_idx] = level
        sim.step(env_state, attrs)
        digits = (env_state.aoi[rel_idx] - 1) * n_levels + (env_state.level[rel_idx] - 1)
        succ = int(digits @ pows)
        counts[succ] = counts.get(succ, 0) + 1
    return {s: c / draws for s, c in counts.items()}


def kernel_env_agreement(config: SystemConfig, draws_per_row: int = 12_000,
                         seed: int = 0, states: list[int] | None = None,
                         table: TransitionTable | None = None) -> list[dict]:
    """L1 distance between empirical and analytic rows for probe states."""
    table = table or build_transitions(config)
    space = table.space
    sim = Simulator(config)
    rng = np.random.default_rng(seed)
    states = states if states is not None else default_probe_states(space)

    report = []
    for s in states:
        for a in range(space.n_actions):
            empirical = measure_row(sim, space, s, a, draws_per_row, rng)
            analytic = dict(table.row(s, a))
            keys = set(empirical) | set(analytic)
            l1 = sum(abs(empirical.get(k, 0.0) - analytic.get(k, 0.0)) for k in keys)
            report.append(
                {"state": s, "action": a, "draws": draws_per_row, "l1": l1}
            )
    return report


def kernel_checks(config: SystemConfig, table: TransitionTable | None = None) -> dict:
    """Row normalization, branch masses, and the reachability condition."""
    table = table or build_transitions(config)
    space = table.space
    row_sums = np.add.reduceat(table.mass, table.row_ptr[:-1])
    accessible, witness = check_weak_accessibility(table)

    branch_errors = []
    if space.max_aoi >= 2:
        aged_aoi = np.minimum(space.aoi_matrix + 1, space.max_aoi)
        for s in range(space.n_states):
            aged = space.encode(aged_aoi[s], space.level_matrix[s])
            for a in range(1, space.n_actions):
                row = dict(table.row(s, a))
                fail_mass = row.get(aged, 0.0)
                succ_mass = sum(p for t, p in row.items() if t != aged)
                branch_errors.append((s, a, succ_mass, fail_mass))
    return {
        "row_sum_max_err": float(np.abs(row_sums - 1.0).max()),
        "weakly_accessible": accessible,
        "witness": witness,
        "branches": branch_errors,
    }
