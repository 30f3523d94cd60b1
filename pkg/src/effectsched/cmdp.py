"""Enumerated decision process: state indexing, transition kernel, rewards.

States are (AoI, usefulness-level) tuples over the attributes some actuation
agent requires. Actions are 0 (no query) or the position of an attribute in
the ascending relevant list. The kernel is stored flat, CSR-style, one row
per (state, action) pair.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import cpt
from .config import SystemConfig, query_cost, select_agent
from .errors import CapacityError, ContractError


class StateSpace:
    """Mixed-radix enumeration of (AoI, level) tuples over relevant attributes.

    The first relevant attribute is the least significant digit; the digit of
    an attribute is (aoi - 1) * n_levels + (level - 1).
    """

    def __init__(self, config: SystemConfig):
        self.relevant = config.relevant_attributes()
        self.max_aoi = config.max_aoi
        self.n_levels = len(config.usefulness.levels)
        self.levels = np.asarray(config.usefulness.levels)
        self.base = self.max_aoi * self.n_levels
        n_rel = len(self.relevant)
        if n_rel * math.log2(self.base) > 62:
            raise CapacityError(
                "state index exceeds 64-bit range; use the model-free path "
                "(gateway plus an external learner)"
            )
        self.n_states = self.base**n_rel
        if self.n_states > config.max_states:
            raise CapacityError(
                f"{self.n_states} states exceed the configured cap "
                f"({config.max_states}); use the model-free path "
                "(gateway plus an external learner)"
            )
        self.n_actions = n_rel + 1
        # action index -> attribute id (index 0 is the no-query action)
        self.actions = (0,) + self.relevant

        idx = np.arange(self.n_states, dtype=np.int64)
        digits = (idx[:, None] // self.base ** np.arange(n_rel, dtype=np.int64)) % self.base
        self.aoi_matrix = (digits // self.n_levels + 1).astype(np.int64)
        self.level_matrix = (digits % self.n_levels + 1).astype(np.int64)

    def encode(self, aoi, level) -> int:
        aoi = np.asarray(aoi, dtype=np.int64)
        level = np.asarray(level, dtype=np.int64)
        if np.any(aoi < 1) or np.any(aoi > self.max_aoi):
            raise ContractError("AoI component outside [1, max_aoi]")
        if np.any(level < 1) or np.any(level > self.n_levels):
            raise ContractError("level component outside [1, n_levels]")
        digits = (aoi - 1) * self.n_levels + (level - 1)
        return int(digits @ self.base ** np.arange(len(self.relevant), dtype=np.int64))

    def decode(self, index: int):
        if not 0 <= index < self.n_states:
            raise ContractError(f"state index {index} outside [0, {self.n_states})")
        return self.aoi_matrix[index].copy(), self.level_matrix[index].copy()

    def goe_values(self) -> np.ndarray:
        """Total effectiveness grade of every state: sum of level/AoI terms."""
        return (self.levels[self.level_matrix - 1] / self.aoi_matrix).sum(axis=1)


@dataclass
class TransitionTable:
    space: StateSpace
    row_ptr: np.ndarray  # (n_states * n_actions + 1,)
    succ: np.ndarray  # flat successor state indices
    mass: np.ndarray  # raw probability mass
    wmass: np.ndarray  # weighted mass actually used in backups
    wsum: np.ndarray = field(init=False)  # per-row weighted mass totals

    def __post_init__(self):
        self.wsum = np.add.reduceat(self.wmass, self.row_ptr[:-1])

    @property
    def n_states(self) -> int:
        return self.space.n_states

    @property
    def n_actions(self) -> int:
        return self.space.n_actions

    def row(self, state: int, action: int) -> list[tuple[int, float]]:
        r = state * self.n_actions + action
        lo, hi = self.row_ptr[r], self.row_ptr[r + 1]
        return [(int(self.succ[k]), float(self.mass[k])) for k in range(lo, hi)]


def build_state_space(config: SystemConfig) -> StateSpace:
    return StateSpace(config)


def build_transitions(config: SystemConfig, space: StateSpace | None = None) -> TransitionTable:
    """Analytic kernel.

    Querying attribute m splits into success branches (AoI resets to 1, the
    level is redrawn from the attribute's usefulness pmf) and one failure
    branch (everything ages). Not querying ages deterministically. Ages clamp
    at max_aoi; successors that coincide after clamping are merged.
    """
    space = space or StateSpace(config)
    n_rel = len(space.relevant)
    base_pows = space.base ** np.arange(n_rel, dtype=np.int64)

    # per relevant attribute: success probability of the selected agent and
    # the usefulness-level pmf
    succ_prob, level_pmf = [], []
    for m in space.relevant:
        agent = config.agents[select_agent(config, m) - 1]
        succ_prob.append((1.0 - agent.erase_prob) * agent.observe_prob[m - 1])
        level_pmf.append(config.usefulness.per_attribute_pmf[m - 1])

    row_ptr = [0]
    succ_out: list[int] = []
    mass_out: list[float] = []

    aoi_all = space.aoi_matrix
    lvl_all = space.level_matrix
    aged_digits_all = (np.minimum(aoi_all + 1, space.max_aoi) - 1) * space.n_levels + (
        lvl_all - 1
    )
    aged_index_all = aged_digits_all @ base_pows

    for s in range(space.n_states):
        aged_index = int(aged_index_all[s])
        aged_digits = aged_digits_all[s]
        for a in range(space.n_actions):
            if a == 0:
                succ_out.append(aged_index)
                mass_out.append(1.0)
                row_ptr.append(len(succ_out))
                continue
            pos = a - 1
            p_ok = succ_prob[pos]
            merged: dict[int, float] = {}
            # failure branch: wrong observation, or a correct one erased
            merged[aged_index] = 1.0 - p_ok
            base = aged_index - int(aged_digits[pos]) * int(base_pows[pos])
            for j, pj in enumerate(level_pmf[pos], start=1):
                if pj == 0.0:
                    continue
                target = base + (j - 1) * int(base_pows[pos])
                merged[target] = merged.get(target, 0.0) + pj * p_ok
            for target in sorted(merged):
                succ_out.append(target)
                mass_out.append(merged[target])
            row_ptr.append(len(succ_out))

    mass = np.asarray(mass_out)
    table = TransitionTable(
        space=space,
        row_ptr=np.asarray(row_ptr, dtype=np.int64),
        succ=np.asarray(succ_out, dtype=np.int64),
        mass=mass,
        wmass=np.asarray(cpt.weight(mass, config.cpt)),
    )
    return table


def reward_vector(config: SystemConfig, space: StateSpace) -> np.ndarray:
    """Prospect value of every state's total effectiveness grade."""
    return np.asarray(cpt.value(space.goe_values(), config.cpt.goe_ref, config.cpt))


def action_cost_vector(config: SystemConfig, space: StateSpace) -> np.ndarray:
    """Prospect-valued query cost per action (zero for the no-query action)."""
    out = np.zeros(space.n_actions)
    per_query = cpt.value_gain_only(query_cost(True, config), 0.0, config.cpt)
    out[1:] = per_query
    return out


def reward(next_state: int, action: int, mu: float, config: SystemConfig,
           space: StateSpace | None = None) -> float:
    """Net slot reward: state value minus the multiplier-scaled query cost."""
    space = space or StateSpace(config)
    aoi, level = space.decode(next_state)
    goe = float((space.levels[level - 1] / aoi).sum())
    r = cpt.value(goe, config.cpt.goe_ref, config.cpt)
    if action != 0:
        r -= mu * cpt.value_gain_only(query_cost(True, config), 0.0, config.cpt)
    return r


def check_weak_accessibility(table: TransitionTable):
    """Reachability structure of the union digraph of all actions.

    Passes when the condensation of the positive-mass edge digraph has a
    single closed communicating class, so every state can drain into one
    recurrent core inside which all pairs communicate. Returns
    (True, None), or (False, (source, unreachable_target)).
    """
    n = table.n_states
    rows = np.repeat(
        np.arange(n * table.n_actions, dtype=np.int64) // table.n_actions,
        np.diff(table.row_ptr),
    )
    keep = table.mass > 0.0
    graph = csr_matrix(
        (np.ones(int(keep.sum())), (rows[keep], table.succ[keep])), shape=(n, n)
    )
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    if n_comp == 1:
        return True, None

    # sink components have no edges leaving them in the condensation
    coo = graph.tocoo()
    has_out = np.zeros(n_comp, dtype=bool)
    cross = labels[coo.row] != labels[coo.col]
    has_out[labels[coo.row[cross]]] = True
    sinks = np.flatnonzero(~has_out)
    if len(sinks) == 1:
        return True, None

    source = int(np.flatnonzero(labels == sinks[0])[0])
    target = int(np.flatnonzero(labels != labels[source])[0])
    return False, (source, target)


def dump_kernel(table: TransitionTable, path):
    """CSV rows (state, action, successor, probability) for external checks."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "action", "successor", "probability"])
        for s in range(table.n_states):
            for a in range(table.n_actions):
                for succ, p in table.row(s, a):
                    writer.writerow([s, a, succ, repr(p)])
