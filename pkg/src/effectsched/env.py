"""Slot-by-slot simulator of the source, sensing agents, and knowledge base.

Each step draws fresh attribute realizations, resolves the queried agents'
observations and the erasure channel, updates the knowledge base, ages or
resets the per-attribute AoI, and scores the resulting effectiveness grade.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import cpt
from .config import SystemConfig, query_cost, select_agent
from .errors import ContractError


@dataclass
class EnvState:
    t: int
    truth: np.ndarray  # realization per attribute, 1-based
    knowledge: np.ndarray  # last delivered realization, 0 = never updated
    aoi: np.ndarray  # slots since the last correct delivery, clamped
    level: np.ndarray  # usefulness level of the last correct delivery, 1-based
    rng: np.random.Generator
    discounted_cost: float = 0.0
    gamma_pow: float = 1.0

    def equals(self, other: "EnvState") -> bool:
        return (
            self.t == other.t
            and np.array_equal(self.truth, other.truth)
            and np.array_equal(self.knowledge, other.knowledge)
            and np.array_equal(self.aoi, other.aoi)
            and np.array_equal(self.level, other.level)
            and self.discounted_cost == other.discounted_cost
            and self.gamma_pow == other.gamma_pow
            and self.rng.bit_generator.state == other.rng.bit_generator.state
        )


@dataclass
class TraceRecord:
    t: int
    action: tuple[int, ...]
    agents: tuple[int, ...]
    delivered: tuple[bool, ...]
    correct: tuple[bool, ...]
    goe: float
    cpt_goe: float
    cost: float  # prospect-valued cost of the queries issued this slot
    aoi: tuple[int, ...]
    usefulness: tuple[float, ...]
    goe_strict: float  # diagnostic: usefulness zeroed where knowledge is stale


@dataclass
class Observation:
    """What a scheduler sees at decision time."""

    state_index: int
    aoi: np.ndarray  # over relevant attributes, ascending ids
    levels: np.ndarray
    goe_components: np.ndarray  # level value / AoI per relevant attribute
    t: int


class Simulator:
    def __init__(self, config: SystemConfig):
        self.config = config
        m_total = config.num_attributes
        self.relevant = config.relevant_attributes()
        self.relevant_set = frozenset(self.relevant)
        self.levels = np.asarray(config.usefulness.levels)
        self.n_levels = len(self.levels)
        self.index_base = config.max_aoi * self.n_levels

        self.cum_pmf = [np.cumsum(a.source_pmf) for a in config.attributes]
        from .config import usefulness_map

        self.level_of_real = [
            np.asarray(
                [usefulness_map(a, config.usefulness.levels, i) for i in range(1, a.cardinality + 1)],
                dtype=np.int64,
            )
            for a in config.attributes
        ]
        self.sel_agent = {m: select_agent(config, m) for m in self.relevant}
        self.p_obs = {
            m: config.agents[self.sel_agent[m] - 1].observe_prob[m - 1] for m in self.relevant
        }
        self.p_erase = {
            m: config.agents[self.sel_agent[m] - 1].erase_prob for m in self.relevant
        }
        self._rel_mask = np.zeros(m_total, dtype=bool)
        self._rel_mask[[m - 1 for m in self.relevant]] = True

    # -- lifecycle ----------------------------------------------------------

    def reset(self, seed: int | None = None) -> EnvState:
        m_total = self.config.num_attributes
        rng = np.random.default_rng(self.config.seed if seed is None else seed)
        state = EnvState(
            t=0,
            truth=np.asarray(
                [c.searchsorted(rng.random(), side="right") + 1 for c in self.cum_pmf],
                dtype=np.int64,
            ),
            knowledge=np.zeros(m_total, dtype=np.int64),
            aoi=np.ones(m_total, dtype=np.int64),
            level=np.ones(m_total, dtype=np.int64),
            rng=rng,
        )
        return state

    def normalize_action(self, action) -> tuple[int, ...]:
        if action is None:
            return ()
        if isinstance(action, (int, np.integer)):
            return () if action == 0 else (int(action),)
        attrs = tuple(sorted(int(m) for m in action))
        if len(set(attrs)) != len(attrs):
            raise ContractError("duplicate attribute in action set")
        return attrs

    def step(self, state: EnvState, action) -> tuple[EnvState, TraceRecord]:
        """Advance one slot; `action` names the attributes to query (ids)."""
        attrs = self.normalize_action(action)
        if len(attrs) > self.config.query_limit:
            raise ContractError(
                f"action queries {len(attrs)} attributes, limit is {self.config.query_limit}"
            )
        for m in attrs:
            if m not in self.relevant_set:
                raise ContractError(f"attribute {m} is required by no actuation agent")

        # fresh source realizations, then query resolution in ascending order
        draws = state.rng.random(self.config.num_attributes)
        for m in range(self.config.num_attributes):
            state.truth[m] = self.cum_pmf[m].searchsorted(draws[m], side="right") + 1

        refreshed = np.zeros(self.config.num_attributes, dtype=bool)
        agents, delivered, correct = [], [], []
        for m in attrs:
            idx = m - 1
            agents.append(self.sel_agent[m])
            ok = state.rng.random() < self.p_obs[m]
            if ok:
                observation = int(state.truth[idx])
            else:
                # wrong observations are uniform over the remaining realizations
                w = int(state.rng.integers(self.config.attributes[idx].cardinality - 1)) + 1
                observation = w if w < state.truth[idx] else w + 1
            erased = state.rng.random() < self.p_erase[m]
            delivered.append(not erased)
            correct.append(observation == state.truth[idx])
            if not erased:
                state.knowledge[idx] = observation
                if observation == state.truth[idx]:
                    refreshed[idx] = True
                    state.aoi[idx] = 1
                    state.level[idx] = self.level_of_real[idx][observation - 1]

        state.aoi[~refreshed] = np.minimum(state.aoi[~refreshed] + 1, self.config.max_aoi)

        slot_cost = cpt.value_gain_only(
            len(attrs) * query_cost(True, self.config) if attrs else 0.0, 0.0, self.config.cpt
        )
        state.discounted_cost += state.gamma_pow * slot_cost
        state.gamma_pow *= self.config.discount
        state.t += 1

        goe = self.goe_total(state)
        record = TraceRecord(
            t=state.t,
            action=attrs,
            agents=tuple(agents),
            delivered=tuple(delivered),
            correct=tuple(correct),
            goe=goe,
            cpt_goe=cpt.value(goe, self.config.cpt.goe_ref, self.config.cpt),
            cost=slot_cost,
            aoi=tuple(int(x) for x in state.aoi),
            usefulness=tuple(float(self.levels[j - 1]) for j in state.level),
            goe_strict=self._goe_strict(state),
        )
        return state, record

    # -- scoring ------------------------------------------------------------

    def goe_total(self, state: EnvState) -> float:
        vals = self.levels[state.level - 1] / state.aoi
        return float(vals[self._rel_mask].sum())

    def _goe_strict(self, state: EnvState) -> float:
        # stricter reading: an attribute whose knowledge disagrees with the
        # current truth contributes nothing
        vals = self.levels[state.level - 1] / state.aoi
        vals = np.where(state.knowledge == state.truth, vals, 0.0)
        return float(vals[self._rel_mask].sum())

    def slot_reward(self, action, next_state: EnvState, mu: float) -> float:
        attrs = self.normalize_action(action)
        goe = self.goe_total(next_state)
        r = cpt.value(goe, self.config.cpt.goe_ref, self.config.cpt)
        if attrs:
            cost = len(attrs) * query_cost(True, self.config)
            r -= mu * cpt.value_gain_only(cost, 0.0, self.config.cpt)
        return r

    def observe(self, state: EnvState) -> Observation:
        rel = [m - 1 for m in self.relevant]
        aoi = state.aoi[rel].copy()
        lvl = state.level[rel].copy()
        digits = (aoi - 1) * self.n_levels + (lvl - 1)
        index = 0
        for d in digits[::-1]:
            index = index * self.index_base + int(d)
        return Observation(
            state_index=index,
            aoi=aoi,
            levels=lvl,
            goe_components=self.levels[lvl - 1] / aoi,
            t=state.t,
        )


@lru_cache(maxsize=8)
def _simulator(config: SystemConfig) -> Simulator:
    return Simulator(config)


def reset(config: SystemConfig, seed: int | None = None) -> EnvState:
    return _simulator(config).reset(seed)


def step(state: EnvState, action, config: SystemConfig):
    return _simulator(config).step(state, action)


def goe_total(state: EnvState, config: SystemConfig) -> float:
    return _simulator(config).goe_total(state)


def slot_reward(prev_state: EnvState, action, next_state: EnvState, mu: float,
                config: SystemConfig) -> float:
    return _simulator(config).slot_reward(action, next_state, mu)


# ---------------------------------------------------------------------------
# Trace export

TRACE_BASE_COLUMNS = ["t", "action", "agent", "delivered", "correct", "goe", "cpt_goe", "cost"]


def trace_columns(num_attributes: int) -> list[str]:
    return (
        TRACE_BASE_COLUMNS
        + [f"delta_{m}" for m in range(1, num_attributes + 1)]
        + [f"u_{m}" for m in range(1, num_attributes + 1)]
        + ["goe_strict"]
    )


def _pack(values) -> str:
    return "|".join(str(int(v)) for v in values)


def write_trace(records: list[TraceRecord], num_attributes: int, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace_columns(num_attributes))
        for r in records:
            writer.writerow(
                [
                    r.t,
                    _pack(r.action),
                    _pack(r.agents),
                    _pack(r.delivered),
                    _pack(r.correct),
                    repr(r.goe),
                    repr(r.cpt_goe),
                    repr(r.cost),
                ]
                + [str(x) for x in r.aoi]
                + [repr(x) for x in r.usefulness]
                + [repr(r.goe_strict)]
            )


def read_trace(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
