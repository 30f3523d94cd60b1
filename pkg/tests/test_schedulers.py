import collections

import numpy as np
import pytest

import effectsched as es
from effectsched.env import Observation
from effectsched.schedulers import (
    LwgfScheduler,
    MarkovianScheduler,
    TabularQScheduler,
    UniformScheduler,
    WrrScheduler,
    importance_weights,
    make_scheduler,
    train_tabular_q,
)


def obs_with_components(components, t=5):
    comps = np.asarray(components, dtype=float)
    return Observation(
        state_index=0,
        aoi=np.ones(len(comps), dtype=np.int64),
        levels=np.ones(len(comps), dtype=np.int64),
        goe_components=comps,
        t=t,
    )


class TestLwgf:
    def test_picks_lowest_weighted_grade(self):
        sched = LwgfScheduler({1: 1.0, 2: 1.0}, limit=1)
        rng = np.random.default_rng(0)
        assert sched.decide(obs_with_components([0.375, 0.5]), 0, rng) == (1,)

    def test_weighting_changes_choice(self):
        sched = LwgfScheduler({1: 1.0, 2: 10.0}, limit=1)
        rng = np.random.default_rng(0)
        assert sched.decide(obs_with_components([0.375, 0.1]), 0, rng) == (1,)

    def test_prefers_stalest_when_levels_equal(self, defaults):
        sim = es.Simulator(defaults)
        sched = LwgfScheduler({1: 1.0, 2: 1.0}, limit=1)
        rng = np.random.default_rng(0)
        state = sim.reset(0)
        state.level[:] = (2, 2)
        state.aoi[:] = (2, 4)
        chosen = sched.decide(sim.observe(state), 0, rng)
        assert chosen == (2,)  # largest age minimizes u / age

    def test_top_l_when_limit_two(self):
        sched = LwgfScheduler({1: 1.0, 2: 1.0, 3: 1.0}, limit=2)
        rng = np.random.default_rng(0)
        assert sched.decide(obs_with_components([0.5, 0.1, 0.3]), 0, rng) == (2, 3)


class TestWrr:
    def test_equal_weights_alternate(self):
        sched = WrrScheduler({1: 1.0, 2: 1.0}, limit=1)
        rng = np.random.default_rng(0)
        picks = [sched.decide(None, t, rng) for t in range(6)]
        assert picks == [(1,), (2,), (1,), (2,), (1,), (2,)]

    def test_frequencies_track_weights(self):
        sched = WrrScheduler({1: 2.0, 2: 1.0}, limit=1)
        rng = np.random.default_rng(0)
        T = 999
        counts = collections.Counter(sched.decide(None, t, rng)[0] for t in range(T))
        assert abs(counts[1] - T * 2 / 3) <= 2
        assert abs(counts[2] - T * 1 / 3) <= 2

    def test_queries_every_slot(self):
        sched = WrrScheduler({1: 3.0, 2: 1.0}, limit=1)
        rng = np.random.default_rng(0)
        assert all(len(sched.decide(None, t, rng)) == 1 for t in range(100))


class TestUniform:
    def test_queries_every_slot_within_limit(self):
        sched = UniformScheduler((1, 2), limit=1)
        rng = np.random.default_rng(4)
        picks = [sched.decide(None, t, rng) for t in range(1000)]
        assert all(len(p) == 1 for p in picks)
        freq = collections.Counter(p[0] for p in picks)
        assert 400 < freq[1] < 600

    def test_limit_two_distinct(self):
        sched = UniformScheduler((1, 2, 3), limit=2)
        rng = np.random.default_rng(4)
        for t in range(50):
            picks = sched.decide(None, t, rng)
            assert len(picks) == 2 and len(set(picks)) == 2


class TestMarkovian:
    def test_transition_probabilities(self):
        sched = MarkovianScheduler(rho=0.5, q_rate=0.75, relevant=(1, 2), limit=1)
        assert sched.rho + (1 - sched.rho) * sched.q_rate == pytest.approx(0.875)
        assert (1 - sched.rho) * sched.q_rate == pytest.approx(0.375)

    def test_long_run_query_rate(self):
        sched = MarkovianScheduler(rho=0.5, q_rate=0.75, relevant=(1, 2), limit=1)
        rng = np.random.default_rng(8)
        hits = sum(bool(sched.decide(None, t, rng)) for t in range(100_000))
        assert hits / 100_000 == pytest.approx(0.75, abs=0.01)

    def test_round_robin_attribute_choice(self):
        sched = MarkovianScheduler(rho=0.0, q_rate=1.0, relevant=(1, 2), limit=1)
        rng = np.random.default_rng(0)
        picks = [sched.decide(None, t, rng)[0] for t in range(4)]
        assert picks == [1, 2, 1, 2]


class TestFactory:
    def test_importance_weights_count_requirers(self):
        cfg = es.load_config(
            {"system": {"K": 2}, "goals": {"required_sets": [[1, 2], [1]]}}
        )
        assert importance_weights(cfg) == {1: 2.0, 2: 1.0}

    def test_limit_respected_for_all_kinds(self, default_solve):
        cfg = es.load_config({"system": {"query_limit": 2}})
        sim = es.Simulator(cfg)
        state = sim.reset(0)
        obs = sim.observe(state)
        rng = np.random.default_rng(0)
        for kind in ("wrr", "lwgf", "uniform", "markovian"):
            sched = make_scheduler(cfg, kind)
            for t in range(20):
                assert len(sched.decide(obs, t, rng)) <= cfg.query_limit

    def test_policy_kind_requires_policy(self, defaults):
        with pytest.raises(es.errors.ContractError):
            make_scheduler(defaults, "policy")


class TestTabularQ:
    def test_untrained_table_idles(self, tiny_config):
        table, policy = train_tabular_q(tiny_config, 0.5, episodes=0, steps_per_episode=100)
        assert np.all(policy.table == 0)
        assert np.all(table.values == 0.0)

    def test_zero_learning_rate_freezes_table(self, tiny_config):
        table, _ = train_tabular_q(
            tiny_config, 0.5, episodes=2, steps_per_episode=200, learning_rate=0.0
        )
        assert np.all(table.values == 0.0)
        assert table.visits.sum() == 400

    def test_converges_to_value_iteration_policy(self, tiny_config, tiny_table):
        _, vi_policy, _ = es.value_iteration(tiny_table, 0.5, tiny_config)
        _, q_policy = train_tabular_q(
            tiny_config, 0.5, episodes=10, steps_per_episode=5000, seed=3
        )
        assert np.array_equal(q_policy.table, vi_policy.table)

    def test_scheduler_follows_greedy_table(self, defaults):
        q = np.zeros((256, 3))
        q[:, 2] = 1.0
        sched = TabularQScheduler(q, defaults)
        sim = es.Simulator(defaults)
        obs = sim.observe(sim.reset(0))
        assert sched.decide(obs, 0, np.random.default_rng(0)) == (2,)

    def test_outer_loop_meets_budget(self, tiny_config, tiny_table):
        import dataclasses

        from effectsched.schedulers import solve_tabular_q

        coarse = dataclasses.replace(tiny_config, mu_tolerance=2.0)
        mu_star, policy = solve_tabular_q(
            coarse, episodes=6, steps_per_episode=800, seed=5
        )
        cost = es.evaluate_discounted_cost(policy, tiny_table, coarse)
        assert mu_star > 0.0
        assert cost <= es.max_budget(coarse) + 1e-6

    def test_qtable_csv_export(self, tmp_path, tiny_config):
        import csv

        table, _ = train_tabular_q(tiny_config, 0.4, episodes=2, steps_per_episode=300)
        path = tmp_path / "qtable.csv"
        table.to_csv(path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == table.values.size
        for row in rows:
            s, a = int(row["state"]), int(row["action"])
            assert float(row["value"]) == table.values[s, a]
            assert int(row["visits"]) == table.visits[s, a]
        assert sum(int(r["visits"]) for r in rows) == 600
