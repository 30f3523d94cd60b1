import dataclasses
import math

import numpy as np
import pytest

import effectsched as es
from effectsched.errors import ContractError

SQRT = math.sqrt


def force_state(sim, aoi, levels, seed=0):
    state = sim.reset(seed)
    state.aoi[:] = aoi
    state.level[:] = levels
    return state


class TestReset:
    def test_initial_conditions(self, defaults):
        state = es.reset(defaults, 0)
        assert state.t == 0
        assert list(state.aoi) == [1, 1]
        assert list(state.level) == [1, 1]  # lowest usefulness level
        assert list(state.knowledge) == [0, 0]
        assert state.discounted_cost == 0.0

    def test_same_seed_bitwise_identical(self, defaults):
        assert es.reset(defaults, 7).equals(es.reset(defaults, 7))
        assert not es.reset(defaults, 7).equals(es.reset(defaults, 8))

    def test_trace_determinism(self, defaults):
        sim = es.Simulator(defaults)
        runs = []
        for _ in range(2):
            state = sim.reset(7)
            rng = np.random.default_rng(1)
            records = []
            for _ in range(100):
                action = int(rng.integers(0, 3))
                state, rec = sim.step(state, action)
                records.append(rec)
            runs.append(records)
        assert runs[0] == runs[1]


class TestStep:
    def test_idle_slot_ages_everything(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(3)
        state, rec = sim.step(state, ())
        assert rec.action == () and rec.cost == 0.0
        assert list(state.aoi) == [2, 2]
        assert list(state.level) == [1, 1]

    def test_age_clamps_at_max(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(3)
        for _ in range(10):
            state, rec = sim.step(state, ())
        assert list(state.aoi) == [4, 4]

    def test_delivered_and_correct_frequency(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(123)
        hits = 0
        n = 100_000
        for _ in range(n):
            state, rec = sim.step(state, (1,))
            hits += rec.delivered[0] and rec.correct[0]
        assert hits / n == pytest.approx(0.64, abs=0.01)

    def test_full_erasure_freezes_knowledge(self):
        cfg = es.load_config({"agents": [{"p_observe": 0.8, "p_erase": 1.0}]})
        sim = es.Simulator(cfg)
        state = sim.reset(5)
        for i in range(cfg.max_aoi + 1):
            state, rec = sim.step(state, (1,))
        assert list(state.knowledge) == [0, 0]
        assert list(state.level) == [1, 1]
        assert list(state.aoi) == [cfg.max_aoi, cfg.max_aoi]

    def test_aoi_resets_iff_delivered_and_correct(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(11)
        rng = np.random.default_rng(2)
        prev_aoi = state.aoi.copy()
        for _ in range(2000):
            action = int(rng.integers(0, 3))
            state, rec = sim.step(state, action)
            for m in (1, 2):
                success = m in rec.action and rec.delivered[rec.action.index(m)] and rec.correct[
                    rec.action.index(m)
                ]
                if success:
                    assert state.aoi[m - 1] == 1
                else:
                    assert state.aoi[m - 1] == min(prev_aoi[m - 1] + 1, defaults.max_aoi)
            prev_aoi = state.aoi.copy()

    def test_discounted_cost_matches_trace_exactly(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(4)
        rng = np.random.default_rng(9)
        records = []
        for _ in range(500):
            state, rec = sim.step(state, int(rng.integers(0, 3)))
            records.append(rec)
        total, g = 0.0, 1.0
        for rec in records:
            total += g * rec.cost
            g *= defaults.discount
        assert total == state.discounted_cost  # bitwise, same accumulation order

    def test_contract_violations(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(0)
        with pytest.raises(ContractError):
            sim.step(state, (1, 2))  # above the query limit
        cfg = es.load_config({"goals": {"required_sets": [[1]] * 4}})
        sim2 = es.Simulator(cfg)
        state2 = sim2.reset(0)
        with pytest.raises(ContractError):
            sim2.step(state2, (2,))  # attribute nobody requires


class TestScoring:
    def test_goe_total_examples(self, defaults):
        sim = es.Simulator(defaults)
        # levels are (0.25, 0.5, 0.75, 1.0)
        state = force_state(sim, aoi=(1, 2), levels=(3, 2))
        assert sim.goe_total(state) == pytest.approx(0.75 / 1 + 0.5 / 2, abs=1e-15)
        state = force_state(sim, aoi=(4, 4), levels=(1, 1))
        assert sim.goe_total(state) == pytest.approx(0.125, abs=1e-15)

    def test_irrelevant_attribute_excluded(self):
        cfg = es.load_config({"goals": {"required_sets": [[1]] * 4}})
        sim = es.Simulator(cfg)
        state = force_state(sim, aoi=(1, 1), levels=(2, 4))
        assert sim.goe_total(state) == pytest.approx(0.5, abs=1e-15)

    def test_slot_reward_examples(self, defaults):
        sim = es.Simulator(defaults)
        at_ref = dataclasses.replace(
            defaults, cpt=dataclasses.replace(defaults.cpt, goe_ref=0.5)
        )
        state = force_state(es.Simulator(at_ref), aoi=(1, 1), levels=(1, 1))  # grade 0.5
        assert es.slot_reward(state, (), state, 0.0, at_ref) == 0.0

        state = force_state(sim, aoi=(1, 1), levels=(3, 1))  # grade 1.0
        assert sim.slot_reward((), state, 1.0) == pytest.approx(SQRT(0.8), abs=1e-12)
        assert sim.slot_reward((1,), state, 1.0) == pytest.approx(
            SQRT(0.8) - SQRT(0.5), abs=1e-12
        )

    def test_strict_grade_no_higher_than_tracked(self, defaults):
        sim = es.Simulator(defaults)
        state = sim.reset(21)
        rng = np.random.default_rng(3)
        for _ in range(300):
            state, rec = sim.step(state, int(rng.integers(0, 3)))
            assert rec.goe_strict <= rec.goe + 1e-15


def test_trace_round_trip(tmp_path, defaults):
    sim = es.Simulator(defaults)
    state = sim.reset(2)
    records = []
    for i in range(50):
        state, rec = sim.step(state, (1,) if i % 3 == 0 else ())
        records.append(rec)
    path = tmp_path / "trace.csv"
    es.env.write_trace(records, defaults.num_attributes, path)
    rows = es.env.read_trace(path)
    assert len(rows) == 50
    assert [int(r["t"]) for r in rows] == [rec.t for rec in records]
    assert [float(r["cpt_goe"]) for r in rows] == [rec.cpt_goe for rec in records]
    assert [float(r["cost"]) for r in rows] == [rec.cost for rec in records]
    assert [float(r["goe_strict"]) for r in rows] == [rec.goe_strict for rec in records]
