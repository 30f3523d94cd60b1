import dataclasses
import json

import pytest

from drl_harness import defaults, load_spec_file
from drl_harness.train import episodes_to_reach, moving_average


class TestReferenceHyperparameters:
    def test_dqn(self):
        spec = defaults("dqn")
        assert spec.optimizer == "adam"
        assert spec.learning_rate == 1e-4
        assert spec.replay_size == 1_000_000
        assert spec.batch_size == 32
        assert spec.total_steps == 100 * 10_000
        assert spec.episodes == 100 and spec.episode_steps == 10_000

    def test_a2c(self):
        spec = defaults("a2c")
        assert spec.optimizer == "rmsprop"
        assert spec.learning_rate == 3e-4
        assert spec.rollout_steps == 20 and spec.n_envs == 8
        assert spec.gae_lambda == 1.0
        assert spec.total_steps == 1_000_000

    def test_ppo(self):
        spec = defaults("ppo")
        assert spec.optimizer == "adam"
        assert spec.learning_rate == 3e-4
        assert spec.rollout_steps == 2048 and spec.n_envs == 1
        assert spec.batch_size == 64
        assert spec.epochs == 10
        assert spec.gae_lambda == 0.95

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            defaults("sac")


def test_spec_file_round_trip(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"algorithm": "ppo", "total_steps": 5000, "hidden": [32, 32]}))
    spec = load_spec_file(path)
    assert spec.algorithm == "ppo"
    assert spec.total_steps == 5000
    assert spec.hidden == (32, 32)
    assert spec.epochs == 10  # untouched defaults stay

    path.write_text(json.dumps({"algorithm": "ppo", "bogus": 1}))
    with pytest.raises(ValueError):
        load_spec_file(path)


class TestCurveHelpers:
    def test_moving_average_window(self):
        curve = [1.0] * 5 + [3.0] * 40
        avg = moving_average(curve, window=20)
        assert avg[0] == 1.0
        assert avg[4] == 1.0
        assert avg[-1] == 3.0
        assert avg[10] == pytest.approx((5 * 1 + 6 * 3) / 11)

    def test_episodes_to_reach(self):
        avg = [0.0, 1.0, 2.0, 3.0, 4.0, 4.9, 5.0, 5.0]
        assert episodes_to_reach(avg, fraction=0.95) == 6
        assert episodes_to_reach([], fraction=0.95) is None

    def test_episodes_to_reach_negative_final(self):
        avg = [-10.0, -6.0, -2.0, -1.0, -1.0]
        assert episodes_to_reach(avg, fraction=0.95) == 4
