import dataclasses
import json
import os

import numpy as np
import pytest

import effectsched as es
from effectsched.cli import main
from effectsched.errors import ContractError
from effectsched.harness import aggregate, compute_cdf, rows_from_trace_file, run, sweep


@pytest.fixture(scope="module")
def short_config(defaults):
    return dataclasses.replace(defaults, horizon=200)


class TestRun:
    def test_uniform_queries_every_slot(self, short_config):
        summary = run(short_config, "uniform", 3)
        assert summary.query_pct == 100.0
        assert summary.query_count == 3 * short_config.horizon

    def test_markovian_rate_tracks_flex(self, defaults):
        summary = run(defaults, "markovian", 20)
        assert summary.query_pct / 100.0 == pytest.approx(0.75, abs=0.02)

    def test_repeat_is_identical(self, short_config, default_solve):
        a = run(short_config, "policy", 2, policy=default_solve.policy)
        b = run(short_config, "policy", 2, policy=default_solve.policy)
        assert a == b

    def test_outputs_written(self, tmp_path, short_config):
        summary = run(short_config, "wrr", 2, out_dir=tmp_path)
        assert (tmp_path / "summary.json").exists()
        assert (tmp_path / "cdf.csv").exists()
        for seed in summary.seeds:
            assert (tmp_path / f"trace_seed{seed}.csv").exists()
        loaded = json.loads((tmp_path / "summary.json").read_text())
        assert loaded["scheduler"] == "wrr"
        assert loaded["mean_cpt_goe"] == summary.mean_cpt_goe

    def test_round_trip_from_trace_files(self, tmp_path, short_config):
        summary = run(short_config, "lwgf", 3, out_dir=tmp_path)
        rows_per_seed = [
            rows_from_trace_file(tmp_path / f"trace_seed{seed}.csv")
            for seed in summary.seeds
        ]
        again = aggregate(rows_per_seed, "lwgf", summary.seeds, short_config)
        assert again == summary  # exact, including every float

    def test_delivered_correct_rates(self, short_config):
        summary = run(short_config, "uniform", 5)
        assert summary.delivered_pct == pytest.approx(80.0, abs=3.0)
        assert summary.correct_pct == pytest.approx(64.0, abs=3.0)


class TestComputeCdf:
    def test_simple_steps(self):
        assert compute_cdf([3, 1, 2]) == [(1, 1 / 3), (2, 2 / 3), (3, 1.0)]

    def test_constant_samples_single_step(self):
        assert compute_cdf([5.0, 5.0, 5.0]) == [(5.0, 1.0)]

    def test_empty_rejected(self):
        with pytest.raises(ContractError):
            compute_cdf([])

    def test_uniform_samples_near_identity(self):
        rng = np.random.default_rng(1)
        samples = rng.random(1000)
        cdf = compute_cdf(samples)
        deviation = max(abs(frac - value) for value, frac in cdf)
        assert deviation < 0.06


class TestSweep:
    def test_degenerate_point_reproduces_run(self, short_config, default_solve):
        direct = run(short_config, "markovian", 2)
        rows = sweep(short_config, "num_attributes", [2], ["markovian"], 2)
        assert rows[0]["status"] == "ok"
        assert rows[0]["mean_cpt_goe"] == direct.mean_cpt_goe
        assert rows[0]["discounted_cost"] == direct.discounted_cost
        assert rows[0]["query_count"] == direct.query_count

    def test_capacity_points_are_skipped(self, short_config):
        tight = dataclasses.replace(short_config, max_states=1000)
        rows = sweep(tight, "num_attributes", [2, 3], ["policy", "uniform"], 1)
        status = {(r["value"], r["scheduler"]): r["status"] for r in rows}
        assert status[(2, "policy")] == "ok"
        assert status[(3, "policy")] == "skipped: capacity"
        assert status[(3, "uniform")] == "ok"

    def test_query_limit_skips_enumerated_model(self, short_config):
        rows = sweep(short_config, "query_limit", [1, 2], ["policy", "lwgf"], 1)
        status = {(r["value"], r["scheduler"]): r["status"] for r in rows}
        assert status[(1, "policy")] == "ok"
        assert status[(2, "policy")] == "skipped: query-limit"
        assert status[(2, "lwgf")] == "ok"

    def test_goe_ref_axis_applies(self, short_config):
        rows = sweep(short_config, "goe_ref", [0.2, 0.8], ["uniform"], 2)
        assert rows[0]["mean_cpt_goe"] > rows[1]["mean_cpt_goe"]

    def test_sweep_csv_written(self, tmp_path, short_config):
        sweep(short_config, "cost_flex", [0.5], ["markovian"], 1, out_dir=tmp_path)
        text = (tmp_path / "sweep.csv").read_text()
        assert text.startswith("axis,value,scheduler,status")
        assert "markovian" in text


class TestCli:
    def test_solve_run_validate(self, tmp_path):
        config = tmp_path / "tiny.json"
        config.write_text(
            json.dumps(
                {
                    "system": {"M": 1, "K": 1, "max_aoi": 2, "usefulness_levels": 2,
                               "horizon": 50},
                    "attributes": [{"alpha": 2.0, "beta": 5.0}],
                    "goals": {"required_sets": [[1]]},
                }
            )
        )
        out = tmp_path / "solve"
        assert main(["solve", "--config", str(config), "--out", str(out)]) == 0
        assert (out / "policy.csv").exists()
        report = json.loads((out / "solve_report.json").read_text())
        assert report["feasible"] is True

        run_out = tmp_path / "run"
        assert main([
            "run", "--config", str(config), "--scheduler", "policy",
            "--policy-file", str(out / "policy.csv"), "--seeds", "2",
            "--out", str(run_out),
        ]) == 0
        assert (run_out / "summary.json").exists()

        assert main([
            "validate", "--config", str(config), "--draws", "16000",
            "--out", str(tmp_path / "val"),
        ]) == 0

    def test_sweep_cli(self, tmp_path):
        out = tmp_path / "sw"
        config = tmp_path / "short.json"
        config.write_text(json.dumps({"system": {"horizon": 60}}))
        assert main([
            "sweep", "--config", str(config), "--axis", "cost_flex",
            "--values", "0.5,1.0", "--schedulers", "markovian,uniform",
            "--seeds", "1", "--out", str(out),
        ]) == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(lines) == 5  # header + 2 values x 2 schedulers

    def test_bench_cli(self, tmp_path, capsys):
        assert main(["bench", "--sweeps", "20", "--out", str(tmp_path)]) == 0
        assert "kernel benchmark" in capsys.readouterr().out
        assert (tmp_path / "bench.json").exists()

    def test_bad_config_is_reported(self, tmp_path, capsys):
        config = tmp_path / "bad.json"
        config.write_text(json.dumps({"solver": {"gamma": 1.0}}))
        assert main(["run", "--config", str(config), "--scheduler", "uniform"]) == 2
        assert "discount" in capsys.readouterr().err
