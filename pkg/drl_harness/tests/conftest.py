import csv
import json
import subprocess
import sys

import pytest
import torch

torch.set_num_threads(1)

TINY_DOC = {
    "system": {"M": 1, "K": 1, "max_aoi": 2, "usefulness_levels": 2},
    "attributes": [{"alpha": 2.0, "beta": 5.0}],
    "goals": {"required_sets": [[1]]},
}


def primary_cli(*args):
    """Run the scheduling package's CLI; the only code-level touchpoint is
    its installed entry point."""
    return subprocess.run(
        [sys.executable, "-m", "effectsched.cli", *args],
        capture_output=True, text=True, timeout=600,
    )


def gateway_command(config_path):
    return [sys.executable, "-m", "effectsched.cli", "gateway", "--config", str(config_path)]


def parse_policy_file(path):
    """Read a policy CSV per the documented schema: metadata header line,
    then state/action rows."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        meta = dict(token.split("=") for token in header[2:].split()[2:])
        rows = list(csv.DictReader(fh))
    table = [int(row.get("action", row.get("action_plus", 0))) for row in rows]
    return meta, table


@pytest.fixture(scope="session")
def tiny_config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("configs") / "tiny.json"
    path.write_text(json.dumps(TINY_DOC))
    return path


@pytest.fixture(scope="session")
def defaults_config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("configs") / "defaults.json"
    path.write_text("{}")
    return path


@pytest.fixture(scope="session")
def defaults_solution(tmp_path_factory, defaults_config_path):
    out = tmp_path_factory.mktemp("solve")
    proc = primary_cli("solve", "--config", str(defaults_config_path), "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    meta, _ = parse_policy_file(out / "policy.csv")
    return {
        "policy_file": out / "policy.csv",
        "mu_star": float(meta["mu_star"]),
        "config_hash": meta["config"],
    }
