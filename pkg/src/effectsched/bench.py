"""Timing comparison of the compiled and pure-Python sweep kernels."""

from __future__ import annotations

import time

import numpy as np

from . import kernels
from .cmdp import action_cost_vector, build_transitions, reward_vector
from .config import SystemConfig


def bench_kernels(config: SystemConfig, sweeps: int = 200, mu: float = 1.0) -> dict:
    table = build_transitions(config)
    space = table.space
    rnext = reward_vector(config, space)
    act_cost = action_cost_vector(config, space)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(space.n_states)

    results = {
        "n_states": space.n_states,
        "n_actions": space.n_actions,
        "nonzeros": int(len(table.succ)),
        "sweeps": sweeps,
        "backends": {},
    }
    outputs = {}
    for name in ("python", "compiled"):
        try:
            impl = kernels.backend_module(name)
        except RuntimeError:
            continue
        v = v0.copy()
        v_new = np.empty_like(v)
        pol = np.zeros(space.n_states, dtype=np.int64)
        start = time.perf_counter()
        for _ in range(sweeps):
            impl.vi_sweep(
                v, v_new, pol, table.row_ptr, table.succ, table.wmass, table.wsum,
                rnext, act_cost, mu, config.discount, space.n_states, space.n_actions,
            )
            v, v_new = v_new, v
        elapsed = time.perf_counter() - start
        results["backends"][name] = {
            "seconds": elapsed,
            "sweeps_per_second": sweeps / elapsed,
        }
        outputs[name] = (v.copy(), pol.copy())

    if len(outputs) == 2:
        dv = float(np.abs(outputs["python"][0] - outputs["compiled"][0]).max())
        results["max_value_diff"] = dv
        results["policies_match"] = bool(
            np.array_equal(outputs["python"][1], outputs["compiled"][1])
        )
        py, cy = (results["backends"][k]["seconds"] for k in ("python", "compiled"))
        results["speedup"] = py / cy
    return results


def format_report(results: dict) -> str:
    lines = [
        f"kernel benchmark: {results['n_states']} states x {results['n_actions']} actions, "
        f"{results['nonzeros']} kernel entries, {results['sweeps']} sweeps"
    ]
    for name, stats in results["backends"].items():
        lines.append(
            f"  {name:9s} {stats['seconds']:8.4f} s  ({stats['sweeps_per_second']:9.1f} sweeps/s)"
        )
    if "speedup" in results:
        lines.append(
            f"  compiled speedup {results['speedup']:.2f}x, max value diff "
            f"{results['max_value_diff']:.3e}, policies match: {results['policies_match']}"
        )
    return "\n".join(lines)
