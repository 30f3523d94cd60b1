"""Experiment runner: seeded simulation batches, sweeps, and CSV/JSON output.

A run executes one scheduler over a batch of seeds and aggregates per-slot
prospect-valued effectiveness, discounted totals, and query statistics; a
sweep repeats runs over one configuration axis, re-solving model-based
points per value.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
from dataclasses import dataclass

import numpy as np

from . import env as env_mod
from .cmdp import build_transitions
from .config import SystemConfig, config_hash, load_config, to_document
from .errors import CapacityError, ContractError
from .schedulers import make_scheduler, solve_tabular_q
from .solver import Policy, bisection_solve

_SCHEDULER_RNG_SALT = 7919


@dataclass
class RunSummary:
    scheduler: str
    seeds: tuple[int, ...]
    mean_cpt_goe: float
    min_cpt_goe: float
    max_cpt_goe: float
    discounted_objective: float  # mean across seeds
    discounted_cost: float  # mean across seeds
    query_count: int  # total over all seeds
    query_pct: float  # share of slots with at least one query
    delivered_pct: float
    correct_pct: float
    cdf_samples: tuple[float, ...]  # per-seed time-averaged prospect grade
    horizon: int
    config_hash: str

    def to_json_dict(self) -> dict:
        return dataclasses.asdict(self)


def simulate(config: SystemConfig, scheduler, seed: int) -> list[env_mod.TraceRecord]:
    """One seeded episode of `horizon` slots under the given scheduler."""
    sim = env_mod._simulator(config)
    state = sim.reset(seed)
    sched_rng = np.random.default_rng(np.random.SeedSequence((seed, _SCHEDULER_RNG_SALT)))
    records = []
    for t in range(config.horizon):
        action = scheduler.decide(sim.observe(state), t, sched_rng)
        state, record = sim.step(state, action)
        records.append(record)
    return records


def _row_views(records) -> list[dict]:
    return [
        {
            "t": r.t,
            "n_queried": len(r.action),
            "n_delivered": sum(r.delivered),
            "n_correct": sum(d and c for d, c in zip(r.delivered, r.correct)),
            "cpt_goe": r.cpt_goe,
            "cost": r.cost,
        }
        for r in records
    ]


def rows_from_trace_file(path) -> list[dict]:
    out = []
    for raw in env_mod.read_trace(path):
        action = [x for x in raw["action"].split("|") if x]
        delivered = [int(x) for x in raw["delivered"].split("|") if x]
        correct = [int(x) for x in raw["correct"].split("|") if x]
        out.append(
            {
                "t": int(raw["t"]),
                "n_queried": len(action),
                "n_delivered": sum(delivered),
                "n_correct": sum(d and c for d, c in zip(delivered, correct)),
                "cpt_goe": float(raw["cpt_goe"]),
                "cost": float(raw["cost"]),
            }
        )
    return out


def aggregate(rows_per_seed: list[list[dict]], scheduler: str, seeds, config) -> RunSummary:
    """Summary statistics from per-seed slot rows (identical for CSV re-reads)."""
    gamma = config.discount
    all_cpt: list[float] = []
    objectives, costs, averages = [], [], []
    queries = delivered = correct = slots_with_query = 0
    for rows in rows_per_seed:
        obj = cost = 0.0
        g = 1.0
        for row in rows:
            all_cpt.append(row["cpt_goe"])
            obj += g * row["cpt_goe"]
            cost += g * row["cost"]
            g *= gamma
            queries += row["n_queried"]
            delivered += row["n_delivered"]
            correct += row["n_correct"]
            slots_with_query += 1 if row["n_queried"] else 0
        objectives.append(obj)
        costs.append(cost)
        averages.append(sum(row["cpt_goe"] for row in rows) / len(rows))
    total_slots = sum(len(rows) for rows in rows_per_seed)
    return RunSummary(
        scheduler=scheduler,
        seeds=tuple(seeds),
        mean_cpt_goe=sum(all_cpt) / len(all_cpt),
        min_cpt_goe=min(all_cpt),
        max_cpt_goe=max(all_cpt),
        discounted_objective=sum(objectives) / len(objectives),
        discounted_cost=sum(costs) / len(costs),
        query_count=queries,
        query_pct=100.0 * slots_with_query / total_slots,
        delivered_pct=100.0 * delivered / queries if queries else 0.0,
        correct_pct=100.0 * correct / queries if queries else 0.0,
        cdf_samples=tuple(sorted(averages)),
        horizon=config.horizon,
        config_hash=config_hash(config),
    )


def compute_cdf(samples) -> list[tuple[float, float]]:
    """Empirical CDF: (value, k/n) at each distinct sorted sample point."""
    samples = sorted(samples)
    if not samples:
        raise ContractError("cannot build a CDF from an empty sample vector")
    n = len(samples)
    out = []
    for i, v in enumerate(samples, start=1):
        if i < n and samples[i] == v:
            continue
        out.append((v, i / n))
    return out


def _acquire_scheduler(config: SystemConfig, kind: str, policy, scheduler_params):
    """Scheduler instance plus the (possibly just computed) decision artifact.

    The artifact is cached by the caller so solves and training happen once
    per run, while every seed still gets a fresh scheduler instance.
    """
    params = dict(scheduler_params or {})
    if kind == "policy":
        if policy is None:
            policy = bisection_solve(build_transitions(config), config).policy
        return make_scheduler(config, "policy", policy=policy), policy
    if kind == "tabular_q":
        if policy is None:
            _, policy = solve_tabular_q(config, **params.pop("train", {}))
        return make_scheduler(config, "policy", policy=policy), policy
    return make_scheduler(config, kind, **params), policy


def run(config: SystemConfig, kind: str, num_seeds: int, out_dir=None, *,
        policy: Policy | None = None, scheduler_params: dict | None = None,
        keep_records: bool = False):
    """Execute `num_seeds` independent episodes and aggregate them.

    Every seed gets a fresh scheduler instance so cursor/chain state never
    leaks across episodes. Traces and the summary are written when an output
    directory is given.
    """
    seeds = [config.seed + i for i in range(num_seeds)]
    rows_per_seed, records_per_seed = [], []
    solved = policy
    for seed in seeds:
        scheduler, solved = _acquire_scheduler(config, kind, solved, scheduler_params)
        records = simulate(config, scheduler, seed)
        records_per_seed.append(records)
        rows_per_seed.append(_row_views(records))
    summary = aggregate(rows_per_seed, kind, seeds, config)

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for seed, records in zip(seeds, records_per_seed):
            env_mod.write_trace(
                records, config.num_attributes, os.path.join(out_dir, f"trace_seed{seed}.csv")
            )
        with open(os.path.join(out_dir, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary.to_json_dict(), fh, indent=2)
        with open(os.path.join(out_dir, "cdf.csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["value", "fraction"])
            for value, fraction in compute_cdf(summary.cdf_samples):
                writer.writerow([repr(value), repr(fraction)])
    if keep_records:
        return summary, records_per_seed
    return summary


_SWEEP_AXES = ("goe_ref", "cost_flex", "num_attributes", "query_limit")


def _apply_axis(config: SystemConfig, axis: str, value) -> SystemConfig:
    if axis == "goe_ref":
        return dataclasses.replace(
            config, cpt=dataclasses.replace(config.cpt, goe_ref=float(value))
        )
    if axis == "cost_flex":
        return dataclasses.replace(config, cost_flex=float(value))
    if axis == "num_attributes":
        doc = to_document(config)
        doc["system"]["M"] = int(value)
        del doc["goals"]["required_sets"]  # refill: every actuation agent needs them all
        doc["agents"] = [
            {"p_observe": [a["p_observe"][0]] * int(value), "p_erase": a["p_erase"]}
            for a in doc["agents"]
        ]
        return load_config(doc)
    if axis == "query_limit":
        return dataclasses.replace(config, query_limit=int(value))
    raise ContractError(f"unknown sweep axis {axis!r}; choose from {_SWEEP_AXES}")


SWEEP_COLUMNS = [
    "axis", "value", "scheduler", "status", "mean_cpt_goe", "min_cpt_goe",
    "max_cpt_goe", "discounted_objective", "discounted_cost", "query_count",
    "query_pct", "delivered_pct", "correct_pct",
]


def sweep(config: SystemConfig, axis: str, values, schedulers, num_seeds: int,
          out_dir=None) -> list[dict]:
    """One run per (axis value, scheduler); model-based points re-solve.

    Points the enumerated model cannot serve (oversized state spaces, query
    limits above one) are recorded as skipped instead of aborting the sweep.
    """
    results = []
    for value in values:
        point_config = _apply_axis(config, axis, value)
        solved = None
        for kind in schedulers:
            row = {"axis": axis, "value": value, "scheduler": kind, "status": "ok"}
            try:
                if kind in ("policy", "tabular_q") and point_config.query_limit > 1:
                    raise CapacityError("enumerated model serves a query limit of 1 only")
                summary = run(point_config, kind, num_seeds, policy=solved)
                for field in SWEEP_COLUMNS[4:]:
                    row[field] = getattr(summary, field)
            except CapacityError as exc:
                row["status"] = (
                    "skipped: query-limit" if "query limit" in str(exc) else "skipped: capacity"
                )
            results.append(row)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "sweep.csv"), "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
            writer.writeheader()
            for row in results:
                writer.writerow(row)
    return results
