"""Command-line entry points: solve, run, sweep, gateway, validate, bench."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bench as bench_mod
from . import gateway as gateway_mod
from . import harness
from .cmdp import build_transitions
from .config import SystemConfig, load_config, load_config_file
from .errors import SchedulingError
from .solver import bisection_solve, export_policy, load_policy, solve_at_mu


def _config_from(args) -> SystemConfig:
    if args.config:
        return load_config_file(args.config)
    return load_config(None)


def _add_common(p):
    p.add_argument("--config", help="configuration document (YAML or JSON)")
    p.add_argument("--out", help="output directory")


def cmd_solve(args) -> int:
    config = _config_from(args)
    table = build_transitions(config)
    if args.mu is not None:
        report = solve_at_mu(table, config, args.mu)
    else:
        report = bisection_solve(table, config, eta_mode=args.eta_mode)
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    export_policy(report.policy, report.mu_star, config, os.path.join(out_dir, "policy.csv"))
    with open(os.path.join(out_dir, "solve_report.json"), "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
    print(
        f"solved: mu*={report.mu_star:.8f} kind={report.policy.kind} "
        f"eta={report.policy.eta:.6f} objective={report.objective_value:.6f} "
        f"cost={report.cost_value:.6f} budget={report.budget:.6f}"
    )
    return 0


def cmd_run(args) -> int:
    config = _config_from(args)
    kind = args.scheduler or config.scheduler.kind
    policy = None
    if args.policy_file:
        space_states = (config.max_aoi * len(config.usefulness.levels)) ** len(
            config.relevant_attributes()
        )
        policy, _ = load_policy(
            args.policy_file, space_states, len(config.relevant_attributes()) + 1
        )
    summary = harness.run(
        config, kind, args.seeds, out_dir=args.out or ".", policy=policy
    )
    print(
        f"{summary.scheduler}: mean cpt goe={summary.mean_cpt_goe:.6f} "
        f"queries={summary.query_count} ({summary.query_pct:.1f}% of slots) "
        f"cost={summary.discounted_cost:.6f}"
    )
    return 0


def cmd_sweep(args) -> int:
    config = _config_from(args)
    values = [float(v) if "." in v or "e" in v.lower() else int(v)
              for v in args.values.split(",")]
    schedulers = args.schedulers.split(",")
    rows = harness.sweep(config, args.axis, values, schedulers, args.seeds,
                         out_dir=args.out or ".")
    for row in rows:
        mean = row.get("mean_cpt_goe")
        shown = f"{mean:.6f}" if isinstance(mean, float) else row["status"]
        print(f"{args.axis}={row['value']} {row['scheduler']}: {shown}")
    return 0


def cmd_gateway(args) -> int:
    config = _config_from(args)
    if args.socket:
        host, _, port = args.socket.rpartition(":")
        gateway_mod.serve_socket(config, host or "127.0.0.1", int(port))
    else:
        gateway_mod.serve(config)
    return 0


def cmd_validate(args) -> int:
    from .validate import kernel_checks, kernel_env_agreement

    config = _config_from(args)
    table = build_transitions(config)
    checks = kernel_checks(config, table)
    ok = True

    err = checks["row_sum_max_err"]
    line_ok = err < 1e-9
    ok &= line_ok
    print(f"[{'PASS' if line_ok else 'FAIL'}] kernel rows normalized (max err {err:.2e})")

    acc = checks["weakly_accessible"]
    print(f"[{'PASS' if acc else 'FAIL'}] reachability condition"
          + ("" if acc else f" (witness pair {checks['witness']})"))
    ok &= acc

    rows = kernel_env_agreement(config, draws_per_row=args.draws, table=table)
    worst = max(r["l1"] for r in rows)
    line_ok = worst <= 0.02
    ok &= line_ok
    print(
        f"[{'PASS' if line_ok else 'FAIL'}] simulator matches kernel on {len(rows)} rows "
        f"x {args.draws} draws (worst L1 {worst:.4f})"
    )
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "validate.json"), "w", encoding="utf-8") as fh:
            json.dump({"checks": {k: v for k, v in checks.items() if k != "branches"},
                       "rows": rows}, fh, indent=2)
    return 0 if ok else 1


def cmd_bench(args) -> int:
    config = _config_from(args)
    results = bench_mod.bench_kernels(config, sweeps=args.sweeps)
    print(bench_mod.format_report(results))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "bench.json"), "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effectsched",
        description="Effect-aware query scheduling: solver, simulator, and harness",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", help="compute a budget-feasible policy")
    _add_common(p)
    p.add_argument("--mu", type=float, help="fix the multiplier and skip the budget search")
    p.add_argument("--eta-mode", choices=["computed", "fixed"], default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("run", help="simulate one scheduler over seeded episodes")
    _add_common(p)
    p.add_argument("--scheduler", default=None,
                   choices=["policy", "wrr", "lwgf", "uniform", "markovian", "tabular_q"],
                   help="defaults to the configuration's scheduler.kind")
    p.add_argument("--seeds", type=int, default=1, help="number of seeded episodes")
    p.add_argument("--policy-file", help="policy CSV for the policy scheduler")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run schedulers across one configuration axis")
    _add_common(p)
    p.add_argument("--axis", required=True,
                   choices=["goe_ref", "cost_flex", "num_attributes", "query_limit"])
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--schedulers", default="policy,lwgf,wrr,uniform,markovian")
    p.add_argument("--seeds", type=int, default=5)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gateway", help="serve the environment over the line protocol")
    p.add_argument("--config", help="configuration document (YAML or JSON)")
    p.add_argument("--socket", help="HOST:PORT to listen on instead of stdio")
    p.set_defaults(func=cmd_gateway)

    p = sub.add_parser("validate", help="kernel/simulator agreement suite")
    _add_common(p)
    p.add_argument("--draws", type=int, default=12_000, help="samples per probed row")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="compare compiled and pure-Python kernels")
    _add_common(p)
    p.add_argument("--sweeps", type=int, default=200)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchedulingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
