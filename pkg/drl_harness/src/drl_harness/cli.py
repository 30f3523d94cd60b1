"""Command line: train one algorithm against a gateway and export artifacts."""

from __future__ import annotations

import argparse
import os
import sys

from .client import GatewayClient
from .search import bisect_mu
from .spec import defaults, load_spec_file
from .train import export_policy_csv, rollout_metrics, train, write_curve_csv, write_result_json


def _clients(args, count: int):
    if args.gateway_cmd:
        return [GatewayClient(command=args.gateway_cmd) for _ in range(count)]
    return [GatewayClient(address=args.gateway) for _ in range(count)]


def _spec(args):
    spec = load_spec_file(args.spec) if args.spec else defaults(args.algo)
    return spec


def cmd_train(args) -> int:
    spec = _spec(args)
    clients = _clients(args, spec.n_envs)
    try:
        result = train(spec, clients, args.mu, seed=args.seed)
        info = clients[0].spec()
        metrics = rollout_metrics(
            clients[0], result.policy_table, args.eval_episodes, args.eval_steps,
            info["gamma"], args.mu,
        )
    finally:
        for client in clients:
            client.close()
    os.makedirs(args.out, exist_ok=True)
    export_policy_csv(
        result.policy_table, args.mu, args.config_hash, os.path.join(args.out, "policy.csv")
    )
    write_curve_csv(result, os.path.join(args.out, "curve.csv"))
    write_result_json(result, os.path.join(args.out, "result.json"), extra=metrics)
    print(
        f"{spec.algorithm}: {len(result.curve)} episodes, final moving avg "
        f"{result.moving_avg[-1]:.4f}, eval cost {metrics['discounted_cost']:.4f}"
    )
    return 0


def cmd_bisect(args) -> int:
    spec = _spec(args)
    clients = _clients(args, spec.n_envs)
    try:
        budget = clients[0].spec()["budget"]
        found = bisect_mu(
            spec, clients, budget, tolerance=args.tol, rollout_episodes=args.eval_episodes,
            rollout_steps=args.eval_steps, seed=args.seed,
        )
    finally:
        for client in clients:
            client.close()
    os.makedirs(args.out, exist_ok=True)
    export_policy_csv(
        found.result.policy_table, found.mu_star, args.config_hash,
        os.path.join(args.out, "policy.csv"),
    )
    write_curve_csv(found.result, os.path.join(args.out, "curve.csv"))
    write_result_json(
        found.result, os.path.join(args.out, "result.json"),
        extra={"mu_star": found.mu_star, "eta": found.eta, "cost": found.cost,
               "budget": budget, "outer_steps": found.outer_steps},
    )
    print(f"mu*={found.mu_star:.6f} eta={found.eta:.4f} cost={found.cost:.4f} budget={budget:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drl-harness")
    sub = parser.add_subparsers(dest="verb", required=True)
    for name, func in (("train", cmd_train), ("bisect", cmd_bisect)):
        p = sub.add_parser(name)
        p.add_argument("--algo", choices=["dqn", "a2c", "ppo"], required=True)
        p.add_argument("--gateway", help="HOST:PORT of a serving gateway")
        p.add_argument("--gateway-cmd", help="command line that serves a gateway on stdio")
        p.add_argument("--spec", help="TrainSpec JSON file (defaults per algorithm otherwise)")
        p.add_argument("--mu", type=float, default=0.0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=".")
        p.add_argument("--config-hash", default="unknown")
        p.add_argument("--eval-episodes", type=int, default=20)
        p.add_argument("--eval-steps", type=int, default=300)
        if name == "bisect":
            p.add_argument("--tol", type=float, default=1e-6)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.gateway and not args.gateway_cmd:
        print("error: pass --gateway or --gateway-cmd", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
