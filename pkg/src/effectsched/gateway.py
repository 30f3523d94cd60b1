"""Remote-steppable environment over a line-delimited JSON protocol.

One request per line, one response per line, strictly in order. Requests:
{"cmd":"spec"|"reset"|"step"|"set_mu", "seed"?:int, "action"?:int,
"mu"?:float}. Floats in responses are serialized at full precision so
identical scripts replay to byte-identical streams.
"""

from __future__ import annotations

import json
import socketserver
import sys

from .config import SystemConfig, max_budget
from .env import Simulator

EPISODE_STEPS = 10_000
PROTOCOL_VERSION = 1


def format_json(obj) -> str:
    """JSON text with floats at 17 significant digits, key order preserved."""
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{format_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(format_json(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, float):
        return format(obj, ".17g")
    return json.dumps(obj)


class GatewaySession:
    """Protocol state for one connection: env, multiplier, episode counter."""

    def __init__(self, config: SystemConfig):
        self.config = config
        self.sim = Simulator(config)
        self.actions = (0,) + config.relevant_attributes()
        self.n_actions = len(self.actions)
        self.n_states = (config.max_aoi * len(config.usefulness.levels)) ** len(
            config.relevant_attributes()
        )
        self.mu = 0.0
        self.state = None
        self.done = False
        self.version = PROTOCOL_VERSION

    # -- command handlers ----------------------------------------------------

    def handle_spec(self, msg) -> dict:
        return {
            "n_states": self.n_states,
            "n_actions": self.n_actions,
            "gamma": self.config.discount,
            "budget": max_budget(self.config),
        }

    def handle_reset(self, msg) -> dict:
        seed = msg.get("seed")
        if seed is not None and not isinstance(seed, int):
            return {"err": "seed must be an integer"}
        self.state = self.sim.reset(seed)
        self.done = False
        return self._state_fields()

    def handle_step(self, msg) -> dict:
        if self.state is None:
            return {"err": "reset required before step"}
        if self.done:
            return {"err": "episode done; reset required"}
        action = msg.get("action")
        if not isinstance(action, int) or isinstance(action, bool):
            return {"err": "action must be an integer"}
        if not 0 <= action < self.n_actions:
            return {"err": "action out of range"}
        attrs = () if action == 0 else (self.actions[action],)
        self.state, record = self.sim.step(self.state, attrs)
        self.done = self.state.t >= EPISODE_STEPS
        out = self._state_fields()
        out["reward"] = self.sim.slot_reward(attrs, self.state, self.mu)
        out["goe"] = record.goe
        out["cost"] = record.cost
        out["t"] = self.state.t
        out["done"] = self.done
        return out

    def handle_set_mu(self, msg) -> dict:
        mu = msg.get("mu")
        if not isinstance(mu, (int, float)) or isinstance(mu, bool):
            return {"err": "mu must be a number"}
        if mu < 0:
            return {"err": "mu must be non-negative"}
        self.mu = float(mu)
        return {"ok": True, "mu": mu}

    def _state_fields(self) -> dict:
        obs = self.sim.observe(self.state)
        return {
            "state": obs.state_index,
            "obs": [int(a) for a in obs.aoi]
            + [float(self.sim.levels[j - 1]) for j in obs.levels],
        }

    def handle_line(self, line: str) -> str:
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return format_json({"err": f"malformed message: {exc.msg}"})
        if not isinstance(msg, dict) or "cmd" not in msg:
            return format_json({"err": "message must carry a cmd field"})
        handler = {
            "spec": self.handle_spec,
            "reset": self.handle_reset,
            "step": self.handle_step,
            "set_mu": self.handle_set_mu,
        }.get(msg["cmd"])
        if handler is None:
            return format_json({"err": f"unknown cmd {msg['cmd']!r}"})
        return format_json(handler(msg))


def serve(config: SystemConfig, stdin=None, stdout=None):
    """Serve one session over standard streams until end-of-input."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = GatewaySession(config)
    for line in stdin:
        if not line.strip():
            continue
        stdout.write(session.handle_line(line) + "\n")
        stdout.flush()


def serve_socket(config: SystemConfig, host: str, port: int):
    """One independent session per connection; sessions share nothing."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            session = GatewaySession(config)
            for raw in self.rfile:
                line = raw.decode("utf-8")
                if not line.strip():
                    continue
                self.wfile.write((session.handle_line(line) + "\n").encode("utf-8"))
                self.wfile.flush()

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    with Server((host, port), Handler) as server:
        server.serve_forever()
