"""Client for the environment gateway's line-delimited JSON protocol.

A client either spawns the gateway as a subprocess and speaks over its
standard streams, or connects to a TCP endpoint serving the same protocol.
One client holds one session.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
from dataclasses import dataclass


class GatewayError(RuntimeError):
    """The gateway answered with an error response."""


@dataclass
class StepResult:
    state: int
    obs: list[float]
    reward: float
    goe: float
    cost: float
    t: int
    done: bool


class GatewayClient:
    def __init__(self, command=None, address: str | None = None):
        if (command is None) == (address is None):
            raise ValueError("pass exactly one of command= or address=")
        self._proc = None
        self._sock = None
        if command is not None:
            if isinstance(command, str):
                command = shlex.split(command)
            self._proc = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True, bufsize=1
            )
            self._send = self._proc.stdin
            self._recv = self._proc.stdout
        else:
            host, _, port = address.rpartition(":")
            self._sock = socket.create_connection((host or "127.0.0.1", int(port)))
            fh = self._sock.makefile("rw", encoding="utf-8", newline="\n")
            self._send = fh
            self._recv = fh
        self._spec = None

    def rpc(self, message: dict) -> dict:
        self._send.write(json.dumps(message) + "\n")
        self._send.flush()
        line = self._recv.readline()
        if not line:
            raise GatewayError("gateway closed the connection")
        response = json.loads(line)
        if "err" in response:
            raise GatewayError(response["err"])
        return response

    def spec(self) -> dict:
        if self._spec is None:
            self._spec = self.rpc({"cmd": "spec"})
        return self._spec

    def reset(self, seed: int) -> int:
        return int(self.rpc({"cmd": "reset", "seed": int(seed)})["state"])

    def step(self, action: int) -> StepResult:
        out = self.rpc({"cmd": "step", "action": int(action)})
        return StepResult(
            state=int(out["state"]),
            obs=list(out["obs"]),
            reward=float(out["reward"]),
            goe=float(out["goe"]),
            cost=float(out["cost"]),
            t=int(out["t"]),
            done=bool(out["done"]),
        )

    def set_mu(self, mu: float):
        self.rpc({"cmd": "set_mu", "mu": float(mu)})

    def close(self):
        if self._proc is not None:
            self._proc.stdin.close()
            self._proc.wait(timeout=30)
            self._proc = None
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
