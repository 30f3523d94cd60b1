"""Model-based policy computation.

Value iteration with a span-seminorm stopping rule runs inside a bisection
search on the Lagrange multiplier; if the final deterministic policy leaves
budget unused, two bracketing policies are mixed per slot with probability
eta.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cmdp import TransitionTable, action_cost_vector, reward_vector
from .config import SystemConfig, config_hash, max_budget
from .errors import ContractError, ConvergenceError, InfeasibleError, ValidationError

_MU_DOUBLING_CAP = 2.0**20
_VI_ITERATION_CAP = 1_000_000


@dataclass
class Policy:
    """Deterministic action table, or a per-slot mixture of two tables."""

    kind: str  # "deterministic" or "mixture"
    table: np.ndarray | None = None
    table_minus: np.ndarray | None = None
    table_plus: np.ndarray | None = None
    eta: float = 0.0

    def validate(self, n_states: int, n_actions: int):
        tables = [self.table] if self.kind == "deterministic" else [
            self.table_minus,
            self.table_plus,
        ]
        for t in tables:
            if t is None or len(t) != n_states:
                raise ValidationError("policy table does not cover the state space")
            if np.any(t < 0) or np.any(t >= n_actions):
                raise ValidationError("policy table holds an out-of-range action")
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError("mixture eta must lie in [0, 1]")


def sample_action(policy: Policy, state: int, rng: np.random.Generator) -> int:
    """Action for one slot; mixtures draw which table to follow this slot."""
    if policy.kind == "deterministic":
        return int(policy.table[state])
    if rng.random() < policy.eta:
        return int(policy.table_minus[state])
    return int(policy.table_plus[state])


@dataclass
class SolveReport:
    mu_star: float
    policy: Policy
    value_function: np.ndarray
    objective_value: float
    cost_value: float
    budget: float
    feasible: bool
    outer_steps: int
    inner_iterations: list[int]
    span_history: list[float]
    value_spread: float = 0.0
    cost_spread: float = 0.0

    def to_json_dict(self, include_values: bool = True) -> dict:
        out = {
            "mu_star": self.mu_star,
            "kind": self.policy.kind,
            "eta": self.policy.eta,
            "objective_value": self.objective_value,
            "cost_value": self.cost_value,
            "budget": self.budget,
            "feasible": self.feasible,
            "outer_steps": self.outer_steps,
            "inner_iterations": self.inner_iterations,
            "span_history": self.span_history,
            "value_spread": self.value_spread,
            "cost_spread": self.cost_spread,
            "kernel_backend": kernels.BACKEND,
        }
        if include_values and len(self.value_function) <= 10_000:
            out["value_function"] = [float(v) for v in self.value_function]
        return out


def value_iteration(table: TransitionTable, mu: float, config: SystemConfig,
                    span_out: list | None = None):
    """Optimal values and greedy policy for a fixed multiplier.

    Sweeps start from zero and stop when the span of successive differences
    drops below the configured sensitivity. Span convergence pins the policy
    but leaves the values off by a near-constant shift, so the returned
    vector is the converged policy's own fixed point, evaluated to the
    tighter evaluation tolerance. When `span_out` is given, the span at the
    stopping sweep is appended to it.
    """
    if mu < 0:
        raise ContractError("multiplier must be non-negative")
    space = table.space
    rnext = reward_vector(config, space)
    act_cost = action_cost_vector(config, space)
    gamma = config.discount

    v = np.zeros(space.n_states)
    v_new = np.empty_like(v)
    pol = np.zeros(space.n_states, dtype=np.int64)
    for i in range(1, _VI_ITERATION_CAP + 1):
        kernels.vi_sweep(
            v, v_new, pol, table.row_ptr, table.succ, table.wmass, table.wsum,
            rnext, act_cost, mu, gamma, space.n_states, space.n_actions,
        )
        diff = v_new - v
        span = float(diff.max() - diff.min())
        if not np.isfinite(span):
            # unnormalized weighted masses can push the effective discount
            # past one, in which case the sweeps blow up instead of settling
            raise ConvergenceError(f"value iteration diverged after {i} sweeps")
        v, v_new = v_new, v
        if span < config.span_tolerance:
            if span_out is not None:
                span_out.append(span)
            policy = Policy(kind="deterministic", table=pol.copy())
            v = _fixed_point(table, policy.table, rnext, -mu * act_cost[policy.table], config)
            return v, policy, i
    raise ConvergenceError(
        f"value iteration exceeded {_VI_ITERATION_CAP} sweeps (last span {span:.3e})"
    )


def _policy_view(table: TransitionTable, actions: np.ndarray):
    """CSR restriction of the kernel to one action per state."""
    rows = np.arange(table.n_states, dtype=np.int64) * table.n_actions + actions
    starts = table.row_ptr[rows]
    stops = table.row_ptr[rows + 1]
    lengths = stops - starts
    flat = np.repeat(starts, lengths) + _ranges(lengths)
    row_ptr = np.concatenate(([0], np.cumsum(lengths)))
    return row_ptr, table.succ[flat], table.wmass[flat], table.wsum[rows]


def _ranges(lengths: np.ndarray) -> np.ndarray:
    total = int(lengths.sum())
    out = np.ones(total, dtype=np.int64)
    out[0] = 0
    ends = np.cumsum(lengths)[:-1]
    out[ends] = 1 - lengths[:-1]
    return np.cumsum(out)


def _fixed_point(table, actions, addend, stage, config) -> np.ndarray:
    row_ptr, succ, wmass, wsum = _policy_view(table, actions)
    n = table.n_states
    x = np.zeros(n)
    x_new = np.empty_like(x)
    gamma = config.discount
    for _ in range(_VI_ITERATION_CAP):
        kernels.policy_sweep(x, x_new, row_ptr, succ, wmass, wsum, addend, stage, gamma, n)
        delta = float(np.max(np.abs(x_new - x)))
        x, x_new = x_new, x
        if delta < config.eval_tolerance:
            return x
    raise ConvergenceError("policy evaluation did not converge")


def _cost_vector(table, actions, config) -> np.ndarray:
    act_cost = action_cost_vector(config, table.space)
    return _fixed_point(table, actions, np.zeros(table.n_states), act_cost[actions], config)


def _objective_vector(table, actions, config) -> np.ndarray:
    rnext = reward_vector(config, table.space)
    return _fixed_point(table, actions, rnext, np.zeros(table.n_states), config)


def _combine(policy: Policy, per_table) -> np.ndarray:
    if policy.kind == "deterministic":
        return per_table(policy.table)
    minus = per_table(policy.table_minus)
    plus = per_table(policy.table_plus)
    return policy.eta * minus + (1.0 - policy.eta) * plus


def evaluate_discounted_cost(policy: Policy, table: TransitionTable,
                             config: SystemConfig) -> float:
    """Expected discounted prospect-valued query cost from the fresh state.

    Mixtures are scored as the eta-weighted combination of their two
    components, matching how the mixing probability is chosen.
    """
    vec = _combine(policy, lambda acts: _cost_vector(table, acts, config))
    return float(vec[0])


def evaluate_objective(policy: Policy, table: TransitionTable,
                       config: SystemConfig) -> float:
    """Expected discounted prospect-valued effectiveness from the fresh state."""
    vec = _combine(policy, lambda acts: _objective_vector(table, acts, config))
    return float(vec[0])


def _report(policy, v, mu_star, table, config, outer, inners, spans) -> SolveReport:
    cost_vec = _combine(policy, lambda a: _cost_vector(table, a, config))
    obj_vec = _combine(policy, lambda a: _objective_vector(table, a, config))
    budget = max_budget(config)
    cost_value = float(cost_vec[0])
    return SolveReport(
        mu_star=mu_star,
        policy=policy,
        value_function=v,
        objective_value=float(obj_vec[0]),
        cost_value=cost_value,
        budget=budget,
        feasible=cost_value <= budget + 1e-6,
        outer_steps=outer,
        inner_iterations=inners,
        span_history=spans,
        value_spread=float(obj_vec.max() - obj_vec.min()),
        cost_spread=float(cost_vec.max() - cost_vec.min()),
    )


def solve_at_mu(table: TransitionTable, config: SystemConfig, mu: float) -> SolveReport:
    """Greedy policy for a fixed multiplier, skipping the budget search."""
    spans: list[float] = []
    v, policy, it = value_iteration(table, mu, config, span_out=spans)
    return _report(policy, v, mu, table, config, 0, [it], spans)


def bisection_solve(table: TransitionTable, config: SystemConfig,
                    eta_mode: str | None = None) -> SolveReport:
    """Smallest multiplier whose greedy policy meets the budget, plus mixing.

    The search brackets the budget boundary, doubling the upper end from its
    configured start until feasible, then halves the bracket down to the
    multiplier tolerance. A strictly-under-budget final policy is mixed with
    the infeasible bracket policy, with eta either taken from the
    configuration or computed to exhaust the budget.
    """
    eta_mode = eta_mode or config.eta_mode
    budget = max_budget(config)
    inners: list[int] = []
    spans: list[float] = []  # stopping span of each inner value iteration

    def derive(mu):
        v, policy, it = value_iteration(table, mu, config, span_out=spans)
        inners.append(it)
        cost = float(_cost_vector(table, policy.table, config)[0])
        return v, policy, cost

    v0, pol0, cost0 = derive(0.0)
    if cost0 <= budget:
        return _report(pol0, v0, 0.0, table, config, 0, inners, spans)

    mu_lo, pol_lo, cost_lo = 0.0, pol0, cost0
    mu_hi = config.mu_hi_init
    while True:
        v_hi, pol_hi, cost_hi = derive(mu_hi)
        if cost_hi <= budget:
            break
        mu_lo, pol_lo, cost_lo = mu_hi, pol_hi, cost_hi
        mu_hi *= 2.0
        if mu_hi > _MU_DOUBLING_CAP:
            raise InfeasibleError(
                f"no multiplier up to {_MU_DOUBLING_CAP} satisfies the budget"
            )

    outer = 0
    mu_mid, v_mid = mu_hi, v_hi
    while mu_hi - mu_lo >= config.mu_tolerance:
        outer += 1
        mu_mid = (mu_lo + mu_hi) / 2.0
        v_mid, pol_mid, cost_mid = derive(mu_mid)
        if cost_mid >= budget:
            mu_lo, pol_lo, cost_lo = mu_mid, pol_mid, cost_mid
        else:
            mu_hi, pol_hi, cost_hi = mu_mid, pol_mid, cost_mid
            v_hi = v_mid

    if cost_hi < budget and cost_lo > cost_hi:
        if eta_mode == "fixed":
            eta = config.mixing_eta
        else:
            eta = float(np.clip((budget - cost_hi) / (cost_lo - cost_hi), 0.0, 1.0))
        policy = Policy(
            kind="mixture",
            table_minus=pol_lo.table,
            table_plus=pol_hi.table,
            eta=eta,
        )
    else:
        policy = pol_hi
    return _report(policy, v_hi, mu_mid, table, config, outer, inners, spans)


# ---------------------------------------------------------------------------
# Policy files

_POLICY_MAGIC = "effectsched-policy"


def export_policy(policy: Policy, mu_star: float, config: SystemConfig, path):
    """CSV with a metadata header line carrying the multiplier, eta, and hash."""
    header = (
        f"# {_POLICY_MAGIC} v1 kind={policy.kind} mu_star={mu_star!r} "
        f"eta={policy.eta!r} config={config_hash(config)}"
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(header + "\n")
        writer = csv.writer(fh)
        if policy.kind == "deterministic":
            writer.writerow(["state_index", "action"])
            for s, a in enumerate(policy.table):
                writer.writerow([s, int(a)])
        else:
            writer.writerow(["state_index", "action_minus", "action_plus"])
            for s in range(len(policy.table_minus)):
                writer.writerow([s, int(policy.table_minus[s]), int(policy.table_plus[s])])


def load_policy(path, n_states: int, n_actions: int):
    """Parse and validate a policy file; returns (Policy, metadata)."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith(f"# {_POLICY_MAGIC}"):
            raise ValidationError(f"{path}: not a policy file")
        meta = {}
        for token in header[2:].split()[2:]:
            key, _, value = token.partition("=")
            meta[key] = value
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: missing column header")
    columns, body = rows[0], rows[1:]
    if len(body) != n_states:
        raise ValidationError(
            f"{path}: {len(body)} rows for a {n_states}-state space"
        )
    kind = meta.get("kind", "deterministic")
    expected = (
        ["state_index", "action"]
        if kind == "deterministic"
        else ["state_index", "action_minus", "action_plus"]
    )
    if columns != expected:
        raise ValidationError(f"{path}: unexpected columns {columns}")
    data = np.asarray([[int(cell) for cell in row] for row in body], dtype=np.int64)
    if np.any(data[:, 0] != np.arange(n_states)):
        raise ValidationError(f"{path}: state indices must be 0..{n_states - 1} in order")
    if kind == "deterministic":
        policy = Policy(kind="deterministic", table=data[:, 1])
    else:
        policy = Policy(
            kind="mixture",
            table_minus=data[:, 1],
            table_plus=data[:, 2],
            eta=float(meta.get("eta", 0.5)),
        )
    policy.validate(n_states, n_actions)
    meta["mu_star"] = float(meta.get("mu_star", 0.0))
    return policy, meta
