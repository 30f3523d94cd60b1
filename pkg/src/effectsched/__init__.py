"""Effect-aware query scheduling for pull-based status-update systems.

Builds the constrained decision process for a multi-attribute source
observed through erasure-prone sensing agents, solves it with value
iteration inside a bisection search on the cost multiplier, simulates the
end-to-end link under the solved and benchmark schedulers, and reproduces
the evaluation sweeps.
"""

from .cmdp import (
    StateSpace,
    TransitionTable,
    build_state_space,
    build_transitions,
    check_weak_accessibility,
    reward,
)
from .config import (
    AgentSpec,
    AttributeSpec,
    SystemConfig,
    UsefulnessModel,
    config_hash,
    load_config,
    load_config_file,
    max_budget,
    query_cost,
    select_agent,
    usefulness_map,
    usefulness_pmf,
)
from .cpt import CptParams, value, value_gain_only, weight
from .env import EnvState, Observation, Simulator, TraceRecord, goe_total, reset, slot_reward, step
from .harness import RunSummary, compute_cdf, run, simulate, sweep
from .kernels import BACKEND as KERNEL_BACKEND
from .solver import (
    Policy,
    SolveReport,
    bisection_solve,
    evaluate_discounted_cost,
    evaluate_objective,
    export_policy,
    load_policy,
    sample_action,
    solve_at_mu,
    value_iteration,
)

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "AttributeSpec",
    "CptParams",
    "EnvState",
    "KERNEL_BACKEND",
    "Observation",
    "Policy",
    "RunSummary",
    "Simulator",
    "SolveReport",
    "StateSpace",
    "SystemConfig",
    "TraceRecord",
    "TransitionTable",
    "UsefulnessModel",
    "bisection_solve",
    "build_state_space",
    "build_transitions",
    "check_weak_accessibility",
    "compute_cdf",
    "config_hash",
    "evaluate_discounted_cost",
    "evaluate_objective",
    "export_policy",
    "goe_total",
    "load_config",
    "load_config_file",
    "load_policy",
    "max_budget",
    "query_cost",
    "reset",
    "reward",
    "run",
    "sample_action",
    "select_agent",
    "simulate",
    "slot_reward",
    "solve_at_mu",
    "step",
    "sweep",
    "usefulness_map",
    "usefulness_pmf",
    "value",
    "value_gain_only",
    "value_iteration",
    "weight",
]
