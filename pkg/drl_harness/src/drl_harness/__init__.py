"""Deep RL training harness for the effectsched environment gateway."""

from .client import GatewayClient, GatewayError, StepResult
from .search import BracketNotFound, SearchResult, bisect_mu
from .spec import TrainSpec, defaults, load_spec_file
from .train import (
    TrainResult,
    episodes_to_reach,
    export_policy_csv,
    moving_average,
    rollout_metrics,
    train,
    write_curve_csv,
    write_result_json,
)

__version__ = "0.1.0"

__all__ = [
    "BracketNotFound",
    "GatewayClient",
    "GatewayError",
    "SearchResult",
    "StepResult",
    "TrainResult",
    "TrainSpec",
    "bisect_mu",
    "defaults",
    "episodes_to_reach",
    "export_policy_csv",
    "load_spec_file",
    "moving_average",
    "rollout_metrics",
    "train",
    "write_curve_csv",
    "write_result_json",
]
