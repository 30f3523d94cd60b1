"""Experiment configuration, the source/usefulness model, and shared primitives.

A configuration is loaded from a nested key/value document (YAML or JSON).
Unspecified fields take the default simulation values; the document only
needs to name what differs.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass

import yaml
from scipy.special import beta as _beta_function

from .cpt import CptParams, value_gain_only
from .errors import ConfigError, ContractError, ValidationError

_SUM_TOL = 1e-12

# Default per-attribute Beta shapes; attributes beyond the list reuse the
# last entry, which is also how short user-supplied lists are extended.
_DEFAULT_SHAPES = ((0.5, 0.5), (2.0, 5.0))


@dataclass(frozen=True)
class AttributeSpec:
    """One source attribute: alphabet, occurrence pmf, and usefulness shapes."""

    id: int
    cardinality: int
    source_pmf: tuple[float, ...]
    alpha_shape: float
    beta_shape: float
    value_grid: tuple[float, ...]

    def validate(self):
        name = f"attributes[{self.id}]"
        if self.cardinality < 2:
            raise ValidationError(f"{name}: cardinality must be >= 2")
        if self.alpha_shape <= 0 or self.beta_shape <= 0:
            raise ValidationError(f"{name}: Beta shapes must be positive")
        if len(self.source_pmf) != self.cardinality:
            raise ValidationError(f"{name}: pmf length must equal cardinality")
        if any(p < 0 for p in self.source_pmf):
            raise ValidationError(f"{name}: pmf entries must be non-negative")
        if abs(sum(self.source_pmf) - 1.0) > _SUM_TOL:
            raise ValidationError(f"{name}: pmf must sum to 1")
        if len(self.value_grid) != self.cardinality:
            raise ValidationError(f"{name}: value grid length must equal cardinality")
        if any(not 0.0 < y < 1.0 for y in self.value_grid):
            raise ValidationError(f"{name}: value grid must lie in the open (0, 1)")
        if any(b <= a for a, b in zip(self.value_grid, self.value_grid[1:])):
            raise ValidationError(f"{name}: value grid must be strictly increasing")


@dataclass(frozen=True)
class UsefulnessModel:
    """Discrete usefulness levels and the per-attribute pmf over them."""

    levels: tuple[float, ...]
    per_attribute_pmf: tuple[tuple[float, ...], ...]

    def validate(self):
        if any(not 0.0 < v <= 1.0 for v in self.levels):
            raise ValidationError("usefulness levels must lie in (0, 1]")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValidationError("usefulness levels must be strictly increasing")
        for m, pmf in enumerate(self.per_attribute_pmf, start=1):
            if len(pmf) != len(self.levels):
                raise ValidationError(f"usefulness pmf of attribute {m} has wrong length")
            if abs(sum(pmf) - 1.0) > _SUM_TOL:
                raise ValidationError(f"usefulness pmf of attribute {m} must sum to 1")


@dataclass(frozen=True)
class AgentSpec:
    """One sensing agent: per-attribute observation accuracy and erasure rate."""

    id: int
    observe_prob: tuple[float, ...]
    erase_prob: float

    def validate(self):
        name = f"agents[{self.id}]"
        if any(not 0.0 <= p < 1.0 for p in self.observe_prob):
            raise ValidationError(f"{name}: observation probabilities must lie in [0, 1)")
        if not 0.0 < self.erase_prob <= 1.0:
            raise ValidationError(f"{name}: erasure probability must lie in (0, 1]")


@dataclass(frozen=True)
class SchedulerSettings:
    kind: str = "policy"
    rho: float = 0.5
    weights: tuple[float, ...] | None = None
    q_rate: float | None = None  # None: track the cost flexibility index

    def validate(self):
        kinds = ("policy", "wrr", "lwgf", "uniform", "markovian", "tabular_q")
        if self.kind not in kinds:
            raise ValidationError(f"scheduler.kind must be one of {kinds}")
        if not 0.0 <= self.rho < 1.0:
            raise ValidationError("scheduler.rho must lie in [0, 1)")
        if self.weights is not None and any(w <= 0 for w in self.weights):
            raise ValidationError("scheduler.weights must be strictly positive")
        if self.q_rate is not None and not 0.0 <= self.q_rate <= 1.0:
            raise ValidationError("scheduler.q_rate must lie in [0, 1]")


@dataclass(frozen=True)
class SystemConfig:
    num_agents: int
    num_attributes: int
    num_actuators: int
    required_sets: tuple[tuple[int, ...], ...]
    attributes: tuple[AttributeSpec, ...]
    agents: tuple[AgentSpec, ...]
    usefulness: UsefulnessModel
    max_aoi: int
    discount: float
    cpt: CptParams
    cost_per_query: float
    cost_flex: float
    query_limit: int
    horizon: int
    seed: int
    eval_tolerance: float = 1e-9
    span_tolerance: float = 1e-6
    mu_tolerance: float = 1e-6
    mixing_eta: float = 0.5
    eta_mode: str = "computed"  # "computed" or "fixed"
    mu_hi_init: float = 16.0
    max_states: int = 1 << 18
    scheduler: SchedulerSettings = SchedulerSettings()

    def validate(self):
        if self.num_agents < 1 or self.num_attributes < 1 or self.num_actuators < 1:
            raise ValidationError("system sizes must be positive")
        if len(self.attributes) != self.num_attributes:
            raise ValidationError("attribute list length must equal M")
        if len(self.agents) != self.num_agents:
            raise ValidationError("agent list length must equal N")
        if len(self.required_sets) != self.num_actuators:
            raise ValidationError("required set count must equal K")
        union = set()
        for k, subset in enumerate(self.required_sets, start=1):
            if any(not 1 <= m <= self.num_attributes for m in subset):
                raise ValidationError(f"goals.required_sets[{k}] names an unknown attribute")
            union.update(subset)
        if not union:
            raise ValidationError("the union of required sets must be non-empty")
        if self.max_aoi < 1:
            raise ValidationError("max AoI must be >= 1")
        if not 0.0 <= self.discount < 1.0:
            raise ValidationError("discount must be < 1")
        if self.cost_per_query <= 0:
            raise ValidationError("cost.per_query must be positive")
        # The type nominally wants flex > 0, but a zero budget is a useful
        # boundary case (never-query policies remain feasible).
        if not 0.0 <= self.cost_flex <= 1.0:
            raise ValidationError("cost.flex must lie in [0, 1]")
        if not 1 <= self.query_limit <= len(union):
            raise ValidationError("query limit must lie in [1, |union of required sets|]")
        if self.horizon < 1:
            raise ValidationError("horizon must be >= 1")
        if self.seed < 0:
            raise ValidationError("seed must be a non-negative integer")
        for tol_name in ("eval_tolerance", "span_tolerance", "mu_tolerance"):
            if getattr(self, tol_name) <= 0:
                raise ValidationError(f"{tol_name} must be positive")
        if not 0.0 <= self.mixing_eta <= 1.0:
            raise ValidationError("solver.eta must lie in [0, 1]")
        if self.eta_mode not in ("computed", "fixed"):
            raise ValidationError("solver.eta_mode must be 'computed' or 'fixed'")
        if self.mu_hi_init <= 0:
            raise ValidationError("solver.mu_hi_init must be positive")
        for attr in self.attributes:
            attr.validate()
        for agent in self.agents:
            agent.validate()
            if len(agent.observe_prob) != self.num_attributes:
                raise ValidationError(
                    f"agents[{agent.id}]: p_observe length must equal M"
                )
        self.usefulness.validate()
        self.cpt.validate()
        self.scheduler.validate()

    def relevant_attributes(self) -> tuple[int, ...]:
        """Attributes required by at least one actuation agent, ascending."""
        return tuple(sorted({m for subset in self.required_sets for m in subset}))


def canonical_levels(n_levels: int) -> tuple[float, ...]:
    return tuple((j + 1) / n_levels for j in range(n_levels))


def default_value_grid(cardinality: int) -> tuple[float, ...]:
    # strictly inside (0, 1) so the Beta density stays finite for shapes < 1
    return tuple(i / (cardinality + 1) for i in range(1, cardinality + 1))


def usefulness_map(attr: AttributeSpec, levels: tuple[float, ...], realization_index: int) -> int:
    """Level index (1-based) of a realization under the capped Beta-density map.

    The raw score is min{1, y^(a-1) (1-y)^(b-1) / B(a, b)} at the grid point of
    the realization; it is quantized with a ceiling onto the level ladder.
    """
    if not 1 <= realization_index <= attr.cardinality:
        raise ContractError(
            f"realization index {realization_index} outside [1, {attr.cardinality}]"
        )
    y = attr.value_grid[realization_index - 1]
    a, b = attr.alpha_shape, attr.beta_shape
    g_raw = min(1.0, y ** (a - 1.0) * (1.0 - y) ** (b - 1.0) / _beta_function(a, b))
    n = len(levels)
    return min(max(math.ceil(g_raw * n), 1), n)


def usefulness_pmf(attr: AttributeSpec, levels: tuple[float, ...]) -> tuple[float, ...]:
    """Occurrence pmf over usefulness levels induced by the source pmf."""
    out = [0.0] * len(levels)
    for i in range(1, attr.cardinality + 1):
        out[usefulness_map(attr, levels, i) - 1] += attr.source_pmf[i - 1]
    return tuple(out)


def build_usefulness(attributes: tuple[AttributeSpec, ...], n_levels: int) -> UsefulnessModel:
    levels = canonical_levels(n_levels)
    return UsefulnessModel(
        levels=levels,
        per_attribute_pmf=tuple(usefulness_pmf(attr, levels) for attr in attributes),
    )


def select_agent(config: SystemConfig, attribute: int) -> int:
    """Agent with the best delivered-accuracy product for the attribute.

    Ties go to the smallest agent id, keeping traces reproducible.
    """
    best, best_score = 1, -1.0
    for agent in config.agents:
        score = (1.0 - agent.erase_prob) * agent.observe_prob[attribute - 1]
        if score > best_score:
            best, best_score = agent.id, score
    return best


def query_cost(is_query: bool, config: SystemConfig) -> float:
    """Per-slot query cost: the fixed per-query charge, or zero when idle."""
    return config.cost_per_query if is_query else 0.0


def max_budget(config: SystemConfig) -> float:
    """Discounted cost ceiling: flex times the all-slots query-cost series."""
    per_slot = value_gain_only(query_cost(True, config), 0.0, config.cpt)
    return config.cost_flex * per_slot / (1.0 - config.discount)


# ---------------------------------------------------------------------------
# Document loading


def _raw_defaults() -> dict:
    return {
        "system": {
            "N": 4,
            "M": 2,
            "K": 4,
            "query_limit": 1,
            "horizon": 1000,
            "seed": 0,
            "max_aoi": 4,
            "usefulness_levels": 4,
        },
        "attributes": [],
        "agents": [],
        "goals": {"required_sets": None},
        "cpt": {
            "alpha": 0.5,
            "beta": 0.5,
            "lambda": 2.0,
            "goe_ref": 0.2,
            "weighting": "identity",
            "weighting_gamma": 0.65,
        },
        "cost": {"per_query": 0.5, "flex": 0.75},
        "solver": {
            "gamma": 0.9,
            "span_tol": 1e-6,
            "mu_tol": 1e-6,
            "eval_tol": 1e-9,
            "eta": 0.5,
            "eta_mode": "computed",
            "mu_hi_init": 16.0,
            "max_states": 1 << 18,
        },
        "scheduler": {"kind": "policy", "rho": 0.5, "weights": None, "q_rate": None},
    }


_SCHEMA_SCALARS = {
    ("system", "N"): int,
    ("system", "M"): int,
    ("system", "K"): int,
    ("system", "query_limit"): int,
    ("system", "horizon"): int,
    ("system", "seed"): int,
    ("system", "max_aoi"): int,
    ("system", "usefulness_levels"): int,
    ("cpt", "alpha"): float,
    ("cpt", "beta"): float,
    ("cpt", "lambda"): float,
    ("cpt", "goe_ref"): float,
    ("cpt", "weighting"): str,
    ("cpt", "weighting_gamma"): float,
    ("cost", "per_query"): float,
    ("cost", "flex"): float,
    ("solver", "gamma"): float,
    ("solver", "span_tol"): float,
    ("solver", "mu_tol"): float,
    ("solver", "eval_tol"): float,
    ("solver", "eta"): float,
    ("solver", "eta_mode"): str,
    ("solver", "mu_hi_init"): float,
    ("solver", "max_states"): int,
    ("scheduler", "kind"): str,
    ("scheduler", "rho"): float,
    ("scheduler", "q_rate"): float,
}


def _merge_section(raw: dict, section: str, doc: dict):
    for key, value in doc.items():
        if section == "goals":
            if key != "required_sets":
                raise ConfigError(f"unknown field goals.{key}")
            raw["goals"]["required_sets"] = value
            continue
        if section == "scheduler" and key == "weights":
            raw["scheduler"]["weights"] = value
            continue
        want = _SCHEMA_SCALARS.get((section, key))
        if want is None:
            raise ConfigError(f"unknown field {section}.{key}")
        if value is None and key == "q_rate":
            raw[section][key] = None
            continue
        try:
            raw[section][key] = want(value)
        except (TypeError, ValueError):
            raise ConfigError(f"field {section}.{key} must be a {want.__name__}") from None


def load_document(document) -> dict:
    """Parse and merge a document (text, mapping, or None) over the defaults."""
    if document is None:
        doc = {}
    elif isinstance(document, str):
        parsed = yaml.safe_load(document) if document.strip() else None
        doc = parsed if parsed is not None else {}
        if not isinstance(doc, dict):
            raise ConfigError("configuration document must be a mapping")
    elif isinstance(document, dict):
        doc = copy.deepcopy(document)
    else:
        raise ConfigError("configuration document must be text or a mapping")

    raw = _raw_defaults()
    for section, body in doc.items():
        if section in ("attributes", "agents"):
            if not isinstance(body, list):
                raise ConfigError(f"field {section} must be a list")
            raw[section] = body
        elif section in ("system", "goals", "cpt", "cost", "solver", "scheduler"):
            if not isinstance(body, dict):
                raise ConfigError(f"field {section} must be a mapping")
            _merge_section(raw, section, body)
        else:
            raise ConfigError(f"unknown section {section}")
    return raw


def _build_attributes(raw: dict) -> tuple[AttributeSpec, ...]:
    m_total = raw["system"]["M"]
    docs = list(raw["attributes"])
    if len(docs) < m_total:
        filler = docs[-1] if docs else None
        while len(docs) < m_total:
            # later attributes reuse the last provided shape entry
            docs.append(copy.deepcopy(filler) if filler is not None else None)
    docs = docs[:m_total]

    out = []
    for idx, doc in enumerate(docs, start=1):
        if doc is None:
            shapes = _DEFAULT_SHAPES[min(idx, len(_DEFAULT_SHAPES)) - 1]
            doc = {}
        else:
            if not isinstance(doc, dict):
                raise ConfigError(f"attributes[{idx}] must be a mapping")
            shapes = None
        known = {"cardinality", "alpha", "beta", "pmf", "value_grid"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"unknown field attributes[{idx}].{key}")
        card = int(doc.get("cardinality", 8))
        alpha = float(doc.get("alpha", shapes[0] if shapes else 2.0))
        beta = float(doc.get("beta", shapes[1] if shapes else 5.0))
        pmf = doc.get("pmf")
        pmf = tuple(float(p) for p in pmf) if pmf is not None else tuple([1.0 / card] * card)
        grid = doc.get("value_grid")
        grid = tuple(float(y) for y in grid) if grid is not None else default_value_grid(card)
        out.append(
            AttributeSpec(
                id=idx,
                cardinality=card,
                source_pmf=pmf,
                alpha_shape=alpha,
                beta_shape=beta,
                value_grid=grid,
            )
        )
    return tuple(out)


def _build_agents(raw: dict) -> tuple[AgentSpec, ...]:
    n_total = raw["system"]["N"]
    m_total = raw["system"]["M"]
    docs = list(raw["agents"])
    if len(docs) < n_total:
        filler = docs[-1] if docs else None
        while len(docs) < n_total:
            docs.append(copy.deepcopy(filler) if filler is not None else None)
    docs = docs[:n_total]

    out = []
    for idx, doc in enumerate(docs, start=1):
        if doc is None:
            doc = {}
        elif not isinstance(doc, dict):
            raise ConfigError(f"agents[{idx}] must be a mapping")
        for key in doc:
            if key not in ("p_observe", "p_erase"):
                raise ConfigError(f"unknown field agents[{idx}].{key}")
        p_obs = doc.get("p_observe", 0.8)
        if isinstance(p_obs, (int, float)):
            p_obs = [float(p_obs)] * m_total
        p_obs = tuple(float(p) for p in p_obs)
        if len(p_obs) != m_total:
            raise ConfigError(f"field agents[{idx}].p_observe must have M entries")
        out.append(AgentSpec(id=idx, observe_prob=p_obs, erase_prob=float(doc.get("p_erase", 0.2))))
    return tuple(out)


def load_config(document=None) -> SystemConfig:
    """Build a validated configuration from a document; defaults fill the rest."""
    raw = load_document(document)
    attributes = _build_attributes(raw)
    agents = _build_agents(raw)

    sets_doc = raw["goals"]["required_sets"]
    if sets_doc is None:
        full = tuple(range(1, raw["system"]["M"] + 1))
        required = tuple(full for _ in range(raw["system"]["K"]))
    else:
        if not isinstance(sets_doc, list) or not all(isinstance(s, list) for s in sets_doc):
            raise ConfigError("field goals.required_sets must be a list of lists")
        if len(sets_doc) != raw["system"]["K"]:
            raise ConfigError("field goals.required_sets must have K entries")
        required = tuple(tuple(sorted(int(m) for m in s)) for s in sets_doc)

    weights = raw["scheduler"]["weights"]
    scheduler = SchedulerSettings(
        kind=raw["scheduler"]["kind"],
        rho=raw["scheduler"]["rho"],
        weights=tuple(float(w) for w in weights) if weights is not None else None,
        q_rate=raw["scheduler"]["q_rate"],
    )

    config = SystemConfig(
        num_agents=raw["system"]["N"],
        num_attributes=raw["system"]["M"],
        num_actuators=raw["system"]["K"],
        required_sets=required,
        attributes=attributes,
        agents=agents,
        usefulness=build_usefulness(attributes, raw["system"]["usefulness_levels"]),
        max_aoi=raw["system"]["max_aoi"],
        discount=raw["solver"]["gamma"],
        cpt=CptParams(
            alpha_gain=raw["cpt"]["alpha"],
            beta_loss=raw["cpt"]["beta"],
            lambda_loss=raw["cpt"]["lambda"],
            goe_ref=raw["cpt"]["goe_ref"],
            weighting=raw["cpt"]["weighting"],
            weighting_gamma=raw["cpt"]["weighting_gamma"],
        ),
        cost_per_query=raw["cost"]["per_query"],
        cost_flex=raw["cost"]["flex"],
        query_limit=raw["system"]["query_limit"],
        horizon=raw["system"]["horizon"],
        seed=raw["system"]["seed"],
        eval_tolerance=raw["solver"]["eval_tol"],
        span_tolerance=raw["solver"]["span_tol"],
        mu_tolerance=raw["solver"]["mu_tol"],
        mixing_eta=raw["solver"]["eta"],
        eta_mode=raw["solver"]["eta_mode"],
        mu_hi_init=raw["solver"]["mu_hi_init"],
        max_states=raw["solver"]["max_states"],
        scheduler=scheduler,
    )
    config.validate()
    return config


def load_config_file(path) -> SystemConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config(fh.read())


def to_document(config: SystemConfig) -> dict:
    """Round-trippable document form of a configuration."""
    return {
        "system": {
            "N": config.num_agents,
            "M": config.num_attributes,
            "K": config.num_actuators,
            "query_limit": config.query_limit,
            "horizon": config.horizon,
            "seed": config.seed,
            "max_aoi": config.max_aoi,
            "usefulness_levels": len(config.usefulness.levels),
        },
        "attributes": [
            {
                "cardinality": a.cardinality,
                "alpha": a.alpha_shape,
                "beta": a.beta_shape,
                "pmf": list(a.source_pmf),
                "value_grid": list(a.value_grid),
            }
            for a in config.attributes
        ],
        "agents": [
            {"p_observe": list(g.observe_prob), "p_erase": g.erase_prob}
            for g in config.agents
        ],
        "goals": {"required_sets": [list(s) for s in config.required_sets]},
        "cpt": {
            "alpha": config.cpt.alpha_gain,
            "beta": config.cpt.beta_loss,
            "lambda": config.cpt.lambda_loss,
            "goe_ref": config.cpt.goe_ref,
            "weighting": config.cpt.weighting,
            "weighting_gamma": config.cpt.weighting_gamma,
        },
        "cost": {"per_query": config.cost_per_query, "flex": config.cost_flex},
        "solver": {
            "gamma": config.discount,
            "span_tol": config.span_tolerance,
            "mu_tol": config.mu_tolerance,
            "eval_tol": config.eval_tolerance,
            "eta": config.mixing_eta,
            "eta_mode": config.eta_mode,
            "mu_hi_init": config.mu_hi_init,
            "max_states": config.max_states,
        },
        "scheduler": {
            "kind": config.scheduler.kind,
            "rho": config.scheduler.rho,
            "weights": list(config.scheduler.weights) if config.scheduler.weights else None,
            "q_rate": config.scheduler.q_rate,
        },
    }


def config_hash(config: SystemConfig) -> str:
    text = json.dumps(to_document(config), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:12]
