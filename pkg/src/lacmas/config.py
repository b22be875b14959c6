"""Experiment configuration: JSON file schema, defaults, and builders.

Every field has a default, so an empty file (or no file) yields a runnable
configuration. Unknown keys are rejected with the offending key named, which
catches typos before a long run burns its budget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .engine import RunConfig
from .errors import ConfigError
from .guidance import HeuristicParams, LlmEndpoint
from .objectives import FAMILIES, BenchmarkSpec, make_spec
from .scheduler import PcgConfig
from .swarm import SwarmParams
from .topology import CommGraph, build_explicit, build_random_connected, build_ring
from .wsn import WsnObjectiveSet, gen_measurements, gen_scenario


@dataclass
class GraphSpec:
    kind: str = "ring"
    edge_prob: float = 0.3
    seed: int = 0
    edges: list | None = None

    def __post_init__(self):
        if self.kind not in ("ring", "random", "explicit"):
            raise ConfigError(f"graph.kind must be ring|random|explicit, got {self.kind!r}")


@dataclass
class ObjectiveSpec:
    num_agents: int = 20
    dim: int = 10
    hetero_sigma: float = 0.0
    bound: float = 100.0
    suite_seed: int = 0


@dataclass
class WsnSpec:
    num_sensors: int = 8
    num_targets: int = 1
    noise_sigma: float = 0.0
    seed: int = 0


@dataclass
class GuidanceSpec:
    stall_eps: float = 1e-3
    c_step: float = 0.1
    d_step: float = 0.05
    decay: float = 0.1
    self_weight: float = 0.2
    act_window: int = 19
    coop_window: int = 10
    llm_url: str | None = None
    llm_model: str | None = None
    llm_timeout: float = 30.0
    # Whether the remote endpoint's weight list is expected to carry a
    # trailing self-weight; by default only neighbor weights are requested and
    # the constant self-weight is appended locally.
    llm_coop_includes_self: bool = False


@dataclass
class ExperimentConfig:
    variant: str = "full"
    provider: str = "heuristic"
    master_seed: int = 0
    num_runs: int = 25
    max_iterations: int = 5000
    convergence_threshold: float = 1e-7
    log_every: int = 10
    output_dir: str = "results"
    suite: list[str] = field(default_factory=lambda: list(FAMILIES))
    graph: GraphSpec = field(default_factory=GraphSpec)
    objective: ObjectiveSpec = field(default_factory=ObjectiveSpec)
    wsn: WsnSpec = field(default_factory=WsnSpec)
    pcg: PcgConfig = field(default_factory=PcgConfig)
    swarm: SwarmParams = field(default_factory=SwarmParams)
    guidance: GuidanceSpec = field(default_factory=GuidanceSpec)

    def __post_init__(self):
        for fam in self.suite:
            if fam not in FAMILIES:
                raise ConfigError(f"unknown suite family {fam!r}; choices: {FAMILIES}")


_NESTED = {
    "graph": GraphSpec,
    "objective": ObjectiveSpec,
    "wsn": WsnSpec,
    "pcg": PcgConfig,
    "swarm": SwarmParams,
    "guidance": GuidanceSpec,
}


def _from_dict(cls, data: dict, context: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{context}: expected an object, got {type(data).__name__}")
    allowed = {f.name for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in allowed:
            raise ConfigError(f"unknown configuration key {context}{key!r}")
        if key in _NESTED and cls is ExperimentConfig:
            kwargs[key] = _from_dict(_NESTED[key], value, context=f"{key}.")
        elif key == "alphas":
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{context}: {exc}") from None


def config_from_dict(data: dict) -> ExperimentConfig:
    return _from_dict(ExperimentConfig, data, context="")


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return config_from_dict(data)


# -- builders -------------------------------------------------------------------


def build_graph(cfg: ExperimentConfig, num_agents: int) -> CommGraph:
    g = cfg.graph
    if num_agents == 1:
        return build_explicit(1, [])
    if g.kind == "ring":
        return build_ring(num_agents)
    if g.kind == "random":
        return build_random_connected(num_agents, g.edge_prob, g.seed)
    edges = [(int(a), int(b)) for a, b in (g.edges or [])]
    return build_explicit(num_agents, edges)


def build_benchmark(cfg: ExperimentConfig, family: str) -> BenchmarkSpec:
    o = cfg.objective
    return make_spec(
        family,
        num_agents=o.num_agents,
        dim=o.dim,
        hetero_sigma=o.hetero_sigma,
        seed=o.suite_seed,
        bound=o.bound,
    )


def build_wsn_objective(cfg: ExperimentConfig) -> WsnObjectiveSet:
    w = cfg.wsn
    scenario = gen_scenario(
        num_sensors=w.num_sensors,
        num_targets=w.num_targets,
        seed=w.seed,
        noise_sigma=w.noise_sigma,
    )
    phi = gen_measurements(scenario, seed=w.seed)
    return WsnObjectiveSet(scenario=scenario, phi=phi)


def build_run_config(cfg: ExperimentConfig, objective, graph, master_seed: int) -> RunConfig:
    g = cfg.guidance
    llm = None
    if g.llm_url and g.llm_model:
        llm = LlmEndpoint(base_url=g.llm_url, model=g.llm_model, timeout=g.llm_timeout)
    heuristic = HeuristicParams(
        stall_eps=g.stall_eps,
        c_step=g.c_step,
        d_step=g.d_step,
        decay=g.decay,
        self_weight=g.self_weight,
    )
    return RunConfig(
        objective=objective,
        graph=graph,
        variant=cfg.variant,
        provider=cfg.provider,
        max_iterations=cfg.max_iterations,
        convergence_threshold=cfg.convergence_threshold,
        master_seed=master_seed,
        log_every=cfg.log_every,
        num_runs=cfg.num_runs,
        pcg=cfg.pcg,
        swarm_params=cfg.swarm,
        heuristic=heuristic,
        act_window=g.act_window,
        coop_window=g.coop_window,
        llm=llm,
        llm_coop_includes_self=g.llm_coop_includes_self,
    )
