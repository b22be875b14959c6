"""Round-synchronous run loop.

Each round has two phases. In phase one every agent reads its particle
divergence, selects the active regime coefficient, steps its particles against
its own local objective, and publishes a representative state plus trajectory
statistics. At the barrier, guidance refreshes fire if their gates are open,
every agent fuses the published neighborhood states under its cooperation
weights, and the fused state is injected back into the population. Histories,
metrics, and the admissibility check run once per round.

Serial agent order plus per-agent RNG streams derived from the master seed
make runs bit-reproducible with the heuristic provider.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from . import scheduler
from .cooperation import (
    CooperationWeights,
    assemble_mixing_matrix,
    build_descriptor,
    project_weights,
    uniform_weights,
)
from .analysis import check_admissibility
from .errors import ConfigError, NumericalFault
from .guidance import (
    ActRequest,
    CoopRequest,
    HeuristicParams,
    HeuristicProvider,
    LlmEndpoint,
    LlmProvider,
)
from .scheduler import PcgConfig
from .swarm import AgentSwarm, SwarmParams
from .topology import CommGraph, validate

VARIANTS = ("baseline", "act", "coop", "full")
_ACT_VARIANTS = ("act", "full")
_COOP_VARIANTS = ("coop", "full")

DESCRIPTOR_SCALARS = 3  # fitness / divergence / state-delta means per exchange


class ObjectiveSet(Protocol):
    num_agents: int
    dim: int

    @property
    def lower(self) -> np.ndarray: ...

    @property
    def upper(self) -> np.ndarray: ...

    def eval_local(self, agent: int, x: np.ndarray) -> float: ...

    def eval_local_batch(self, agent: int, xs: np.ndarray) -> np.ndarray: ...

    def eval_global(self, x: np.ndarray) -> float: ...


# -- metrics -------------------------------------------------------------------


def disagreement(states: np.ndarray) -> float:
    """Mean squared deviation of agent states from their mean; 0 iff consensus."""
    states = np.asarray(states, dtype=float)
    d = states - states.mean(axis=0)
    return float((d * d).sum() / len(states))


def local_disagreement(own: np.ndarray, neighbor_states: list[np.ndarray]) -> float:
    """Mean distance from an agent's state to its neighbors' states."""
    if not neighbor_states:
        return 0.0
    own = np.asarray(own, dtype=float)
    return float(np.mean([np.linalg.norm(own - s) for s in neighbor_states]))


def comm_cost_per_round(graph: CommGraph, dim: int) -> int:
    """Scalars on the wire per round: a state vector plus a descriptor triple
    per directed edge."""
    return graph.num_directed_edges() * (dim + DESCRIPTOR_SCALARS)


# -- history -------------------------------------------------------------------


@dataclass(frozen=True)
class HistoryRecord:
    iteration: int
    best_fitness: float
    divergence: float
    state_delta: float
    local_disagreement: float


class AgentHistory:
    """Bounded per-agent trajectory log feeding descriptors and prompts."""

    def __init__(self, capacity: int = 32):
        if capacity < 19:
            raise ConfigError("history capacity must cover the act window (19)")
        self.capacity = capacity
        self._records: list[HistoryRecord] = []

    def append(self, record: HistoryRecord) -> None:
        if self._records and record.iteration <= self._records[-1].iteration:
            raise ConfigError("history iterations must be strictly increasing")
        self._records.append(record)
        if len(self._records) > self.capacity:
            del self._records[0]

    def recent(self, window: int) -> list[HistoryRecord]:
        """The most recent min(window, len) records, oldest first."""
        return self._records[-window:]

    def __len__(self) -> int:
        return len(self._records)


# -- configuration and report ----------------------------------------------------


@dataclass
class RunConfig:
    objective: ObjectiveSet
    graph: CommGraph
    variant: str = "full"
    provider: str = "heuristic"
    max_iterations: int = 5000
    convergence_threshold: float = 1e-7
    # When False the run continues to the iteration cap after the disagreement
    # threshold is first crossed; the crossing is still recorded, which keeps
    # cost-to-convergence and fixed-budget fitness comparable across variants.
    stop_at_convergence: bool = True
    master_seed: int = 0
    log_every: int = 10
    num_runs: int = 25
    pcg: PcgConfig = field(default_factory=PcgConfig)
    swarm_params: SwarmParams = field(default_factory=SwarmParams)
    heuristic: HeuristicParams = field(default_factory=HeuristicParams)
    act_defaults: tuple[float, float] = (0.7, 1.3)
    act_window: int = 19
    coop_window: int = 10
    history_capacity: int = 32
    llm: LlmEndpoint | None = None
    llm_coop_includes_self: bool = False
    record_matrices: bool = False

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.provider not in ("heuristic", "llm"):
            raise ConfigError(f"provider must be heuristic or llm, got {self.provider!r}")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be positive")
        if self.convergence_threshold <= 0:
            raise ConfigError("convergence_threshold must be positive")
        if self.log_every < 1:
            raise ConfigError("log_every must be positive")
        if self.graph.num_agents != self.objective.num_agents:
            raise ConfigError(
                f"graph has {self.graph.num_agents} agents, "
                f"objective has {self.objective.num_agents}"
            )
        report = validate(self.graph)
        if not report.ok:
            raise ConfigError(f"invalid graph: {report.violation}")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    global_fitness_mean_state: float
    disagreement: float
    comm_cost: int
    stage: int
    gate_int: int
    gate_ext: int


@dataclass
class RunReport:
    variant: str
    master_seed: int
    rows: list[TraceRow]
    disagreement_trace: list[float]
    xi_norm_trace: list[float]
    comm_cost_total: int
    comm_cost_at_convergence: int
    converged_at: int | None
    final_states: np.ndarray
    final_mean_state: np.ndarray
    final_fitness_mean_state: float
    final_mean_local_fitness: float
    final_best_agent_value: float
    act_calls: int
    coop_calls: int
    provider_fallbacks: int
    admissibility_violations: int
    max_row_deviation: float
    gate_int_iterations: list[int]
    wall_clock: float
    aborted: bool = False
    fault: str | None = None
    matrices: list[np.ndarray] | None = None


CSV_HEADER = "iteration,global_fitness_mean_state,disagreement,comm_cost,stage,gate_int,gate_ext"


def write_trace_csv(report: RunReport, path) -> None:
    """Emit the sampled trace; float fields use shortest-roundtrip repr so
    identical runs produce identical bytes."""
    lines = [f"# master_seed={report.master_seed} variant={report.variant}", CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.iteration},{r.global_fitness_mean_state!r},{r.disagreement!r},"
            f"{r.comm_cost},{r.stage},{r.gate_int},{r.gate_ext}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def summarize(report: RunReport) -> str:
    conv = report.converged_at if report.converged_at is not None else "none"
    lines = [
        f"variant={report.variant} seed={report.master_seed}",
        f"converged_at={conv}",
        f"final_fitness_mean_state={report.final_fitness_mean_state!r}",
        f"final_mean_local_fitness={report.final_mean_local_fitness!r}",
        f"final_best_agent_value={report.final_best_agent_value!r}",
        f"final_disagreement={report.disagreement_trace[-1]!r}" if report.disagreement_trace else "final_disagreement=nan",
        f"comm_cost_total={report.comm_cost_total}",
        f"comm_cost_at_convergence={report.comm_cost_at_convergence}",
        f"act_calls={report.act_calls} coop_calls={report.coop_calls} fallbacks={report.provider_fallbacks}",
        f"admissibility_violations={report.admissibility_violations}",
        f"wall_clock_s={report.wall_clock:.3f}",
    ]
    if report.aborted:
        lines.append(f"aborted=true fault={report.fault}")
    return "\n".join(lines)


# -- run loop -------------------------------------------------------------------


def _make_provider(config: RunConfig):
    if config.provider == "llm":
        endpoint = config.llm if config.llm is not None else LlmEndpoint.from_env()
        return LlmProvider(
            endpoint=endpoint,
            params=config.heuristic,
            coop_response_includes_self=config.llm_coop_includes_self,
        )
    return HeuristicProvider(config.heuristic)


def run(config: RunConfig, provider=None) -> RunReport:
    """Execute one seeded run to convergence or the iteration cap."""
    start = time.perf_counter()
    obj, graph = config.objective, config.graph
    n, dim = obj.num_agents, obj.dim
    if provider is None:
        provider = _make_provider(config)

    d0, c0 = config.act_defaults
    agent_seqs = np.random.SeedSequence(config.master_seed).spawn(n)
    swarms = []
    evaluators = []
    for i in range(n):
        rng = np.random.default_rng(agent_seqs[i])
        swarm = AgentSwarm(
            agent_id=i,
            dim=dim,
            lower=obj.lower,
            upper=obj.upper,
            params=config.swarm_params,
            rng=rng,
            coefficients=(d0, 1.0, c0),
        )
        evaluator = _local_evaluator(obj, i)
        swarm.evaluate_initial(evaluator)
        swarms.append(swarm)
        evaluators.append(evaluator)

    weights: list[CooperationWeights] = [uniform_weights(graph, i) for i in range(n)]
    histories = [AgentHistory(config.history_capacity) for _ in range(n)]
    coeffs = [(d0, c0) for _ in range(n)]
    neighbor_lists = [graph.neighbor_lists[i] for i in range(n)]
    round_cost = comm_cost_per_round(graph, dim)
    # Flattened directed-edge arrays for vectorized local-disagreement means.
    edge_src = np.array([i for i in range(n) for _ in neighbor_lists[i]], dtype=int)
    edge_dst = np.array([k for i in range(n) for k in neighbor_lists[i]], dtype=int)
    degrees = np.array([max(len(nb), 1) for nb in neighbor_lists], dtype=float)

    reps = np.stack([s.representative_state() for s in swarms])
    consensus_prev = reps.copy()
    fused_prev: np.ndarray | None = None

    rows: list[TraceRow] = []
    dis_trace: list[float] = []
    xi_trace: list[float] = []
    matrices: list[np.ndarray] | None = [] if config.record_matrices else None
    comm_cost = 0
    act_calls = coop_calls = 0
    adm_violations = 0
    max_row_dev = 0.0
    gate_int_hits: list[int] = []
    converged_at: int | None = None
    aborted = False
    fault: str | None = None
    t = -1

    # The mixing matrix only changes on cooperation refreshes; assemble and
    # verify it when it does, reuse it otherwise.
    matrix = assemble_mixing_matrix(weights, graph)
    adm = check_admissibility(matrix, graph)
    weights_dirty = False

    phased = config.swarm_params.late_stage_refocus

    for t in range(config.max_iterations):
        # Phase 1: local adaptive swarm steps; publish representatives.
        late_stage = t >= config.pcg.horizon_T
        record_pull = late_stage or not phased
        if phased and t == config.pcg.horizon_T:
            for swarm in swarms:
                swarm.rebase_records()
        divergences = np.empty(n)
        try:
            for i, swarm in enumerate(swarms):
                div = swarm.divergence()
                divergences[i] = div
                active = swarm.select_coefficient(div)
                if late_stage:
                    # Late-stage stabilization: no expansion past the horizon.
                    active = min(active, 1.0)
                swarm.step_particles(active, evaluators[i], record_pull=record_pull)
                reps[i] = swarm.representative_state()
        except NumericalFault as exc:
            aborted, fault = True, str(exc)
            break

        # Phase 2: guidance refreshes, weighted fusion, bookkeeping.
        g_int = scheduler.gate_int(t, config.pcg)
        g_ext = scheduler.gate_ext(t, config.pcg)

        if g_int and config.variant in _ACT_VARIANTS and all(len(h) > 0 for h in histories):
            gate_int_hits.append(t)
            for i in range(n):
                records = histories[i].recent(config.act_window)
                req = ActRequest(
                    iteration=t,
                    current_d=coeffs[i][0],
                    current_c=coeffs[i][1],
                    trajectory=tuple(
                        (r.iteration, r.best_fitness, r.local_disagreement) for r in records
                    ),
                )
                out = provider.advise_act(req)
                act_calls += 1
                coeffs[i] = (out.d, out.c)
                swarms[i].set_coefficients(out.d, 1.0, out.c)

        if g_ext and config.variant in _COOP_VARIANTS and all(len(h) > 0 for h in histories):
            for i in range(n):
                nbrs = neighbor_lists[i]
                if not nbrs:
                    continue
                descriptors = [build_descriptor(histories[k], config.coop_window) for k in nbrs]
                req = CoopRequest(
                    neighbor_ids=tuple(nbrs),
                    neighbor_stats=tuple(
                        (d.avg_fitness, d.avg_divergence) for d in descriptors
                    ),
                )
                out = provider.advise_coop(req)
                coop_calls += 1
                raw = {k: out.raw_weights[j] for j, k in enumerate(nbrs)}
                raw[i] = out.raw_weights[-1]
                weights[i] = project_weights(raw, graph, i)
                weights_dirty = True

        if weights_dirty:
            matrix = assemble_mixing_matrix(weights, graph)
            adm = check_admissibility(matrix, graph)
            weights_dirty = False

        fused = matrix @ reps
        if not adm.passed:
            adm_violations += 1
        max_row_dev = max(max_row_dev, adm.max_row_deviation)
        if matrices is not None:
            matrices.append(matrix)

        if fused_prev is not None:
            xi_trace.append(float(np.linalg.norm(reps - fused_prev)))

        refocus = phased and late_stage
        for i in range(n):
            swarms[i].inject_fused_state(fused[i], evaluators[i], refocus=refocus)

        diffs = fused - consensus_prev
        state_deltas = np.sqrt((diffs * diffs).sum(axis=1))
        if len(edge_src):
            e = fused[edge_src] - fused[edge_dst]
            edge_norms = np.sqrt((e * e).sum(axis=1))
            local_dis = np.bincount(edge_src, weights=edge_norms, minlength=n) / degrees
        else:
            local_dis = np.zeros(n)
        for i in range(n):
            histories[i].append(
                HistoryRecord(
                    iteration=t,
                    best_fitness=swarms[i].best_value(),
                    divergence=float(divergences[i]),
                    state_delta=float(state_deltas[i]),
                    local_disagreement=float(local_dis[i]),
                )
            )

        dis = disagreement(fused)
        dis_trace.append(dis)
        comm_cost += round_cost
        consensus_prev = fused.copy()
        fused_prev = fused.copy()

        hit_threshold = dis < config.convergence_threshold and converged_at is None
        stopping = hit_threshold and config.stop_at_convergence
        last_round = t == config.max_iterations - 1
        if t % config.log_every == 0 or stopping or last_round:
            rows.append(
                TraceRow(
                    iteration=t,
                    global_fitness_mean_state=obj.eval_global(fused.mean(axis=0)),
                    disagreement=dis,
                    comm_cost=comm_cost,
                    stage=scheduler.stage(t, config.pcg),
                    gate_int=int(g_int),
                    gate_ext=int(g_ext),
                )
            )
        if hit_threshold:
            converged_at = t
            if config.stop_at_convergence:
                break

    if fused_prev is not None:
        final_states = fused_prev
    else:
        final_states = reps.copy()
    mean_state = final_states.mean(axis=0)
    fallbacks = getattr(provider, "fallback_count", 0)
    if converged_at is not None:
        cost_at_conv = (converged_at + 1) * round_cost
    else:
        cost_at_conv = comm_cost

    return RunReport(
        variant=config.variant,
        master_seed=config.master_seed,
        rows=rows,
        disagreement_trace=dis_trace,
        xi_norm_trace=xi_trace,
        comm_cost_total=comm_cost,
        comm_cost_at_convergence=cost_at_conv,
        converged_at=converged_at,
        final_states=final_states,
        final_mean_state=mean_state,
        final_fitness_mean_state=obj.eval_global(mean_state) if not aborted else float("nan"),
        final_mean_local_fitness=float(
            np.mean([obj.eval_local(i, final_states[i]) for i in range(n)])
        )
        if not aborted
        else float("nan"),
        final_best_agent_value=float(min(s.best_value() for s in swarms)),
        act_calls=act_calls,
        coop_calls=coop_calls,
        provider_fallbacks=fallbacks,
        admissibility_violations=adm_violations,
        max_row_deviation=max_row_dev,
        gate_int_iterations=gate_int_hits,
        wall_clock=time.perf_counter() - start,
        aborted=aborted,
        fault=fault,
        matrices=matrices,
    )


def _local_evaluator(obj: ObjectiveSet, agent: int):
    def evaluate(xs: np.ndarray) -> np.ndarray:
        return obj.eval_local_batch(agent, xs)

    return evaluate
