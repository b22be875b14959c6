"""Advisory layer proposing internal coefficients and cooperation weights.

Two providers implement the same interface: a deterministic heuristic that
encodes the qualitative adaptation rules directly, and an HTTP client for a
locally served language model that is prompted with the same trajectory
windows. Every provider path terminates with in-range action guidance and
finite raw weights; a failed remote query falls back to the heuristic for that
refresh, so a run can never stall on guidance.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field

import numpy as np
import requests

from .errors import ContractError, GuidanceParseError, LlmTransportError

D_RANGE = (0.5, 1.0)
C_RANGE = (1.0, 1.8)
D_DEFAULT = 0.7
C_DEFAULT = 1.3

ACT_WINDOW = 19
COOP_WINDOW = 10

ENV_LLM_URL = "LACMAS_LLM_URL"
ENV_LLM_MODEL = "LACMAS_LLM_MODEL"

PROMPT_VERSION = "1"

ACT_PROMPT_HEADER = """Tuning task: high-dimensional black-box optimization.
Current iteration: around {iteration}.
Current parameters: d={d}, c={c}.
Recent trajectory (past 19 iterations):
"""

ACT_PROMPT_FOOTER = """
Requirement:
If fitness stagnates while disagreement is low, increase c;
If fitness decreases slowly while disagreement is high, increase d.
Only return the updated parameters in parentheses, separated by a comma.
Constraints: d in [0.5, 1], c in [1, 1.8].
Example: (0.7, 1.3)
"""

COOP_PROMPT_HEADER = """Task: update the neighbor weight vector for multi-agent optimization.
Number of neighbors: {n}.

Weight update rules:
1. If a neighbor has low fitness and low disagreement, increase its weight (0.3–0.5);
2. If a neighbor has high fitness and high disagreement, decrease its weight (0.1–0.2);
3. Fitness is prioritized; weights must sum to 1.

Neighbor performance history (last 10 iterations):
"""

COOP_PROMPT_FOOTER = """
Please return the updated weights in the format [w1, w2, ..., wN].
"""


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


# -- request / guidance types ------------------------------------------------


@dataclass(frozen=True)
class ActRequest:
    """Local trajectory window backing one internal-action refresh."""

    iteration: int
    current_d: float
    current_c: float
    # (iteration, fitness, local disagreement), oldest first.
    trajectory: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        if len(self.trajectory) > ACT_WINDOW:
            raise ContractError(f"act window is at most {ACT_WINDOW} entries")
        if not D_RANGE[0] <= self.current_d <= D_RANGE[1]:
            raise ContractError(f"current_d {self.current_d} out of range")
        if not C_RANGE[0] <= self.current_c <= C_RANGE[1]:
            raise ContractError(f"current_c {self.current_c} out of range")


@dataclass(frozen=True)
class ActGuidance:
    """Updated (d, c) pair; always clamped into the admissible box."""

    d: float
    c: float

    def __post_init__(self):
        object.__setattr__(self, "d", _clamp(float(self.d), *D_RANGE))
        object.__setattr__(self, "c", _clamp(float(self.c), *C_RANGE))


@dataclass(frozen=True)
class CoopRequest:
    """Per-neighbor window statistics backing one cooperation refresh."""

    neighbor_ids: tuple[int, ...]
    # Aligned with neighbor_ids: (avg fitness, avg disagreement).
    neighbor_stats: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.neighbor_ids) < 1:
            raise ContractError("cooperation request needs at least one neighbor")
        if len(self.neighbor_stats) != len(self.neighbor_ids):
            raise ContractError("neighbor_stats misaligned with neighbor_ids")


@dataclass(frozen=True)
class CoopGuidance:
    """Raw weights aligned with the request's neighbor_ids, self entry last.

    Feasibility (nonnegativity, unit sum) is enforced downstream by
    cooperation.project_weights; here only finiteness is required.
    """

    raw_weights: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(w) for w in self.raw_weights):
            raise ContractError("raw weights must be finite")


# -- heuristic rules -----------------------------------------------------------


@dataclass(frozen=True)
class HeuristicParams:
    stall_eps: float = 1e-3
    c_step: float = 0.1
    d_step: float = 0.05
    decay: float = 0.1
    self_weight: float = 0.2


def heuristic_advise_act(req: ActRequest, params: HeuristicParams = HeuristicParams()) -> ActGuidance:
    """Rule-based (d, c) update from the trajectory window.

    Stagnation with low disagreement raises the escape coefficient c;
    stagnation with high disagreement raises the damping coefficient d;
    otherwise both relax toward their defaults. Low/high is judged against the
    25th/75th percentile of the window's own disagreement values.
    """
    if not req.trajectory:
        raise ContractError("empty trajectory")
    fitness = [f for (_, f, _) in req.trajectory]
    disagreement = [g for (_, _, g) in req.trajectory]
    improvement = (fitness[0] - fitness[-1]) / max(abs(fitness[0]), 1e-12)
    g_mean = float(np.mean(disagreement))
    g_low = float(np.percentile(disagreement, 25))
    g_high = float(np.percentile(disagreement, 75))

    d, c = req.current_d, req.current_c
    if improvement < params.stall_eps and g_mean <= g_low:
        c = c + params.c_step
    elif improvement < params.stall_eps and g_mean >= g_high:
        d = d + params.d_step
    else:
        d = d + params.decay * (D_DEFAULT - d)
        c = c + params.decay * (C_DEFAULT - c)
    return ActGuidance(d=d, c=c)


def heuristic_advise_coop(req: CoopRequest, params: HeuristicParams = HeuristicParams()) -> CoopGuidance:
    """Rank-based neighbor weighting.

    Neighbors are scored by fitness rank (double weight) plus disagreement
    rank, lower being better; the best score maps toward the midpoint of the
    increase band (0.4) and the worst toward the midpoint of the decrease band
    (0.15). The band spread is scaled by how separated the statistics actually
    are: statistically indistinguishable neighbors come out near-equal instead
    of being forced to opposite bands, which would otherwise keep injecting
    noise-driven asymmetry into the mixing matrix late in a run.
    """
    fit = [s[0] for s in req.neighbor_stats]
    dis = [s[1] for s in req.neighbor_stats]
    n = len(fit)
    if n == 1:
        return CoopGuidance(raw_weights=(0.4, params.self_weight))
    sep_f = _relative_separation(fit)
    sep_g = _relative_separation(dis)
    f_level = [r / (n - 1) * sep_f for r in _avg_ranks(fit)]
    g_level = [r / (n - 1) * sep_g for r in _avg_ranks(dis)]
    weights = []
    for f, g in zip(f_level, g_level):
        # Conjunctive rules, fitness counted twice: a neighbor is boosted only
        # when both statistics look good, demoted only when both look bad,
        # and held near the neutral level 0.25 otherwise.
        increase = (1.0 - f) ** 2 * (1.0 - g)
        decrease = f * f * g
        weights.append(0.25 + 0.15 * increase - 0.10 * decrease)
    return CoopGuidance(raw_weights=(*weights, params.self_weight))


def _relative_separation(values: list[float]) -> float:
    lo, hi = min(values), max(values)
    scale = max(abs(lo), abs(hi))
    if scale <= 0.0:
        return 0.0
    return min(1.0, (hi - lo) / scale)


def _avg_ranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


# -- prompt building and response parsing -------------------------------------


def build_act_prompt(req: ActRequest) -> str:
    lines = [
        f"Iteration {k}: fitness={_fmt(f)}, disagreement={_fmt(g)} |"
        for (k, f, g) in req.trajectory
    ]
    return (
        ACT_PROMPT_HEADER.format(
            iteration=req.iteration, d=_fmt(req.current_d), c=_fmt(req.current_c)
        )
        + "\n".join(lines)
        + ACT_PROMPT_FOOTER
    )


def build_coop_prompt(req: CoopRequest) -> str:
    lines = [
        f"Neighbor ID {k}: avg fitness={_fmt(f)}, avg disagreement={_fmt(g)} |"
        for k, (f, g) in zip(req.neighbor_ids, req.neighbor_stats)
    ]
    return (
        COOP_PROMPT_HEADER.format(n=len(req.neighbor_ids))
        + "\n".join(lines)
        + COOP_PROMPT_FOOTER
    )


_NUMBER = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_PAIR_RE = re.compile(r"\(\s*(" + _NUMBER + r")\s*,\s*(" + _NUMBER + r")\s*\)")
_LIST_RE = re.compile(r"\[([^\[\]]*)\]")


def parse_act_response(text: str) -> ActGuidance:
    """Extract the last parenthesized (d, c) pair; clamp into range."""
    matches = _PAIR_RE.findall(text or "")
    if not matches:
        raise GuidanceParseError("no parenthesized pair found")
    d_raw, c_raw = matches[-1]
    d, c = float(d_raw), float(c_raw)
    if not (math.isfinite(d) and math.isfinite(c)):
        raise GuidanceParseError("non-finite pair")
    return ActGuidance(d=d, c=c)


def parse_coop_response(text: str, expected_len: int) -> tuple[float, ...]:
    """Extract the last bracketed numeric list of exactly expected_len entries."""
    matches = _LIST_RE.findall(text or "")
    if not matches:
        raise GuidanceParseError("no bracketed list found")
    parts = [p.strip() for p in matches[-1].split(",")]
    try:
        values = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise GuidanceParseError(f"non-numeric entry: {exc}") from None
    if len(values) != expected_len:
        raise GuidanceParseError(f"expected {expected_len} weights, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise GuidanceParseError("non-finite weight")
    return values


# -- remote endpoint ----------------------------------------------------------


@dataclass(frozen=True)
class LlmEndpoint:
    base_url: str
    model: str
    timeout: float = 30.0

    @classmethod
    def from_env(cls, timeout: float = 30.0) -> "LlmEndpoint":
        url = os.environ.get(ENV_LLM_URL)
        model = os.environ.get(ENV_LLM_MODEL)
        if not url or not model:
            raise ContractError(
                f"LLM provider needs {ENV_LLM_URL} and {ENV_LLM_MODEL} set (or explicit config)"
            )
        return cls(base_url=url, model=model, timeout=timeout)


def llm_advise(prompt: str, endpoint: LlmEndpoint) -> str:
    """Single non-streaming completion request; returns the generated text."""
    url = endpoint.base_url.rstrip("/") + "/api/generate"
    payload = {"model": endpoint.model, "prompt": prompt, "stream": False}
    try:
        resp = requests.post(url, json=payload, timeout=endpoint.timeout)
        resp.raise_for_status()
        data = resp.json()
    except requests.RequestException as exc:
        raise LlmTransportError(f"guidance endpoint failed: {exc}") from exc
    except ValueError as exc:
        raise LlmTransportError(f"non-JSON response: {exc}") from exc
    if not isinstance(data, dict) or "response" not in data:
        raise LlmTransportError("response payload missing 'response' field")
    return str(data["response"])


# -- providers ----------------------------------------------------------------


class HeuristicProvider:
    """Pure rule-based provider; the deterministic reference path."""

    name = "heuristic"

    def __init__(self, params: HeuristicParams = HeuristicParams()):
        self.params = params

    def advise_act(self, req: ActRequest) -> ActGuidance:
        return heuristic_advise_act(req, self.params)

    def advise_coop(self, req: CoopRequest) -> CoopGuidance:
        return heuristic_advise_coop(req, self.params)


@dataclass
class LlmProvider:
    """Remote provider with per-refresh heuristic fallback.

    One attempt per refresh; any transport or parse failure silently degrades
    to the heuristic answer for that refresh and is counted.
    """

    endpoint: LlmEndpoint
    params: HeuristicParams = field(default_factory=HeuristicParams)
    coop_response_includes_self: bool = False
    name: str = "llm"
    fallback_count: int = 0

    def advise_act(self, req: ActRequest) -> ActGuidance:
        try:
            return parse_act_response(llm_advise(build_act_prompt(req), self.endpoint))
        except (LlmTransportError, GuidanceParseError):
            self.fallback_count += 1
            return heuristic_advise_act(req, self.params)

    def advise_coop(self, req: CoopRequest) -> CoopGuidance:
        n = len(req.neighbor_ids)
        expected = n + 1 if self.coop_response_includes_self else n
        try:
            values = parse_coop_response(llm_advise(build_coop_prompt(req), self.endpoint), expected)
        except (LlmTransportError, GuidanceParseError):
            self.fallback_count += 1
            return heuristic_advise_coop(req, self.params)
        if self.coop_response_includes_self:
            return CoopGuidance(raw_weights=values)
        return CoopGuidance(raw_weights=(*values, self.params.self_weight))
