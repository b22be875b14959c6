"""Runtime verification of the consensus-preservation conditions.

These checks are diagnostics over snapshots: the mixing matrix must stay
nonnegative, row-stochastic, and zero off the graph pattern, and the residual
between consecutive stacked states and their mixed predecessors (the effective
perturbation) must decay on a converging run.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ContractError
from .topology import CommGraph

ROW_SUM_CHECK_TOL = 1e-9


@lru_cache(maxsize=8)
def _allowed_mask(graph: CommGraph) -> np.ndarray:
    n = graph.num_agents
    allowed = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for k in graph.closed_neighborhood(i):
            allowed[i, k] = True
    allowed.setflags(write=False)
    return allowed


@dataclass(frozen=True)
class AdmissibilityReport:
    row_stochastic: bool
    max_row_deviation: float
    nonnegative: bool
    min_entry: float
    graph_compatible: bool
    first_violation: tuple[int, int] | None

    @property
    def passed(self) -> bool:
        return self.row_stochastic and self.nonnegative and self.graph_compatible


def check_admissibility(matrix: np.ndarray, graph: CommGraph) -> AdmissibilityReport:
    """Verify nonnegativity, row sums, and graph compatibility of a mixing matrix."""
    a = np.asarray(matrix, dtype=float)
    n = graph.num_agents
    if a.shape != (n, n):
        raise ContractError(f"matrix shape {a.shape} does not match {n} agents")

    row_dev = float(np.abs(a.sum(axis=1) - 1.0).max())
    min_entry = float(a.min())

    first_violation = None
    offenders = np.argwhere((~_allowed_mask(graph)) & (a != 0.0))
    if len(offenders):
        first_violation = (int(offenders[0][0]), int(offenders[0][1]))

    return AdmissibilityReport(
        row_stochastic=row_dev <= ROW_SUM_CHECK_TOL,
        max_row_deviation=row_dev,
        nonnegative=min_entry >= 0.0,
        min_entry=min_entry,
        graph_compatible=first_violation is None,
        first_violation=first_violation,
    )


def measured_perturbation(
    x_next: np.ndarray, matrix: np.ndarray, x: np.ndarray
) -> tuple[np.ndarray, float]:
    """Residual xi = x_next - A x over stacked (N, D) states, with its Frobenius norm."""
    x_next = np.asarray(x_next, dtype=float)
    x = np.asarray(x, dtype=float)
    a = np.asarray(matrix, dtype=float)
    if x_next.shape != x.shape or a.shape != (x.shape[0], x.shape[0]):
        raise ContractError("inconsistent shapes for perturbation measurement")
    xi = x_next - a @ x
    return xi, float(np.linalg.norm(xi))


def contraction_check(disagreement_trace: list[float], window: int) -> bool:
    """True iff the mean over the last `window` entries strictly undercuts the
    mean over the window before it."""
    if window < 1 or len(disagreement_trace) < 2 * window:
        raise ContractError("trace must cover at least two windows")
    recent = float(np.mean(disagreement_trace[-window:]))
    previous = float(np.mean(disagreement_trace[-2 * window : -window]))
    return recent < previous
