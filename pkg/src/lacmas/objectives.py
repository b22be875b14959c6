"""Distributed black-box benchmark suite.

Each agent i owns a local objective f_i(x) = g(x - o_i), where g is one of ten
base families and o_i is the agent's shift vector. The global objective is the
average of the locals; it exists for offline evaluation only and is never
handed to an agent during optimization.

Base families are normalized so that g(0) = 0 and g(z) >= 0 everywhere; all
"shifted" structure lives in the per-spec / per-agent shift vectors, which
keeps the analytic-optimum oracle for the sphere exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

FAMILIES = (
    "sphere",
    "elliptic",
    "schwefel_1_2",
    "rosenbrock",
    "rastrigin",
    "ackley",
    "griewank",
    "rotated_rastrigin",
    "rotated_elliptic",
    "shifted_rosenbrock",
)

_ROTATED = {"rotated_rastrigin", "rotated_elliptic"}
# Families whose suite entry carries a nonzero base shift o*; the others keep
# their optimum pinned to the origin (before per-agent heterogeneity).
_BASE_SHIFTED = {"shifted_rosenbrock", "rotated_rastrigin", "rotated_elliptic"}

DEFAULT_BOUND = 100.0
DEFAULT_HETERO_SIGMA = 5.0
_BASE_SHIFT_HALF_WIDTH = 20.0


@dataclass(frozen=True)
class BenchmarkSpec:
    """One distributed benchmark instance.

    shifts is an (N, D) array; in homogeneous mode every row equals the base
    shift o*, in heterogeneous mode row i is o* + eta_i with eta_i componentwise
    uniform in [-hetero_sigma, +hetero_sigma].
    """

    family: str
    dim: int
    num_agents: int
    shifts: np.ndarray
    heterogeneity: str
    bound: float = DEFAULT_BOUND
    rotation: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ContractError(f"unknown family {self.family!r}")
        if self.shifts.shape != (self.num_agents, self.dim):
            raise ContractError(
                f"shifts shape {self.shifts.shape} != ({self.num_agents}, {self.dim})"
            )
        if self.heterogeneity not in ("homogeneous", "heterogeneous"):
            raise ContractError(f"bad heterogeneity mode {self.heterogeneity!r}")
        if np.abs(self.shifts).max(initial=0.0) > self.bound:
            raise ContractError("shift outside box bounds")
        if self.heterogeneity == "homogeneous" and self.num_agents > 1:
            if not np.all(self.shifts == self.shifts[0]):
                raise ContractError("homogeneous mode requires identical shifts")

    @property
    def lower(self) -> np.ndarray:
        return np.full(self.dim, -self.bound)

    @property
    def upper(self) -> np.ndarray:
        return np.full(self.dim, self.bound)

    def eval_local(self, agent: int, x: np.ndarray) -> float:
        """f_i(x) for one point; pure and deterministic."""
        return float(self.eval_local_batch(agent, np.asarray(x, dtype=float)[None, :])[0])

    def eval_local_batch(self, agent: int, xs: np.ndarray) -> np.ndarray:
        """f_i evaluated row-wise over an (M, D) batch."""
        if not 0 <= agent < self.num_agents:
            raise ContractError(f"agent index {agent} out of range")
        xs = np.asarray(xs, dtype=float)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise ContractError(f"expected (M, {self.dim}) batch, got {xs.shape}")
        if not math.isfinite(float(xs.sum())):
            raise ContractError("non-finite evaluation point")
        z = xs - self.shifts[agent]
        if self.rotation is not None:
            z = z @ self.rotation.T
        return _BASE_FUNCTIONS[_base_family(self.family)](z)

    def eval_global(self, x: np.ndarray) -> float:
        """Average of the local objectives; offline metric only."""
        return float(
            np.mean([self.eval_local_batch(i, np.asarray(x, dtype=float)[None, :])[0]
                     for i in range(self.num_agents)])
        )


def _base_family(family: str) -> str:
    if family == "rotated_rastrigin":
        return "rastrigin"
    if family == "rotated_elliptic":
        return "elliptic"
    if family == "shifted_rosenbrock":
        return "rosenbrock"
    return family


# Base functions g: (M, D) -> (M,), each with g(0) = 0 and g >= 0.

def _sphere(z):
    return np.sum(z * z, axis=1)


def _elliptic(z):
    d = z.shape[1]
    if d == 1:
        return z[:, 0] ** 2
    coef = 1e6 ** (np.arange(d) / (d - 1))
    return np.sum(coef * z * z, axis=1)


def _schwefel_1_2(z):
    partial = np.cumsum(z, axis=1)
    return np.sum(partial * partial, axis=1)


def _rosenbrock(z):
    # Optimum moved to the origin: substitute y = z + 1 in the classic valley.
    if z.shape[1] == 1:
        return z[:, 0] ** 2
    y = z + 1.0
    return np.sum(100.0 * (y[:, 1:] - y[:, :-1] ** 2) ** 2 + (y[:, :-1] - 1.0) ** 2, axis=1)


def _rastrigin(z):
    return np.sum(z * z - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=1)


def _ackley(z):
    d = z.shape[1]
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z * z, axis=1) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=1) / d)
    return a + b + 20.0 + np.e


def _griewank(z):
    d = z.shape[1]
    s = np.sum(z * z, axis=1) / 4000.0
    p = np.prod(np.cos(z / np.sqrt(np.arange(1, d + 1))), axis=1)
    return s - p + 1.0


_BASE_FUNCTIONS = {
    "sphere": _sphere,
    "elliptic": _elliptic,
    "schwefel_1_2": _schwefel_1_2,
    "rosenbrock": _rosenbrock,
    "rastrigin": _rastrigin,
    "ackley": _ackley,
    "griewank": _griewank,
}


def random_rotation(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonal matrix from the QR factorization of a Gaussian sample."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def make_spec(
    family: str,
    num_agents: int,
    dim: int,
    hetero_sigma: float,
    seed: int,
    bound: float = DEFAULT_BOUND,
) -> BenchmarkSpec:
    """Build one benchmark instance; deterministic for a fixed seed."""
    if family not in FAMILIES:
        raise ContractError(f"unknown family {family!r}")
    if num_agents < 1 or dim < 1:
        raise ContractError("num_agents and dim must be positive")
    if hetero_sigma < 0:
        raise ContractError("hetero_sigma must be nonnegative")

    rng = np.random.default_rng(np.random.SeedSequence([seed, FAMILIES.index(family)]))
    if family in _BASE_SHIFTED:
        base = rng.uniform(-_BASE_SHIFT_HALF_WIDTH, _BASE_SHIFT_HALF_WIDTH, size=dim)
    else:
        base = np.zeros(dim)
    if hetero_sigma > 0:
        eta = rng.uniform(-hetero_sigma, hetero_sigma, size=(num_agents, dim))
        shifts = base + eta
        mode = "heterogeneous"
    else:
        shifts = np.tile(base, (num_agents, 1))
        mode = "homogeneous"
    rotation = random_rotation(dim, rng) if family in _ROTATED else None
    return BenchmarkSpec(
        family=family,
        dim=dim,
        num_agents=num_agents,
        shifts=shifts,
        heterogeneity=mode,
        bound=bound,
        rotation=rotation,
    )


def make_suite(
    num_agents: int,
    dim: int,
    hetero_sigma: float = DEFAULT_HETERO_SIGMA,
    seed: int = 0,
    bound: float = DEFAULT_BOUND,
) -> list[BenchmarkSpec]:
    """The full ten-function suite in fixed family order."""
    return [
        make_spec(fam, num_agents, dim, hetero_sigma, seed, bound) for fam in FAMILIES
    ]
