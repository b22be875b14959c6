"""Per-agent adaptive particle population.

Each agent runs a small swarm whose velocity update is a stochastically
modulated multiplicative term scaled by a regime coefficient, plus attraction
toward the particle's personal best and toward the agent's local attractor
(the last fused consensus state):

    v <- w * (delta (.) v) + c_p * r1 (.) (pbest - x) + c_a * r2 (.) (attr - x)
    x <- clamp(x + v)

The active coefficient w is selected from (w1, w0, w2) by the current particle
divergence: a concentrated population gets the escape coefficient w2, a widely
spread one the damping coefficient w1, and the middle band the neutral w0.
delta is drawn element-wise uniform on [modulation_low, modulation_high], so
w < 1 contracts the modulated term in the mean-square sense and w near the top
of its range lets occasional large kicks through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ContractError, NumericalFault

# Batch evaluator for one agent's local objective: (M, D) -> (M,).
LocalObjective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SwarmParams:
    population: int = 10
    pull_pbest: float = 0.8
    pull_attractor: float = 0.8
    modulation_low: float = -0.5
    modulation_high: float = 1.5
    # Fraction of the full box span; 0.05 of [-B, B] is the [-B/10, B/10] start.
    init_velocity_frac: float = 0.05
    d1: float = 1.0
    d2: float = 10.0
    # How the fused consensus state re-enters the population.
    injection: str = "both"  # both | particle | attractor
    # Attractor gain r2 drawn per component or once per particle. The scalar
    # mode lets a particle take near-zero-drag steps with positive probability,
    # which keeps personal-best refinement unbiased in high dimension.
    attractor_gain: str = "scalar"  # scalar | elementwise
    # Past the scheduling horizon the attractor follows the agent's own best
    # instead of the fused state: the consensus coupling noise stops limiting
    # local refinement, which is what lets personal bests close in on their
    # local optima. Fused states keep entering through the particle channel.
    late_stage_refocus: bool = True
    # Collapse recovery: a particle whose velocity has died gets a fresh kick.
    # The multiplicative modulation cannot re-expand a population from zero
    # velocity on its own, so this is what keeps refinement going instead of
    # freezing at the scale where the swarm first collapsed. The kick scale
    # adapts to the personal-best success rate (expand while improvements are
    # frequent, contract when they dry up), which makes it track the distance
    # to the local optimum without knowing it.
    kick_velocity_eps: float = 1e-3
    kick_adapt_rate: float = 0.3
    kick_target_rate: float = 0.2

    def __post_init__(self):
        if self.population < 1:
            raise ContractError("population must be >= 1")
        if not self.d1 < self.d2:
            raise ContractError(f"need d1 < d2, got ({self.d1}, {self.d2})")
        if self.injection not in ("both", "particle", "attractor"):
            raise ContractError(f"bad injection mode {self.injection!r}")
        if self.attractor_gain not in ("scalar", "elementwise"):
            raise ContractError(f"bad attractor_gain mode {self.attractor_gain!r}")


@dataclass(frozen=True)
class Particle:
    """Read-only view of one particle's state."""

    position: np.ndarray
    velocity: np.ndarray
    best_position: np.ndarray
    best_value: float


@dataclass
class StepStats:
    best_value: float
    mean_step: float


class AgentSwarm:
    """State and dynamics of one agent's particle population."""

    def __init__(
        self,
        agent_id: int,
        dim: int,
        lower: np.ndarray,
        upper: np.ndarray,
        params: SwarmParams,
        rng: np.random.Generator,
        coefficients: tuple[float, float, float] = (0.7, 1.0, 1.3),
    ):
        self.agent_id = agent_id
        self.dim = dim
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.params = params
        self.rng = rng
        # (w1, w0, w2): damping, neutral, escape.
        self.w1, self.w0, self.w2 = coefficients

        p = params.population
        span = self.upper - self.lower
        self.positions = rng.uniform(self.lower, self.upper, size=(p, dim))
        vmax = params.init_velocity_frac * span
        self.velocities = rng.uniform(-vmax, vmax, size=(p, dim))
        self.best_positions = self.positions.copy()
        self.best_values = np.full(p, np.inf)
        self.last_values = np.full(p, np.inf)
        self.local_attractor = np.zeros(dim)
        self.kick_sigma = float(params.init_velocity_frac * span.mean())
        self._kicking = False
        self._evaluated = False
        # All-time agent best, kept apart from the working records so that
        # reported fitness stays monotone even when records are re-based.
        self.best_seen_value = float("inf")
        self.best_seen_position = self.positions[0].copy()

    # -- setup -------------------------------------------------------------

    def evaluate_initial(self, objective: LocalObjective) -> None:
        """Score the freshly initialized population and seed the attractor."""
        self.best_values = np.asarray(objective(self.positions), dtype=float)
        self.best_positions = self.positions.copy()
        self.last_values = self.best_values.copy()
        self._evaluated = True
        self._track_best_seen()
        self.local_attractor = self.representative_state()

    def _track_best_seen(self) -> None:
        idx = int(np.argmin(self.best_values))
        if self.best_values[idx] < self.best_seen_value:
            self.best_seen_value = float(self.best_values[idx])
            self.best_seen_position = self.best_positions[idx].copy()

    def set_coefficients(self, w1: float, w0: float, w2: float) -> None:
        self.w1, self.w0, self.w2 = w1, w0, w2

    # -- observations --------------------------------------------------------

    def particle(self, p: int) -> Particle:
        return Particle(
            position=self.positions[p].copy(),
            velocity=self.velocities[p].copy(),
            best_position=self.best_positions[p].copy(),
            best_value=float(self.best_values[p]),
        )

    def centroid(self) -> np.ndarray:
        if len(self.positions) == 0:
            raise ContractError("empty population")
        return self.positions.mean(axis=0)

    def divergence(self) -> float:
        """Mean squared distance of the particles from their centroid."""
        d = self.positions - self.centroid()
        return float((d * d).sum() / len(d))

    def select_coefficient(self, div: float) -> float:
        """Regime gate: escape below d1, neutral on [d1, d2], damping above d2."""
        if div < self.params.d1:
            return self.w2
        if div <= self.params.d2:
            return self.w0
        return self.w1

    def best_value(self) -> float:
        """All-time best objective value seen by this agent (monotone)."""
        return min(self.best_seen_value, float(self.best_values.min()))

    def best_record_state(self) -> np.ndarray:
        """Position of the best current record (the elitist anchor)."""
        return self.best_positions[int(np.argmin(self.best_values))].copy()

    def rebase_records(self) -> None:
        """Replace every particle's record with its latest evaluation.

        Used once at the refocus transition: records accumulated while the
        population tracked the fused state can sit far from where the search
        has moved, and pulling toward them again would undo the tracking.
        """
        self._track_best_seen()
        self.best_positions = self.positions.copy()
        self.best_values = self.last_values.copy()

    def representative_state(self) -> np.ndarray:
        """Position of the particle that evaluated best in the latest sweep
        (ties to the lowest index).

        Publishing the freshest best point rather than the all-time record
        keeps the published state anchored to where the agent is searching
        now. On objectives with degenerate minimum sets an all-time record
        pins to the first point found and consensus could never re-anchor it;
        the per-sweep best follows the attractor instead.
        """
        if not self._evaluated:
            raise ContractError("representative_state before any evaluation")
        return self.positions[int(np.argmin(self.last_values))].copy()

    # -- dynamics ------------------------------------------------------------

    def step_particles(
        self, active_coeff: float, objective: LocalObjective, record_pull: bool = True
    ) -> StepStats:
        """One velocity/position update of the whole population.

        Clamped components get their velocity zeroed so the multiplicative
        modulation cannot wind up against a wall. Personal bests and the agent
        best update greedily. With record_pull=False the personal-best term is
        suppressed (the consensus-tracking phase), leaving the attractor as the
        only directed pull; the same random draws are consumed either way so
        the stream stays aligned.
        """
        shape = self.positions.shape
        p = self.params
        delta = self.rng.uniform(p.modulation_low, p.modulation_high, shape)
        r1 = self.rng.uniform(0.0, 1.0, shape)
        if p.attractor_gain == "scalar":
            r2 = self.rng.uniform(0.0, 1.0, (shape[0], 1))
        else:
            r2 = self.rng.uniform(0.0, 1.0, shape)

        v = self.velocities
        v *= delta
        v *= active_coeff
        if record_pull:
            v += (p.pull_pbest * r1) * (self.best_positions - self.positions)
        v += (p.pull_attractor * r2) * (self.local_attractor - self.positions)

        if p.kick_velocity_eps > 0 and self.kick_sigma > 0:
            dead = (v * v).sum(axis=1) < (p.kick_velocity_eps * self.kick_sigma) ** 2
            if dead.any():
                if not self._kicking:
                    # Seed the recovery scale from where the collapse happened.
                    abest = self.best_positions[int(np.argmin(self.best_values))]
                    spread = float(np.median(np.linalg.norm(self.positions - abest, axis=1)))
                    floor = 1e-12 * float((self.upper - self.lower).mean())
                    self.kick_sigma = max(min(self.kick_sigma, spread), floor)
                    self._kicking = True
                # The active regime coefficient scales the kick: the escape
                # coefficient widens recovery jumps, the damping one narrows
                # them, so coefficient guidance steers escape strength.
                kick = self.rng.uniform(-1.0, 1.0, shape) * (self.kick_sigma * active_coeff)
                v[dead] += kick[dead]

        old = self.positions
        raw = old + v
        new = np.minimum(np.maximum(raw, self.lower), self.upper)
        v[raw != new] = 0.0

        total = float(new.sum()) + float(v.sum())
        if not math.isfinite(total):
            raise NumericalFault(f"non-finite particle state for agent {self.agent_id}")

        values = np.asarray(objective(new), dtype=float)
        self.last_values = values
        improved = values < self.best_values
        self.best_positions[improved] = new[improved]
        self.best_values[improved] = values[improved]

        if self._kicking:
            # Success-rate step-size control, active once collapse recovery has
            # started; holds at the initialization scale before that.
            rate = float(improved.mean())
            self.kick_sigma *= math.exp(p.kick_adapt_rate * (rate - p.kick_target_rate))
            self.kick_sigma = min(self.kick_sigma, float((self.upper - self.lower).mean()))

        d = new - old
        mean_step = float(np.sqrt((d * d).sum(axis=1)).mean())
        self.positions = new
        self.velocities = v
        self._evaluated = True
        return StepStats(best_value=self.best_value(), mean_step=mean_step)

    def inject_fused_state(
        self, fused: np.ndarray, objective: LocalObjective, refocus: bool = False
    ) -> None:
        """Fold the fused consensus state back into the population.

        The attractor moves to the fused point and the worst particle is
        teleported there with zero velocity; its personal best is reset to the
        fused evaluation so stale records cannot shadow the consensus state.
        With refocus=True (late stage) the attractor follows the agent's own
        best instead, while the particle channel stays open.
        """
        fused = np.asarray(fused, dtype=float)
        if fused.shape != (self.dim,):
            raise ContractError(f"fused state has shape {fused.shape}, expected ({self.dim},)")
        self._track_best_seen()
        if self.params.injection in ("both", "particle"):
            worst = int(np.argmax(self.best_values))
            self.positions[worst] = fused
            self.velocities[worst] = 0.0
            value = float(objective(fused[None, :])[0])
            self.best_positions[worst] = fused.copy()
            self.best_values[worst] = value
            self.last_values[worst] = value
        if self.params.injection in ("both", "attractor"):
            if refocus:
                self.local_attractor = self.best_record_state()
            else:
                self.local_attractor = fused.copy()
