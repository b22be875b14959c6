"""Phased guidance scheduling.

Two binary gates decide when guidance refreshes happen, both anchored to a
characteristic horizon T estimated by a short pre-run probe:

  - the cooperation gate fires on the recurring grid {ceil(m * rho_ext * T)},
    m >= 1, and keeps firing past T;
  - the internal-action gate fires at exactly two points, ceil(rho1 * T) and
    ceil(rho2 * T), and is deactivated from T onwards.

The stage index is a reporting-only summary of how refresh emphasis shifts
over the run; the gates are the sole behavioral triggers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

# Snap tolerance for ceilings of ratio*T products, so grids specified with
# decimal ratios (0.1 * 100, ...) land on the intended integers.
_CEIL_EPS = 1e-9


def _ceil(value: float) -> int:
    return math.ceil(value - _CEIL_EPS * max(1.0, abs(value)))


@dataclass(frozen=True)
class PcgConfig:
    horizon_T: int = 500
    rho_ext: float = 0.1
    rho_1: float = 0.2
    rho_2: float = 0.6
    alphas: tuple[float, float, float] = (0.2, 0.5, 0.9)

    def __post_init__(self):
        if self.horizon_T < 1:
            raise ConfigError("horizon_T must be a positive integer")
        if self.rho_ext <= 0:
            raise ConfigError("rho_ext must be positive")
        if not 0 < self.rho_1 < self.rho_2 < 1:
            raise ConfigError("need 0 < rho_1 < rho_2 < 1")
        a1, a2, a3 = self.alphas
        if not 0 < a1 < a2 < a3 <= 1:
            raise ConfigError("need 0 < alpha_1 < alpha_2 < alpha_3 <= 1")

    @property
    def int_refresh_points(self) -> tuple[int, int]:
        return (_ceil(self.rho_1 * self.horizon_T), _ceil(self.rho_2 * self.horizon_T))

    @property
    def stage_breakpoints(self) -> tuple[int, int, int]:
        return tuple(_ceil(a * self.horizon_T) for a in self.alphas)


def gate_ext(t: int, cfg: PcgConfig) -> bool:
    """True iff t lies on the cooperation-refresh grid {ceil(m*rho_ext*T)}, m >= 1."""
    if t < 1:
        return False
    interval = cfg.rho_ext * cfg.horizon_T
    # Distinct m can collide on one t after the ceiling; membership is what counts.
    m_near = int(t // interval) if interval > 0 else 1
    for m in range(max(1, m_near - 1), m_near + 3):
        if _ceil(m * interval) == t:
            return True
    return False


def gate_int(t: int, cfg: PcgConfig) -> bool:
    """True at the two internal refresh points, and never at or after T."""
    if t >= cfg.horizon_T:
        return False
    return t in cfg.int_refresh_points


def stage(t: int, cfg: PcgConfig) -> int:
    """Stage index in {1, 2, 3, 4}; diagnostics only."""
    if t < 0:
        raise ConfigError("t must be nonnegative")
    t1, t2, t3 = cfg.stage_breakpoints
    if t < t1:
        return 1
    if t < t2:
        return 2
    if t < t3:
        return 3
    return 4


def calibrate_horizon(
    probe_trace: list[float],
    threshold: float = 1e-7,
    default_T: int = 500,
) -> int:
    """Estimate the optimization horizon from a probe run's disagreement trace.

    Fits log(disagreement) linearly over the second half of the probe and
    extrapolates the iteration at which it crosses `threshold`. A flat or
    growing trace, or a probe too short to fit, falls back to default_T. The
    result is clamped to [len(probe_trace), 10 * default_T]: a coarse estimate
    is all the gating needs.
    """
    n = len(probe_trace)
    if n < 10:
        return default_T
    half = [(t, d) for t, d in enumerate(probe_trace) if t >= n // 2 and d > 0 and math.isfinite(d)]
    if len(half) < 2:
        return default_T
    ts = [t for t, _ in half]
    logs = [math.log(d) for _, d in half]
    t_mean = sum(ts) / len(ts)
    l_mean = sum(logs) / len(logs)
    sxx = sum((t - t_mean) ** 2 for t in ts)
    if sxx == 0:
        return default_T
    slope = sum((t - t_mean) * (l - l_mean) for t, l in zip(ts, logs)) / sxx
    if slope >= 0:
        return default_T
    intercept = l_mean - slope * t_mean
    crossing = (math.log(threshold) - intercept) / slope
    return int(min(max(_ceil(crossing), n), 10 * default_T))
