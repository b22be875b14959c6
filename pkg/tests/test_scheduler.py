import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacmas.errors import ConfigError
from lacmas.scheduler import PcgConfig, calibrate_horizon, gate_ext, gate_int, stage

REF = PcgConfig(horizon_T=100, rho_ext=0.1, rho_1=0.2, rho_2=0.6, alphas=(0.2, 0.5, 0.9))


def exact_ext_set(cfg: PcgConfig, t_max: int) -> set[int]:
    """Enumeration oracle in exact rational arithmetic."""
    interval = Fraction(cfg.rho_ext).limit_denominator(10**6) * cfg.horizon_T
    out = set()
    m = 1
    while True:
        val = math.ceil(interval * m)
        if val > t_max:
            break
        out.add(val)
        m += 1
    return out


def test_gate_ext_matches_exact_enumeration():
    expected = exact_ext_set(REF, 400)
    assert expected == {10 * k for k in range(1, 41)}
    fired = {t for t in range(401) if gate_ext(t, REF)}
    assert fired == expected


def test_gate_ext_never_fires_at_zero():
    for cfg in (REF, PcgConfig(horizon_T=7, rho_ext=0.03)):
        assert not gate_ext(0, cfg)


def test_gate_ext_continues_past_horizon():
    assert gate_ext(200, REF)
    assert not gate_ext(15, REF)


def test_gate_int_fires_exactly_twice():
    fired = [t for t in range(300) if gate_int(t, REF)]
    assert fired == [20, 60]


def test_gate_int_deactivated_from_horizon_on():
    cfg = PcgConfig(horizon_T=100, rho_ext=0.1, rho_1=0.2, rho_2=0.99)
    # ceil(0.99 * 100) = 99 fires, but anything at or past T never does.
    assert gate_int(99, cfg)
    for t in range(100, 1000):
        assert not gate_int(t, cfg)


def test_stage_reference_breakpoints():
    assert stage(10, REF) == 1
    assert stage(30, REF) == 2
    assert stage(70, REF) == 3
    assert stage(95, REF) == 4
    assert REF.stage_breakpoints == (20, 50, 90)


def test_stage_zero_is_one():
    assert stage(0, REF) == 1


def test_stage_is_nondecreasing():
    values = [stage(t, REF) for t in range(500)]
    assert values == sorted(values)
    assert set(values) == {1, 2, 3, 4}


def test_config_ordering_validated():
    with pytest.raises(ConfigError):
        PcgConfig(rho_1=0.6, rho_2=0.2)
    with pytest.raises(ConfigError):
        PcgConfig(alphas=(0.5, 0.2, 0.9))
    with pytest.raises(ConfigError):
        PcgConfig(rho_ext=0.0)
    with pytest.raises(ConfigError):
        PcgConfig(horizon_T=0)


def test_calibrate_log_linear_trace():
    # disagreement(t) = 10^(-t/10) crosses 1e-7 at exactly t = 70.
    trace = [10.0 ** (-t / 10.0) for t in range(40)]
    assert calibrate_horizon(trace, threshold=1e-7, default_T=500) == 70


def test_calibrate_flat_trace_returns_default():
    assert calibrate_horizon([1.0] * 50, threshold=1e-7, default_T=321) == 321


def test_calibrate_growing_trace_returns_default():
    trace = [1.0 + 0.1 * t for t in range(50)]
    assert calibrate_horizon(trace, threshold=1e-7, default_T=200) == 200


def test_calibrate_clamps_to_probe_length():
    # Already below threshold before the probe ends: crossing < len(trace).
    trace = [10.0 ** (-t) for t in range(30)]
    assert calibrate_horizon(trace, threshold=1e-7, default_T=500) == 30


def test_calibrate_short_trace_returns_default():
    assert calibrate_horizon([1.0, 0.5], threshold=1e-7, default_T=77) == 77


def test_calibrate_upper_clamp():
    trace = [10.0 ** (-t / 1e5) for t in range(60)]
    assert calibrate_horizon(trace, threshold=1e-7, default_T=10) == 100


@settings(max_examples=60, deadline=None)
@given(
    horizon=st.integers(2, 400),
    rho_ext=st.floats(0.01, 1.5),
    rho_pair=st.tuples(st.floats(0.01, 0.98), st.floats(0.01, 0.98)).filter(
        lambda p: p[0] < p[1]
    ),
)
def test_gate_int_properties(horizon, rho_ext, rho_pair):
    cfg = PcgConfig(horizon_T=horizon, rho_ext=rho_ext, rho_1=rho_pair[0], rho_2=rho_pair[1])
    fired = [t for t in range(3 * horizon) if gate_int(t, cfg)]
    assert len(fired) <= 2
    assert all(t < horizon for t in fired)


@settings(max_examples=60, deadline=None)
@given(horizon=st.integers(2, 300), t=st.integers(0, 1000))
def test_stage_partitions_time(horizon, t):
    cfg = PcgConfig(horizon_T=horizon)
    assert stage(t, cfg) in (1, 2, 3, 4)
