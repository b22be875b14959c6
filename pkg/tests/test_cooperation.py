import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacmas.analysis import check_admissibility
from lacmas.cooperation import (
    CooperationWeights,
    assemble_mixing_matrix,
    build_descriptor,
    fuse_states,
    project_weights,
    uniform_weights,
)
from lacmas.engine import AgentHistory, HistoryRecord
from lacmas.errors import ContractError
from lacmas.topology import build_ring


def history_from(rows):
    h = AgentHistory(capacity=32)
    for t, (fit, div, delta) in enumerate(rows):
        h.append(
            HistoryRecord(
                iteration=t,
                best_fitness=fit,
                divergence=div,
                state_delta=delta,
                local_disagreement=0.0,
            )
        )
    return h


def test_descriptor_of_constant_history():
    h = history_from([(5.0, 2.0, 0.1)] * 6)
    d = build_descriptor(h, window=4)
    assert (d.avg_fitness, d.avg_divergence, d.avg_state_delta) == (5.0, 2.0, 0.1)


def test_descriptor_window_larger_than_history():
    h = history_from([(1.0, 0.0, 0.0), (3.0, 0.0, 0.0)])
    d = build_descriptor(h, window=10)
    assert d.avg_fitness == pytest.approx(2.0)


def test_descriptor_two_entry_mean():
    h = history_from([(4.0, 1.0, 0.2), (6.0, 3.0, 0.4)])
    d = build_descriptor(h, window=2)
    assert d.avg_fitness == pytest.approx(5.0)
    assert d.avg_divergence == pytest.approx(2.0)
    assert d.avg_state_delta == pytest.approx(0.3)


def test_descriptor_requires_history():
    with pytest.raises(ContractError):
        build_descriptor(AgentHistory(capacity=32), window=5)


def test_project_clamps_and_normalizes():
    g = build_ring(3)
    # Neighborhood of 0 is {0, 1, 2}; clamp -0.2 to 0, divide by 0.8.
    w = project_weights({0: 0.5, 1: -0.2, 2: 0.3}, g, owner=0)
    assert w.weight(0) == pytest.approx(0.625)
    assert w.weight(1) == 0.0
    assert w.weight(2) == pytest.approx(0.375)


def test_project_all_zeros_falls_back_to_uniform():
    g = build_ring(3)
    w = project_weights({0: 0.0, 1: 0.0, 2: 0.0}, g, owner=0)
    assert all(w.weight(k) == pytest.approx(1 / 3) for k in (0, 1, 2))


def test_project_keeps_valid_distribution_unchanged():
    g = build_ring(3)
    w = project_weights({0: 0.5, 1: 0.25, 2: 0.25}, g, owner=0)
    assert (w.weight(0), w.weight(1), w.weight(2)) == (0.5, 0.25, 0.25)


def test_project_drops_foreign_keys_and_handles_nonfinite():
    g = build_ring(4)
    w = project_weights({0: 1.0, 1: float("nan"), 3: float("inf"), 2: 5.0}, g, owner=0)
    # 2 is not a neighbor of 0 in ring(4); nan and inf clamp to zero.
    assert w.weight(2) == 0.0
    assert w.weight(1) == 0.0
    assert w.weight(3) == 0.0
    assert w.weight(0) == 1.0


def test_fuse_uniform_average():
    g = build_ring(3)
    w = uniform_weights(g, 0)
    states = {0: np.array([0.0]), 1: np.array([3.0]), 2: np.array([6.0])}
    assert fuse_states(w, states) == pytest.approx(3.0)


def test_fuse_identity_row():
    w = CooperationWeights(owner=0, entries={0: 1.0, 1: 0.0})
    states = {0: np.array([2.0, -1.0]), 1: np.array([9.0, 9.0])}
    assert np.allclose(fuse_states(w, states), [2.0, -1.0])


def test_fuse_weighted_pair():
    w = CooperationWeights(owner=0, entries={0: 0.25, 1: 0.75})
    states = {0: np.array([0.0]), 1: np.array([4.0])}
    assert fuse_states(w, states) == pytest.approx(3.0)


def test_fuse_missing_state_rejected():
    w = CooperationWeights(owner=0, entries={0: 0.5, 1: 0.5})
    with pytest.raises(ContractError):
        fuse_states(w, {0: np.zeros(2)})


def test_assemble_uniform_ring3_is_circulant():
    g = build_ring(3)
    rows = [uniform_weights(g, i) for i in range(3)]
    m = assemble_mixing_matrix(rows, g)
    assert np.allclose(m, np.full((3, 3), 1 / 3))


def test_assemble_identity_rows():
    g = build_ring(4)
    rows = [CooperationWeights(owner=i, entries={i: 1.0}) for i in range(4)]
    m = assemble_mixing_matrix(rows, g)
    assert np.array_equal(m, np.eye(4))


def test_assembled_matrix_is_admissible():
    g = build_ring(5)
    rng = np.random.default_rng(0)
    rows = []
    for i in range(5):
        members = g.closed_neighborhood(i)
        raw = {k: float(rng.uniform(-1, 2)) for k in members}
        rows.append(project_weights(raw, g, i))
    report = check_admissibility(assemble_mixing_matrix(rows, g), g)
    assert report.passed


def test_assemble_owner_mismatch_rejected():
    g = build_ring(3)
    rows = [uniform_weights(g, 0)] * 3
    with pytest.raises(ContractError):
        assemble_mixing_matrix(rows, g)


def test_weights_invariants_enforced():
    with pytest.raises(ContractError):
        CooperationWeights(owner=0, entries={0: 0.7, 1: 0.7})
    with pytest.raises(ContractError):
        CooperationWeights(owner=0, entries={0: 1.5, 1: -0.5})


raw_entry = st.floats(min_value=-10, max_value=10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(raw=st.lists(raw_entry, min_size=3, max_size=3))
def test_projection_is_idempotent(raw):
    g = build_ring(3)
    mapping = dict(zip((0, 1, 2), raw))
    once = project_weights(mapping, g, owner=0)
    twice = project_weights(dict(once.entries), g, owner=0)
    assert once.entries == twice.entries


@settings(max_examples=60, deadline=None)
@given(
    raw=st.lists(st.floats(0.01, 10), min_size=3, max_size=3),
    scale=st.floats(0.1, 100),
)
def test_projection_is_scale_invariant(raw, scale):
    g = build_ring(3)
    base = project_weights(dict(zip((0, 1, 2), raw)), g, owner=0)
    scaled = project_weights(dict(zip((0, 1, 2), [scale * r for r in raw])), g, owner=0)
    for k in (0, 1, 2):
        assert scaled.weight(k) == pytest.approx(base.weight(k), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    raw=st.lists(raw_entry, min_size=3, max_size=3),
    states=st.lists(st.floats(-50, 50), min_size=3, max_size=3),
)
def test_fusion_stays_in_convex_hull(raw, states):
    g = build_ring(3)
    w = project_weights(dict(zip((0, 1, 2), raw)), g, owner=0)
    mapping = {k: np.array([s]) for k, s in zip((0, 1, 2), states)}
    fused = float(fuse_states(w, mapping)[0])
    assert min(states) - 1e-9 <= fused <= max(states) + 1e-9
