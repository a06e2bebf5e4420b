import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risklens.graph import (
    GRAPH_FORMAT_VERSION,
    GraphFormatError,
    TransitionGraph,
    build,
    load,
    save,
)
from risklens.logmodel import (
    FeatureSchema,
    Normalizer,
    OutOfRangeWarning,
    TransitionLog,
    TransitionRecord,
)
from risklens.risk import BinaryRiskLabeling, ProbabilisticRisk


def unit_log(episodes, names=("x", "y")):
    """Episodes of plain state tuples, already inside [0, 1]."""
    schema = FeatureSchema(names)
    eps = []
    for e, states in enumerate(episodes):
        eid = f"ep-{e}"
        eps.append(
            [
                TransitionRecord(eid, i, np.array(s, dtype=float), False, False)
                for i, s in enumerate(states)
            ]
        )
    return TransitionLog(schema, eps)


def build_unit(episodes, epsilon, names=("x", "y")):
    """Build on pre-normalized data so distances are literal."""
    log = unit_log(episodes, names)
    return build(log, epsilon, normalizer=Normalizer.identity(len(names)))


def test_nearby_states_merge_into_one_node():
    g = build_unit([[(0.0, 0.0), (0.1, 0.0)]], epsilon=0.2)
    assert g.n_nodes == 1
    assert np.array_equal(g.representatives[0], [0.0, 0.0])
    assert g.total_counts[0] == 2
    # the pair is consecutive, so the merge produces a self-loop
    assert g.out_neighbors(0) == {0: 1}


def test_distance_exactly_epsilon_still_merges():
    g = build_unit([[(0.0, 0.0), (0.2, 0.0)]], epsilon=0.2)
    assert g.n_nodes == 1
    g2 = build_unit([[(0.0, 0.0), (0.2000001, 0.0)]], epsilon=0.2)
    assert g2.n_nodes == 2


def test_representative_is_first_state_and_never_moves():
    g = build_unit([[(0.0, 0.0), (0.15, 0.0), (0.19, 0.0)]], epsilon=0.2)
    assert g.n_nodes == 1
    assert np.array_equal(g.representatives[0], [0.0, 0.0])


def test_assignment_prefers_nearest_then_lowest_id():
    # reps at 0.0 and 0.3; a state at 0.15 ties and must join node 0
    g = build_unit([[(0.0, 0.0), (0.3, 0.0), (0.15, 0.0)]], epsilon=0.2)
    assert g.n_nodes == 2
    assert g.total_counts[0] == 2 and g.total_counts[1] == 1
    # 0.21 is within epsilon of both but strictly nearer to node 1
    g2 = build_unit([[(0.0, 0.0), (0.3, 0.0), (0.21, 0.0)]], epsilon=0.25)
    assert g2.total_counts[1] == 2


def test_no_edges_across_episode_boundary():
    g = build_unit([[(0.0, 0.0), (0.9, 0.9)], [(0.9, 0.9), (0.0, 0.0)]], epsilon=0.1)
    assert g.n_nodes == 2
    src, dst, mult = g.edge_arrays()
    assert mult.sum() == 2  # one transition per episode
    assert set(zip(src.tolist(), dst.tolist())) == {(0, 1), (1, 0)}


def test_fatal_counts_accumulate():
    schema = FeatureSchema(("x",))
    recs = [
        TransitionRecord("e", 0, (0.0,), False, False),
        TransitionRecord("e", 1, (0.05,), True, True),
    ]
    log = TransitionLog(schema, [recs])
    g = build(log, 0.2, normalizer=Normalizer.identity(1))
    assert g.n_nodes == 1
    assert g.total_counts[0] == 2 and g.fatal_counts[0] == 1


def test_build_rejects_bad_inputs():
    log = unit_log([[(0.0, 0.0)]])
    with pytest.raises(ValueError):
        build(log, 0.0)
    with pytest.raises(ValueError):
        build(log, -1.0)
    with pytest.raises(ValueError):
        build(log, 0.1, metric="manhattan")
    with pytest.raises(ValueError):
        build(TransitionLog(FeatureSchema(("x",)), []), 0.1)


def test_default_normalizer_is_fitted_from_log():
    # raw span 0..10 in x; epsilon applies to normalized coordinates
    log = unit_log([[(0.0, 0.0), (10.0, 0.0), (5.0, 0.0)]])
    g = build(log, epsilon=0.2)
    assert g.n_nodes == 3
    assert np.array_equal(g.normalizer.lo, [0.0, 0.0])
    assert np.array_equal(g.normalizer.hi, [10.0, 0.0])


def test_find_node_exact_and_tie_break():
    g = build_unit([[(0.25, 0.0), (0.75, 0.0)]], epsilon=0.1)
    assert g.find_node(np.array([0.25, 0.0])) == 0
    assert g.find_node(np.array([0.75, 0.0])) == 1
    # exact midpoint: both squared distances are identical floats
    assert g.find_node(np.array([0.5, 0.0])) == 0


def test_find_node_clamps_out_of_range_with_warning():
    log = unit_log([[(0.0, 0.0), (2.0, 2.0)]])
    g = build(log, epsilon=0.1)
    with pytest.warns(OutOfRangeWarning):
        i = g.find_node(np.array([5.0, 5.0]))
    assert i == 1  # clamps to (1, 1), the far corner's node


def test_find_node_rejects_dimension_mismatch():
    g = build_unit([[(0.0, 0.0)]], epsilon=0.1)
    with pytest.raises(ValueError):
        g.find_node(np.array([0.0]))


def test_node_and_edges_views():
    g = build_unit([[(0.0, 0.0), (0.9, 0.9), (0.0, 0.0)]], epsilon=0.1)
    node = g.node(0)
    assert node.id == 0 and node.total == 2 and node.fatal == 0
    edges = g.edges()
    assert [(e.src, e.dst, e.multiplicity) for e in edges] == [(0, 1, 1), (1, 0, 1)]


def graph_round_trip_equal(a: TransitionGraph, b: TransitionGraph):
    assert a.epsilon == b.epsilon
    assert a.metric == b.metric
    assert a.schema == b.schema
    assert np.array_equal(a.normalizer.lo, b.normalizer.lo)
    assert np.array_equal(a.normalizer.hi, b.normalizer.hi)
    assert np.array_equal(a.representatives, b.representatives)
    assert np.array_equal(a.total_counts, b.total_counts)
    assert np.array_equal(a.fatal_counts, b.fatal_counts)
    assert [a.out_neighbors(i) for i in range(a.n_nodes)] == [
        b.out_neighbors(i) for i in range(b.n_nodes)
    ]


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    episodes = [rng.uniform(0, 1, size=(40, 2)).tolist() for _ in range(4)]
    g = build_unit(episodes, epsilon=0.15)
    g.binary_risk = BinaryRiskLabeling(rng.uniform(size=g.n_nodes) < 0.3)
    g.prob_risk = ProbabilisticRisk(rng.uniform(size=g.n_nodes), 50, 0.01)
    p = tmp_path / "g.json"
    save(g, p)
    back = load(p)
    graph_round_trip_equal(g, back)
    assert np.array_equal(back.binary_risk.risky, g.binary_risk.risky)
    assert back.binary_risk.dead_ends_risky == g.binary_risk.dead_ends_risky
    assert np.array_equal(back.prob_risk.values, g.prob_risk.values)
    assert back.prob_risk.iterations == 50 and back.prob_risk.learning_rate == 0.01


def test_save_is_byte_deterministic(tmp_path):
    g = build_unit([[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]], epsilon=0.1)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save(g, p1)
    save(g, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_version_mismatch(tmp_path):
    g = build_unit([[(0.0, 0.0)]], epsilon=0.1)
    p = tmp_path / "g.json"
    save(g, p)
    payload = json.loads(p.read_text())
    payload["version"] = GRAPH_FORMAT_VERSION + 1
    p.write_text(json.dumps(payload))
    with pytest.raises(GraphFormatError):
        load(p)


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "g.json"
    p.write_text("{not json")
    with pytest.raises(GraphFormatError):
        load(p)
    p.write_text(json.dumps({"version": 1}))
    with pytest.raises(GraphFormatError):
        load(p)


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.lists(
            st.tuples(
                st.floats(min_value=0, max_value=1, allow_nan=False),
                st.floats(min_value=0, max_value=1, allow_nan=False),
            ),
            min_size=1,
            max_size=25,
        ),
        min_size=1,
        max_size=4,
    ),
    st.sampled_from([0.05, 0.15, 0.3, 0.7]),
)
def test_build_invariants_hold_on_random_logs(episodes, epsilon):
    log = unit_log(episodes)
    g = build(log, epsilon, normalizer=Normalizer.identity(2))
    # every state lies within epsilon of some representative (its own node's)
    z = log.states()
    for s in z:
        d2 = ((g.representatives - s) ** 2).sum(axis=1)
        assert d2.min() <= epsilon**2 + 1e-12
    # representatives pairwise more than epsilon apart
    for i in range(g.n_nodes):
        for j in range(i + 1, g.n_nodes):
            d = np.sqrt(((g.representatives[i] - g.representatives[j]) ** 2).sum())
            assert d > epsilon
    # conservation
    assert g.total_counts.sum() == log.n_records
    src, dst, mult = g.edge_arrays()
    assert mult.sum() == log.n_transitions
