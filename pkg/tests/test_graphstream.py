import json

import pytest

from artifact.components import recompute_components
from artifact.graphstream import (CommunitySnapshot, DCConfig, Edge, EdgeStreamState, component_size_series,
                                  run_stream, write_results)
from artifact.components import Component
from artifact.reservoir import OrderingError


def chain_stream(n_edges, dt=1.0, start=0.0):
    return [Edge(f"n{i}", f"n{i + 1}", start + i * dt) for i in range(n_edges)]


def test_small_stream_keeps_everything():
    edges = [Edge("a", "b", 0), Edge("b", "c", 1), Edge("x", "y", 2)]
    res = run_stream(edges, DCConfig(k=10, h=3, c=1, tau=100, window_length=100), rng=0)
    assert [c.nodes for c in res.global_components] == [("a", "b", "c")]
    assert len(res.snapshots) == 1
    assert res.snapshots[0].at == 2
    assert len(res.registry) == 5


def test_one_snapshot_per_tau_boundary():
    edges = chain_stream(4 * 60, dt=60.0)  # 4 hours of edges, one per minute
    res = run_stream(edges, DCConfig(tau=900, window_length=900), rng=1)
    assert len(res.snapshots) == 16
    assert [s.at for s in res.snapshots[:3]] == [900.0, 1800.0, 2700.0]


def test_snapshot_components_match_window_sample():
    cfg = DCConfig(k=50, h=2, c=1, tau=10, window_length=10)
    state = EdgeStreamState(cfg, rng=3)
    for e in chain_stream(40, dt=0.5):
        state.ingest_edge(e)
    snap = state._take_snapshot(state.window.newest)
    expected = recompute_components(state.window.sample()).at_least(2)
    assert snap.components == tuple(expected)


def test_memory_bound_holds_every_step():
    cfg = DCConfig(k=20, h=3, c=3, tau=5, window_length=5)
    state = EdgeStreamState(cfg, rng=2)
    for i in range(2000):
        state.ingest_edge(Edge(i % 97, (i * 31) % 89 + 100, i * 0.01))
        assert state.retained_edge_count() <= 2 * cfg.k


def test_out_of_order_edges():
    state = EdgeStreamState(DCConfig(), rng=0)
    state.ingest_edge(Edge("a", "b", 10))
    with pytest.raises(OrderingError):
        state.ingest_edge(Edge("a", "c", 5))
    lax = EdgeStreamState(DCConfig(late="clamp"), rng=0)
    lax.ingest_edge(Edge("a", "b", 10))
    lax.ingest_edge(Edge("a", "c", 5))
    assert lax.counters.accepted == 2


def test_self_loops_are_counted_and_skipped():
    state = EdgeStreamState(DCConfig(), rng=0)
    state.ingest_edge(Edge("a", "a", 0))
    assert state.counters.self_loops == 1
    assert state.retained_edge_count() == 0


def test_finalize_is_idempotent_and_closes_stream():
    state = EdgeStreamState(DCConfig(tau=10), rng=0)
    for e in chain_stream(5):
        state.ingest_edge(e)
    a = state.finalize()
    b = state.finalize()
    assert len(a.snapshots) == len(b.snapshots) == 1
    with pytest.raises(RuntimeError):
        state.ingest_edge(Edge("p", "q", 100))


@pytest.mark.parametrize("field,value", [("k", 0), ("h", -1), ("c", 1.5), ("tau", 0), ("window_length", -2)])
def test_config_validation(field, value):
    with pytest.raises(ValueError):
        DCConfig(**{field: value})


def test_lineage_follows_largest_overlap():
    s1 = CommunitySnapshot(0, (Component("a", ("a", "b", "c"), 2), Component("x", ("x", "y", "z"), 2)))
    s2 = CommunitySnapshot(1, (Component("b", ("b", "c", "d"), 2),))
    s3 = CommunitySnapshot(2, (Component("p", ("p", "q", "r"), 2), Component("x", ("x", "y", "w"), 2)))
    pts = component_size_series([s1, s2, s3])
    assert [(p.at, p.lineage) for p in pts] == [(0, 0), (0, 1), (1, 0), (2, 2), (2, 3)]


def test_results_are_deterministic(tmp_path):
    edges = [Edge(i % 13, (i * 7) % 17 + 20, i * 3.0) for i in range(600)]
    cfg = DCConfig(k=30, h=3, c=3, tau=120, window_length=120)
    for name in ("a", "b"):
        write_results(run_stream(edges, cfg, rng=5), tmp_path / name, cfg)
    for f in ("snapshots.jsonl", "registry.jsonl", "global_components.jsonl", "size_series.csv", "config.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rec = json.loads((tmp_path / "a" / "snapshots.jsonl").read_text().splitlines()[0])
    assert set(rec) == {"at", "component_id", "nodes", "node_count"}
