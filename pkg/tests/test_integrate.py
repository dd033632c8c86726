import pytest
from hypothesis import given, settings, strategies as st

from artifact.components import Component, ComponentSet
from artifact.graphstream import CommunitySnapshot, DCConfig, Edge, run_stream, write_results
from artifact.integrate import (StreamSummary, UndefinedCorrelationError, community_correlation,
                                correlation_matrix, edge_correlation_oracle, integrate, node_correlation)

nodes = st.frozensets(st.integers(0, 40), max_size=25)
edge_lists = st.lists(st.tuples(st.integers(0, 15), st.integers(0, 15)), max_size=30)


def summary(node_set, community=frozenset()):
    comps = (Component(min(community), tuple(sorted(community)), 0),) if community else ()
    return StreamSummary(frozenset(node_set) | frozenset(community), [CommunitySnapshot(0.0, comps)])


def has_edges(e):
    return any(u != v for u, v in e) or bool(e)


@settings(max_examples=1000, deadline=None)
@given(nodes, nodes)
def test_node_correlation_properties(a, b):
    s1, s2 = summary(a), summary(b)
    if not a and not b:
        with pytest.raises(UndefinedCorrelationError):
            node_correlation(s1, s2)
        return
    r = node_correlation(s1, s2)
    assert r == node_correlation(s2, s1)
    assert 0.0 <= r <= 1.0
    if a:
        assert node_correlation(s1, s1) == 1.0
    if not a & b:
        assert r == 0.0


@settings(max_examples=1000, deadline=None)
@given(nodes, nodes, nodes, nodes)
def test_community_correlation_properties(v1, c1, v2, c2):
    s1, s2 = summary(v1, c1), summary(v2, c2)
    if not c1 and not c2:
        with pytest.raises(UndefinedCorrelationError):
            community_correlation(s1, s2)
        return
    r = community_correlation(s1, s2)
    assert r == community_correlation(s2, s1)
    assert 0.0 <= r <= 1.0
    if c1:
        assert community_correlation(s1, s1) == 1.0
    if not c1 & c2:
        assert r == 0.0


@settings(max_examples=1000, deadline=None)
@given(edge_lists, edge_lists)
def test_edge_oracle_properties(e1, e2):
    und = lambda e: {tuple(sorted(x)) for x in e}
    if not e1 and not e2:
        with pytest.raises(UndefinedCorrelationError):
            edge_correlation_oracle(e1, e2)
        return
    r = edge_correlation_oracle(e1, e2)
    assert r == edge_correlation_oracle(e2, e1)
    assert 0.0 <= r <= 1.0
    if e1:
        assert edge_correlation_oracle(e1, [(v, u) for u, v in e1]) == 1.0
    if not und(e1) & und(e2):
        assert r == 0.0


def test_node_correlation_example():
    assert node_correlation(summary({"a", "b", "c"}), summary({"b", "c", "d"})) == pytest.approx(2 / 3)


def test_community_union_includes_global_components():
    s = StreamSummary(frozenset("abcdef"), [CommunitySnapshot(0.0, (Component("a", ("a", "b", "c"), 2),))],
                      ComponentSet([Component("d", ("d", "e", "f"), 2)]))
    assert s.community_union == frozenset("abcdef")
    assert s.window_union == frozenset("abc")


def test_integrate_and_matrix_from_disk(tmp_path):
    edges = [Edge(f"u{i % 11}", f"h{(i * 5) % 7}", float(i)) for i in range(300)]
    cfg = DCConfig(k=40, h=3, c=3, tau=60, window_length=60)
    dirs = []
    for seed in (1, 2):
        d = tmp_path / f"run{seed}"
        write_results(run_stream(edges, cfg, rng=seed), d, cfg)
        dirs.append(d)
    s1, s2 = (StreamSummary.load(d) for d in dirs)
    res = integrate(s1, s2)
    assert res.rho_v == 1.0
    assert 0.0 < res.rho_c <= 1.0
    assert res.common_nodes == s1.node_set
    mat = correlation_matrix([s1, s2, s1], "rho_c")
    assert mat[0][2] == 1.0 and mat[0][1] == mat[1][0] == res.rho_c
    with pytest.raises(OSError):
        StreamSummary.load(tmp_path / "missing")
