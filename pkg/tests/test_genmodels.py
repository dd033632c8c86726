import math
from collections import Counter

import numpy as np
import pytest

from artifact.genmodels import (ConcentrationError, DegreeDistribution, GeneratedGraph, GenerationError,
                                check_power_law_max_degree, estimate_constants, gen_communities,
                                gen_configuration, gen_gnp, gen_pa, loglog_slope, power_law_delta)
from artifact.rng import RandomStream


def majority_inside(edges, S):
    """Majority rule re-checked from scratch: each node of S has strictly more
    than half of its non-loop edge endpoints inside S."""
    S = set(int(v) for v in S)
    for v in S:
        inside = total = 0
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b or v not in (a, b):
                continue
            other = b if a == v else a
            total += 1
            inside += other in S
        if not 2 * inside > total:
            return False
    return True


def random_even_delta(gen):
    counts = gen.integers(0, 6, size=int(gen.integers(1, 8))).tolist()
    if sum(i * c for i, c in enumerate(counts, start=1)) % 2:
        counts[0] += 1
    return DegreeDistribution(tuple(counts))


# -- degree distributions ------------------------------------------------------

def test_nine_node_delta():
    d = DegreeDistribution((4, 3, 2))
    assert (d.n_nodes, d.n_edges) == (9, 8)
    assert d.degree_sequence() == [3, 3, 2, 2, 2, 1, 1, 1, 1]
    assert DegreeDistribution.from_sequence([1, 3, 2, 1]).counts == (2, 1, 1)


def test_negative_counts_rejected():
    with pytest.raises(GenerationError):
        DegreeDistribution((1, -1))


def test_power_law_delta_shape():
    d = power_law_delta(10_000)
    assert d.is_even()
    assert abs(d.n_edges - 10_000) / 10_000 < 0.01
    assert d.max_degree == math.ceil(math.sqrt(2 * 10_000))
    assert check_power_law_max_degree(d)
    assert d.community_size() == 71
    assert all(a >= b for a, b in zip(d.counts, d.counts[1:]))


# -- G(n,p) --------------------------------------------------------------------

def test_gnp_extremes():
    assert gen_gnp(10, 0.0, rng=0).m == 0
    g = gen_gnp(4, 1.0, rng=0)
    assert g.m == 6
    assert sorted(g.edge_list()) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_gnp_edge_count_concentration():
    mean = 4950 * 0.05
    sigma = math.sqrt(4950 * 0.05 * 0.95)
    counts = [gen_gnp(100, 0.05, rng=s).m for s in range(200)]
    assert all(abs(c - mean) <= 4 * sigma for c in counts)
    assert abs(np.mean(counts) - mean) <= 4 * sigma / math.sqrt(200)


@pytest.mark.parametrize("n,p", [(0, 0.5), (5, -0.1), (5, 1.5)])
def test_gnp_domain(n, p):
    with pytest.raises(GenerationError):
        gen_gnp(n, p)


# -- preferential attachment -----------------------------------------------------

def test_pa_edge_count_and_simplicity():
    for n, m in [(3, 2), (50, 1), (1000, 2), (200, 5)]:
        g = gen_pa(n, m, rng=n)
        n0 = m + 1
        assert g.m == m * (n - n0) + n0 * (n0 - 1) // 2
        pairs = {tuple(sorted(e)) for e in g.edge_list()}
        assert len(pairs) == g.m


def test_pa_loglog_slope():
    g = gen_pa(10_000, 2, rng=7)
    slope = loglog_slope(g.degrees())
    assert -2.6 <= slope <= -1.6


def test_pa_domain():
    with pytest.raises(GenerationError):
        gen_pa(2, 2)


# -- configuration model -----------------------------------------------------------

def test_configuration_realizes_degrees_exactly():
    gen = np.random.default_rng(11)
    for i in range(100):
        delta = random_even_delta(gen)
        g = gen_configuration(delta, rng=i)
        realized = sorted(np.bincount(g.edges.ravel(), minlength=g.n).tolist(), reverse=True)
        assert realized == delta.degree_sequence()


def test_configuration_rejects_odd_sum():
    with pytest.raises(GenerationError):
        gen_configuration(DegreeDistribution((1, 1)))


def test_concentrated_nine_node_delta():
    g = gen_configuration(DegreeDistribution((4, 3, 2)), rng=0, concentrated=True)
    assert (g.n, g.m) == (9, 8)
    assert g.report.satisfied and g.report.s_size == 2
    assert majority_inside(g.edges, g.planted[0])


def test_concentrated_outputs_pass_independent_check():
    accepted = 0
    for seed, m in enumerate([60, 120, 250, 500, 1000, 2000]):
        try:
            g = gen_configuration(power_law_delta(m), rng=seed, concentrated=True)
        except ConcentrationError as exc:
            assert not exc.report.satisfied
            continue
        accepted += 1
        assert majority_inside(g.edges, g.planted[0])
        assert sorted(g.degrees().tolist(), reverse=True) == power_law_delta(m).degree_sequence()
    assert accepted >= 4


def test_concentration_failure_carries_report():
    # a perfect matching of degree-1 nodes can never satisfy the predicate
    with pytest.raises(ConcentrationError) as info:
        gen_configuration(DegreeDistribution((20,)), rng=0, concentrated=True, max_attempts=3)
    assert info.value.report.attempts == 3
    assert not info.value.report.satisfied


# -- communities -----------------------------------------------------------------

def test_two_communities_of_nine_node_delta():
    g = gen_communities(DegreeDistribution((4, 3, 2)), 2, 0.01, rng=3)
    assert g.n == 18
    assert g.bridges == 1
    assert g.m == 16 + 1
    a, b = g.planted
    assert not a & b
    assert all(v < 9 for v in a) and all(v >= 9 for v in b)
    bridge = g.edges[-1]
    assert (bridge[0] < 9) != (bridge[1] < 9)


def test_single_community_equals_configuration():
    d = power_law_delta(300)
    g1 = gen_communities(d, 1, 0.0, rng=RandomStream(5))
    g2 = gen_configuration(d, rng=RandomStream(5), concentrated=True)
    assert np.array_equal(g1.edges, g2.edges)


def test_communities_keep_degree_shape():
    d = power_law_delta(500)
    g = gen_communities(d, 2, 0.0, rng=1)
    deg = Counter(g.degrees().tolist())
    assert deg == Counter({k: 2 * v for k, v in Counter(d.degree_sequence()).items()})


# -- empirical constants -----------------------------------------------------------

def test_alpha_of_complete_graph_is_one():
    g = gen_gnp(8, 1.0, rng=0)
    g = GeneratedGraph(g.n, g.edges, [frozenset(range(8))])
    rep = estimate_constants(g, trials=2000, k=10, rng=0)
    assert rep.alpha_hat == 1.0
    assert rep.gamma_hat == 1.0


def test_alpha_of_double_star():
    # centers 0 and 1 joined, each with 9 leaves: one internal edge of 19
    edges = [(0, 1)] + [(0, i) for i in range(2, 11)] + [(1, i) for i in range(11, 20)]
    g = GeneratedGraph(20, np.array(edges), [frozenset({0, 1})])
    trials = 40_000
    rep = estimate_constants(g, trials=trials, k=5, rng=2)
    p = 1 / 19
    assert abs(rep.alpha_hat - p) < 4 * math.sqrt(p * (1 - p) / trials)
    # two internal edges share a node only when both are the center edge
    assert abs(rep.beta_hat - p * p) < 4 * math.sqrt(p * p / trials) + 1e-9


def test_constants_need_planted_set():
    with pytest.raises(GenerationError):
        estimate_constants(gen_gnp(5, 1.0, rng=0))
