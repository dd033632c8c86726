"""Random graph models for validating stream community detection.

Node ids are integers.  In configuration-model graphs nodes are numbered by
decreasing requested degree, so the highest-degree nodes come first and the
planted community of a concentrated graph is ``range(s)`` (shifted by the
community offset when several graphs are composed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .components import recompute_components
from .rng import RandomStream, as_stream


class GenerationError(ValueError):
    pass


class ConcentrationError(GenerationError):
    """The concentrated generator exhausted its retries."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class DegreeDistribution:
    """``counts[i-1]`` nodes of degree ``i``."""

    counts: tuple

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise GenerationError("degree counts must be nonnegative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_sequence(cls, degrees: Sequence[int]) -> "DegreeDistribution":
        degrees = [int(d) for d in degrees]
        if any(d < 1 for d in degrees):
            raise GenerationError("degrees must be positive")
        counts = [0] * (max(degrees) if degrees else 0)
        for d in degrees:
            counts[d - 1] += 1
        return cls(tuple(counts))

    @property
    def n_nodes(self) -> int:
        return sum(self.counts)

    @property
    def degree_sum(self) -> int:
        return sum(i * c for i, c in enumerate(self.counts, start=1))

    @property
    def n_edges(self) -> int:
        return self.degree_sum // 2

    @property
    def max_degree(self) -> int:
        for i in range(len(self.counts), 0, -1):
            if self.counts[i - 1]:
                return i
        return 0

    def is_even(self) -> bool:
        return self.degree_sum % 2 == 0

    def degree_sequence(self) -> list[int]:
        """Degrees in decreasing order."""
        return [i for i in range(len(self.counts), 0, -1) for _ in range(self.counts[i - 1])]

    def community_size(self) -> int:
        return math.ceil(math.sqrt(self.n_edges / 2))


def power_law_delta(m: int) -> DegreeDistribution:
    """Degree counts ``ceil(c/i^2)`` up to degree ``ceil(sqrt(2m))``, with
    ``c`` chosen so the graph has about ``m`` edges and D(1) nudged for an
    even degree sum."""
    if m < 1:
        raise GenerationError("m must be positive")
    dmax = math.ceil(math.sqrt(2 * m))

    def edges(c: float) -> float:
        return sum(i * math.ceil(c / i**2) for i in range(1, dmax + 1)) / 2

    lo, hi = 0.0, 4.0 * m
    for _ in range(200):
        mid = (lo + hi) / 2
        if edges(mid) < m:
            lo = mid
        else:
            hi = mid
    counts = [math.ceil(hi / i**2) for i in range(1, dmax + 1)]
    if sum(i * d for i, d in enumerate(counts, start=1)) % 2:
        counts[0] += 1
    return DegreeDistribution(tuple(counts))


def check_power_law_max_degree(delta: DegreeDistribution) -> bool:
    """Max degree is within ceil(sqrt(2m)), the O(sqrt m) bound of a power law."""
    return delta.max_degree <= math.ceil(math.sqrt(2 * max(delta.n_edges, 1)))


@dataclass
class ConcentrationReport:
    s_size: int
    satisfied: bool
    alpha_hat: float | None = None
    beta_hat: float | None = None
    gamma_hat: float | None = None
    failing_nodes: int = 0
    attempts: int = 1


@dataclass
class GeneratedGraph:
    n: int
    edges: np.ndarray  # shape (m, 2), int
    planted: list = field(default_factory=list)  # list of frozenset
    report: ConcentrationReport | None = None
    bridges: int = 0

    @property
    def m(self) -> int:
        return int(len(self.edges))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n) if self.m else np.zeros(self.n, int)

    def edge_list(self) -> list[tuple[int, int]]:
        return [(int(a), int(b)) for a, b in self.edges]


def _check_rng(rng):
    return as_stream(rng).generator


# -- Erdos-Renyi and preferential attachment --------------------------------

def gen_gnp(n: int, p: float, rng: RandomStream | int | None = None) -> GeneratedGraph:
    if int(n) != n or n < 1:
        raise GenerationError("n must be a positive integer")
    if not 0.0 <= p <= 1.0:
        raise GenerationError("p must lie in [0, 1]")
    gen = _check_rng(rng)
    rows = []
    for i in range(n - 1):
        hit = np.flatnonzero(gen.random(n - i - 1) < p) + i + 1
        if hit.size:
            rows.append(np.column_stack([np.full(hit.size, i), hit]))
    edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return GeneratedGraph(int(n), edges.astype(np.int64))


def gen_pa(n: int, m: int, rng: RandomStream | int | None = None) -> GeneratedGraph:
    """Preferential attachment started from a clique on ``m + 1`` nodes.

    Each arrival links to ``m`` distinct existing nodes drawn by degree.
    Edge count is ``m*(n - m - 1) + m*(m + 1)/2``.
    """
    if int(m) != m or m < 1 or int(n) != n or n <= m:
        raise GenerationError("need integers n > m >= 1")
    gen = _check_rng(rng)
    n0 = m + 1
    edges = [(i, j) for i in range(n0) for j in range(i + 1, n0)]
    # every node appears once per incident edge
    ends = np.empty(2 * (len(edges) + m * (n - n0)), dtype=np.int64)
    pos = 0
    for a, b in edges:
        ends[pos] = a
        ends[pos + 1] = b
        pos += 2
    for new in range(n0, n):
        targets: set[int] = set()
        while len(targets) < m:
            for t in ends[gen.integers(0, pos, size=m - len(targets))].tolist():
                targets.add(t)
        for t in sorted(targets):
            edges.append((t, new))
            ends[pos] = t
            ends[pos + 1] = new
            pos += 2
    return GeneratedGraph(int(n), np.asarray(edges, dtype=np.int64))


def loglog_slope(degrees: np.ndarray, bins: int = 12, min_count: int = 5) -> float:
    """Least-squares slope of node counts in log-spaced degree bins.

    Counts per geometric bin fall like d^-(g-1) for a degree law d^-g, so a
    c/d^3 attachment graph gives about -2.  Bins with fewer than
    ``min_count`` nodes are left out of the fit.
    """
    d = np.asarray(degrees)
    d = d[d > 0]
    edges = np.unique(np.floor(np.logspace(0, np.log10(d.max() + 1), bins + 1)).astype(int))
    counts, _ = np.histogram(d, bins=edges)
    centers = np.sqrt(edges[:-1] * np.maximum(edges[1:] - 1, edges[:-1]))
    ok = counts >= min_count
    slope, _ = np.polyfit(np.log(centers[ok]), np.log(counts[ok]), 1)
    return float(slope)


# -- configuration model -----------------------------------------------------

def _remove_self_loops(pairs: np.ndarray, gen, cap: int = 100) -> np.ndarray:
    """Swap endpoints of self-loops with random other pairs, preserving degrees."""
    m = len(pairs)
    if m < 2:
        return pairs
    for i in np.flatnonzero(pairs[:, 0] == pairs[:, 1]).tolist():
        a = pairs[i, 0]
        if pairs[i, 1] != a:
            continue  # already repaired by an earlier swap
        for _ in range(cap):
            j = int(gen.integers(0, m))
            b, c = pairs[j]
            if j == i or b == a or c == a:
                continue
            pairs[i] = (a, b)
            pairs[j] = (a, c)
            break
    return pairs


def _degree_array(delta: DegreeDistribution) -> np.ndarray:
    return np.asarray(delta.degree_sequence(), dtype=np.int64)


def _match(stubs: np.ndarray, gen) -> np.ndarray:
    stubs = stubs.copy()
    gen.shuffle(stubs)
    return stubs.reshape(-1, 2)


def concentration_check(edges, community, n: int | None = None) -> tuple[bool, int]:
    """Every node of ``community`` has strictly more than half of its
    incident edge endpoints inside ``community``; self-loops are ignored and
    parallel edges count with multiplicity.  Returns (ok, failing count).
    """
    S = set(community)
    inside: dict = {v: 0 for v in S}
    total: dict = {v: 0 for v in S}
    for a, b in edges:
        if a == b:
            continue
        if a in S:
            total[a] += 1
            inside[a] += b in S
        if b in S:
            total[b] += 1
            inside[b] += a in S
    failing = sum(1 for v in S if not 2 * inside[v] > total[v])
    return failing == 0, failing


def _internal_stats(edges: np.ndarray, community: frozenset) -> tuple[float, float]:
    """Exact probabilities that one uniform edge is internal, and that two
    independent uniform edges are both internal and share a node."""
    m = len(edges)
    if m == 0:
        return 0.0, 0.0
    S = np.zeros(int(edges.max()) + 1, dtype=bool)
    S[[v for v in community if v < len(S)]] = True
    internal = edges[S[edges[:, 0]] & S[edges[:, 1]] & (edges[:, 0] != edges[:, 1])]
    alpha = len(internal) / m
    if not len(internal):
        return alpha, 0.0
    deg = np.bincount(internal.ravel())
    lo = np.minimum(internal[:, 0], internal[:, 1])
    hi = np.maximum(internal[:, 0], internal[:, 1])
    _, mult = np.unique(lo * (int(hi.max()) + 1) + hi, return_counts=True)
    sharing = float((deg.astype(float) ** 2).sum() - (mult.astype(float) ** 2).sum())
    return alpha, sharing / m**2


def gen_configuration(delta: DegreeDistribution, rng: RandomStream | int | None = None,
                      concentrated: bool = False, q: float = 0.9, pool_factor: int = 2,
                      max_attempts: int = 100) -> GeneratedGraph:
    """Configuration-model multigraph realizing ``delta`` exactly.

    With ``concentrated=True`` the half-edges of the ``pool_factor * s``
    highest-degree nodes are, each with probability ``q``, matched among
    themselves first; the rest are matched uniformly.  The result is redrawn
    until the ``s = ceil(sqrt(m/2))`` top nodes satisfy the majority
    predicate of :func:`concentration_check`.
    """
    if not isinstance(delta, DegreeDistribution):
        delta = DegreeDistribution(tuple(delta))
    if not delta.is_even():
        raise GenerationError(f"degree sum {delta.degree_sum} is odd")
    if not 0.0 <= q <= 1.0:
        raise GenerationError("q must lie in [0, 1]")
    gen = _check_rng(rng)
    deg = _degree_array(delta)
    n = len(deg)
    stubs = np.repeat(np.arange(n, dtype=np.int64), deg)
    s = min(delta.community_size(), n)
    community = frozenset(range(s))

    if not concentrated:
        pairs = _remove_self_loops(_match(stubs, gen), gen)
        alpha, beta = _internal_stats(pairs, community)
        ok, failing = concentration_check(pairs, community)
        report = ConcentrationReport(s, ok, alpha, beta, failing_nodes=failing)
        return GeneratedGraph(n, pairs, [community], report)

    if not check_power_law_max_degree(delta):
        raise GenerationError(
            f"max degree {delta.max_degree} exceeds ceil(sqrt(2m)) for m={delta.n_edges}")
    pool = min(n, pool_factor * s)
    best = None
    for attempt in range(1, max_attempts + 1):
        internal = (stubs < pool) & (gen.random(len(stubs)) < q)
        a, b = stubs[internal], stubs[~internal]
        if len(a) % 2:
            a, b = a[:-1], np.append(b, a[-1])
        pairs = np.concatenate([_match(a, gen), _match(b, gen)]) if len(stubs) else stubs.reshape(0, 2)
        pairs = _remove_self_loops(pairs, gen)
        ok, failing = concentration_check(pairs, community)
        if best is None or failing < best[1]:
            best = (pairs, failing)
        if ok:
            alpha, beta = _internal_stats(pairs, community)
            report = ConcentrationReport(s, True, alpha, beta, attempts=attempt)
            return GeneratedGraph(n, pairs, [community], report)
    alpha, beta = _internal_stats(best[0], community)
    report = ConcentrationReport(s, False, alpha, beta, failing_nodes=best[1], attempts=max_attempts)
    raise ConcentrationError(f"no concentrated graph after {max_attempts} attempts", report)


def gen_communities(delta: DegreeDistribution, p: int = 2, bridge_fraction: float = 0.01,
                    rng: RandomStream | int | None = None, **kwargs) -> GeneratedGraph:
    """``p`` concentrated copies of ``delta`` on disjoint node ranges, joined
    by ``ceil(bridge_fraction * m_total)`` edges between degree-1 nodes of
    different copies (lowest-degree nodes if ``delta`` has no degree-1 node).
    """
    if int(p) != p or p < 1:
        raise GenerationError("p must be a positive integer")
    if not 0.0 <= bridge_fraction <= 1.0:
        raise GenerationError("bridge_fraction must lie in [0, 1]")
    if not isinstance(delta, DegreeDistribution):
        delta = DegreeDistribution(tuple(delta))
    stream = as_stream(rng)
    if p == 1:
        return gen_configuration(delta, stream, concentrated=True, **kwargs)
    parts = [gen_configuration(delta, stream, concentrated=True, **kwargs) for _ in range(p)]
    n1 = parts[0].n
    edges = [g.edges + i * n1 for i, g in enumerate(parts)]
    planted = [frozenset(v + i * n1 for v in g.planted[0]) for i, g in enumerate(parts)]
    m_total = sum(g.m for g in parts)
    n_bridges = math.ceil(bridge_fraction * m_total)
    gen = stream.generator
    if n_bridges:
        low = min(d for d in delta.degree_sequence())
        local = np.flatnonzero(_degree_array(delta) == low)
        comm = gen.integers(0, p, size=(n_bridges, 2))
        same = comm[:, 0] == comm[:, 1]
        comm[same, 1] = (comm[same, 0] + 1 + gen.integers(0, p - 1, size=int(same.sum()))) % p
        ends = local[gen.integers(0, len(local), size=(n_bridges, 2))] + comm * n1
        edges.append(ends.astype(np.int64))
    report = parts[0].report
    return GeneratedGraph(p * n1, np.concatenate(edges), planted, report, bridges=n_bridges)


# -- empirical constants -----------------------------------------------------

def largest_internal_component(sample: np.ndarray, community) -> int:
    S = set(community)
    inner = [(int(a), int(b)) for a, b in sample if a in S and b in S and a != b]
    comps = recompute_components(inner)
    return max((c.size for c in comps), default=0)


def estimate_constants(g: GeneratedGraph, trials: int = 10_000, k: int = 400, h: int = 3,
                       rng: RandomStream | int | None = None, community: int = 0,
                       gamma_trials: int | None = None) -> ConcentrationReport:
    """Monte Carlo estimates of alpha, beta and gamma for one planted set.

    alpha: a uniform edge is internal to S.
    beta: two independent uniform edges are both internal and share a node.
    gamma: a uniform k-edge sample has an S-internal component of >= h nodes.
    """
    if not g.planted:
        raise GenerationError("graph has no planted community")
    if g.m == 0:
        raise GenerationError("graph has no edges")
    S = g.planted[community]
    gen = _check_rng(rng)
    inS = np.zeros(g.n, dtype=bool)
    inS[list(S)] = True
    e = g.edges
    internal = inS[e[:, 0]] & inS[e[:, 1]] & (e[:, 0] != e[:, 1])

    i = gen.integers(0, g.m, size=trials)
    alpha_hat = float(internal[i].mean())
    j1 = gen.integers(0, g.m, size=trials)
    j2 = gen.integers(0, g.m, size=trials)
    a, b = e[j1], e[j2]
    share = ((a[:, 0] == b[:, 0]) | (a[:, 0] == b[:, 1]) | (a[:, 1] == b[:, 0]) | (a[:, 1] == b[:, 1]))
    beta_hat = float((internal[j1] & internal[j2] & share).mean())

    gt = gamma_trials if gamma_trials is not None else max(1, trials // 100)
    kk = min(k, g.m)
    hits = 0
    for _ in range(gt):
        pick = gen.choice(g.m, size=kk, replace=False)
        if largest_internal_component(e[pick], S) >= h:
            hits += 1
    ok, failing = concentration_check(e, S)
    return ConcentrationReport(len(S), ok, alpha_hat, beta_hat, hits / gt, failing_nodes=failing)
