"""Correlating finished streams.

Every correlation is an intersection-over-max ratio of two sets.  A ratio
whose sets are both empty is undefined and raises rather than reading as 0.
The community correlation only sees :class:`StreamSummary` objects, which
hold node sets and stored components but no edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

from .components import Component, ComponentSet
from .graphstream import CommunitySnapshot, FinalResult


class UndefinedCorrelationError(ValueError):
    pass


def overlap_ratio(a: set, b: set, what: str = "sets") -> float:
    if not a and not b:
        raise UndefinedCorrelationError(f"both {what} are empty; correlation is undefined")
    return len(a & b) / max(len(a), len(b))


@dataclass
class StreamSummary:
    node_set: frozenset
    snapshots: list = field(default_factory=list)
    global_components: ComponentSet = field(default_factory=ComponentSet)
    name: str = ""

    @property
    def window_union(self) -> frozenset:
        out: set = set()
        for snap in self.snapshots:
            for c in snap.components:
                out.update(c.nodes)
        return frozenset(out)

    @property
    def community_union(self) -> frozenset:
        return self.window_union | frozenset(self.global_components.nodes())

    @classmethod
    def from_result(cls, result: FinalResult, name: str = "") -> "StreamSummary":
        return cls(frozenset(result.registry.nodes), list(result.snapshots),
                   result.global_components, name)

    @classmethod
    def load(cls, directory) -> "StreamSummary":
        """Read the files written by :func:`graphstream.write_results`."""
        d = Path(directory)
        try:
            nodes = frozenset(r["node"] for r in _read_jsonl(d / "registry.jsonl"))
            by_time: dict = {}
            for r in _read_jsonl(d / "snapshots.jsonl"):
                by_time.setdefault(r["at"], []).append(
                    Component(r["component_id"], tuple(r["nodes"]), 0))
            snaps = [CommunitySnapshot(at, tuple(cs)) for at, cs in sorted(by_time.items())]
            glob = ComponentSet(
                Component(r["component_id"], tuple(r["nodes"]), r.get("edge_count", 0))
                for r in _read_jsonl(d / "global_components.jsonl"))
        except OSError as exc:
            raise OSError(f"cannot read stream summary from {d}: {exc}") from exc
        return cls(nodes, snaps, glob, d.name)


def _read_jsonl(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def node_correlation(s1: StreamSummary, s2: StreamSummary) -> float:
    return overlap_ratio(set(s1.node_set), set(s2.node_set), "node sets")


def community_correlation(s1: StreamSummary, s2: StreamSummary, window_only: bool = False) -> float:
    if window_only:
        return overlap_ratio(set(s1.window_union), set(s2.window_union), "window community unions")
    return overlap_ratio(set(s1.community_union), set(s2.community_union), "community unions")


def _undirected_set(edges) -> set:
    return {(u, v) if u <= v else (v, u) for u, v, *_ in edges}


def edge_correlation_oracle(e1: Iterable, e2: Iterable) -> float:
    """Edge correlation over fully stored edge lists (testing only)."""
    return overlap_ratio(_undirected_set(e1), _undirected_set(e2), "edge sets")


@dataclass
class IntegrationResult:
    v1_size: int
    v2_size: int
    common_nodes: frozenset
    communities_1: list
    communities_2: list
    rho_v: float
    rho_c: float
    rho_c_window: float | None
    rho_c_common: float | None

    def record(self) -> dict:
        return {
            "v1_size": self.v1_size,
            "v2_size": self.v2_size,
            "common_nodes": sorted(self.common_nodes, key=str),
            "communities_1": [sorted(c, key=str) for c in self.communities_1],
            "communities_2": [sorted(c, key=str) for c in self.communities_2],
            "rho_v": self.rho_v,
            "rho_c": self.rho_c,
            "rho_c_all": self.rho_c,
            "rho_c_window": self.rho_c_window,
            "rho_c_common": self.rho_c_common,
        }


def _communities(s: StreamSummary) -> list:
    seen = []
    for snap in s.snapshots:
        for c in snap.components:
            ns = frozenset(c.nodes)
            if ns not in seen:
                seen.append(ns)
    for c in s.global_components:
        ns = frozenset(c.nodes)
        if ns not in seen:
            seen.append(ns)
    return seen


def integrate(s1: StreamSummary, s2: StreamSummary) -> IntegrationResult:
    """Edge-free integration structure of two finished streams.

    ``rho_c`` uses the snapshot and global communities; ``rho_c_window``
    only the snapshots; ``rho_c_common`` divides the common community nodes
    by the number of common nodes.  The two variants are None when undefined.
    """
    common = s1.node_set & s2.node_set
    rho_v = node_correlation(s1, s2)
    rho_c = community_correlation(s1, s2)
    try:
        rho_w = community_correlation(s1, s2, window_only=True)
    except UndefinedCorrelationError:
        rho_w = None
    rho_common = (len(s1.community_union & s2.community_union) / len(common)) if common else None
    return IntegrationResult(len(s1.node_set), len(s2.node_set), frozenset(common),
                             _communities(s1), _communities(s2), rho_v, rho_c, rho_w, rho_common)


def correlation_matrix(summaries: Sequence[StreamSummary], kind: str = "rho_c") -> list[list[float | None]]:
    """Pairwise matrix for n streams; undefined entries are None."""
    fn = {"rho_v": node_correlation, "rho_c": community_correlation}[kind]
    n = len(summaries)
    mat: list[list[float | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        try:
            mat[i][i] = fn(summaries[i], summaries[i])
        except UndefinedCorrelationError:
            mat[i][i] = None
    for i, j in combinations(range(n), 2):
        try:
            v = fn(summaries[i], summaries[j])
        except UndefinedCorrelationError:
            v = None
        mat[i][j] = mat[j][i] = v
    return mat


def write_integration(result: IntegrationResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.record(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_matrix(names: Sequence[str], matrix, path, delimiter: str = ",") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(delimiter.join(["stream", *names]) + "\n")
        for name, row in zip(names, matrix):
            cells = ["" if v is None else f"{v:.6f}" for v in row]
            fh.write(delimiter.join([name, *cells]) + "\n")
