"""Dynamic community detection on an edge stream.

All vertices are registered; edges are never stored beyond two samplers: a
global uniform reservoir over the whole stream and a window sampler over the
recent event-time window.  Components of the window sample are recomputed
every ``c`` edges, and the components with at least ``h`` nodes are stored
every ``tau`` seconds of event time.  When the stream ends, the components
of the global reservoir are stored as well.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Hashable, Iterable, NamedTuple

from .components import Component, ComponentSet, recompute_components
from .reservoir import OrderingError, Reservoir, WeightedItem, WindowSampler
from .rng import RandomStream, as_stream


class Edge(NamedTuple):
    src: Hashable
    dst: Hashable
    timestamp: float = 0.0


@dataclass
class NodeInfo:
    first_seen: float
    occurrences: int = 0


class NodeRegistry:
    """Every node seen, with first-seen time and endpoint occurrence count."""

    def __init__(self):
        self.nodes: dict[Hashable, NodeInfo] = {}

    def touch(self, node, timestamp: float) -> None:
        info = self.nodes.get(node)
        if info is None:
            info = self.nodes[node] = NodeInfo(timestamp)
        info.occurrences += 1

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node) -> bool:
        return node in self.nodes

    def records(self) -> list[dict]:
        return [
            {"node": n, "first_seen": i.first_seen, "occurrences": i.occurrences}
            for n, i in sorted(self.nodes.items(), key=lambda kv: str(kv[0]))
        ]


@dataclass(frozen=True)
class CommunitySnapshot:
    at: float
    components: tuple  # of Component

    def records(self) -> list[dict]:
        return [
            {"at": self.at, "component_id": c.id, "nodes": list(c.nodes), "node_count": c.size}
            for c in self.components
        ]


@dataclass
class DCConfig:
    """Parameters of the dynamic detection run.

    ``tau`` and ``window_length`` are in the same units as edge timestamps
    (seconds for replayed files).
    """

    k: int = 400
    h: int = 3
    c: int = 3
    tau: float = 900.0
    window_length: float = 900.0
    window_mode: str = "exact"
    late: str = "strict"

    def __post_init__(self):
        for name in ("k", "h", "c"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("tau", "window_length"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class StreamCounters:
    accepted: int = 0
    self_loops: int = 0
    recomputes: int = 0


@dataclass
class FinalResult:
    global_components: ComponentSet
    snapshots: list
    registry: NodeRegistry
    counters: StreamCounters


class EdgeStreamState:
    """Single-writer state of one edge stream."""

    def __init__(self, config: DCConfig | None = None, rng: RandomStream | int | None = None):
        self.config = config or DCConfig()
        root = as_stream(rng)
        g_rng, w_rng = root.spawn(2)
        cfg = self.config
        self.registry = NodeRegistry()
        self.global_reservoir = Reservoir(cfg.k, rng=g_rng)
        self.window = WindowSampler(cfg.k, cfg.window_length, rng=w_rng,
                                    mode=cfg.window_mode, late=cfg.late)
        self._window_components = ComponentSet()
        self._pending_sample: list | None = None
        self.snapshots: list[CommunitySnapshot] = []
        self.counters = StreamCounters()
        self._since_recompute = 0
        self._window_version = None
        self._origin: float | None = None
        self._next_boundary: float | None = None
        self._last_time: float | None = None
        self.finalized = False

    # -- bookkeeping -------------------------------------------------------

    def retained_edge_count(self) -> int:
        return len(self.global_reservoir) + len(self.window)

    def _refresh_window_components(self) -> None:
        # capture the sample now, union-find it when someone reads it
        sample = self.window.sample()
        version = self.window.version
        if version != self._window_version:
            self._pending_sample = sample
            self._window_version = version
            self.counters.recomputes += 1

    @property
    def window_components(self) -> ComponentSet:
        """Components of the window sample as of the last refresh."""
        if self._pending_sample is not None:
            self._window_components = recompute_components(self._pending_sample)
            self._pending_sample = None
        return self._window_components

    # -- stream operations -------------------------------------------------

    def ingest_edge(self, e: Edge) -> list[CommunitySnapshot]:
        """Consume one edge; return the snapshots it triggered (usually none)."""
        if self.finalized:
            raise RuntimeError("stream already finalized")
        src, dst, ts = e
        ts = float(ts)
        newest = self.window.newest
        if newest is not None and ts < newest:
            if self.config.late == "strict":
                raise OrderingError(f"edge timestamp {ts} is older than {newest}")
            ts = newest
        if src == dst:
            self.counters.self_loops += 1
            return []
        emitted = self.tick_snapshot(ts) if self._origin is not None else []
        if self._origin is None:
            self._origin = ts
            self._next_boundary = ts + self.config.tau
        self.registry.touch(src, ts)
        self.registry.touch(dst, ts)
        edge = (src, dst) if src <= dst else (dst, src)
        self.global_reservoir.offer(WeightedItem(edge))
        self.window.offer(edge, ts)
        self._last_time = ts
        self.counters.accepted += 1
        self._since_recompute += 1
        if self._since_recompute >= self.config.c:
            self._since_recompute = 0
            self._refresh_window_components()
        return emitted

    def tick_snapshot(self, now: float) -> list[CommunitySnapshot]:
        """Emit one snapshot per tau boundary at or before ``now``.

        The window is moved to each boundary and its components refreshed
        before the snapshot is taken.
        """
        out = []
        if self._next_boundary is None:
            return out
        while now >= self._next_boundary:
            out.append(self._take_snapshot(self._next_boundary))
            self._next_boundary += self.config.tau
        return out

    def _take_snapshot(self, at: float) -> CommunitySnapshot:
        self.window.advance(at)
        self._refresh_window_components()
        snap = CommunitySnapshot(at, tuple(self.window_components.at_least(self.config.h)))
        self.snapshots.append(snap)
        return snap

    def global_components(self) -> ComponentSet:
        return recompute_components(self.global_reservoir.snapshot())

    def finalize(self) -> FinalResult:
        """Close the last tau interval and compute the global components."""
        if not self.finalized:
            if self._last_time is not None:
                self._take_snapshot(self._last_time)
            self.finalized = True
        return FinalResult(self.global_components().at_least(self.config.h),
                           self.snapshots, self.registry, self.counters)


def run_stream(edges: Iterable[Edge], config: DCConfig | None = None,
               rng: RandomStream | int | None = None) -> FinalResult:
    state = EdgeStreamState(config, rng)
    for e in edges:
        state.ingest_edge(e)
    return state.finalize()


def ingest_edge(state: EdgeStreamState, e: Edge) -> EdgeStreamState:
    state.ingest_edge(e)
    return state


def tick_snapshot(state: EdgeStreamState, now: float) -> CommunitySnapshot | None:
    snaps = state.tick_snapshot(now)
    return snaps[-1] if snaps else None


def finalize(state: EdgeStreamState) -> FinalResult:
    return state.finalize()


# -- lineage series -------------------------------------------------------

@dataclass
class LineagePoint:
    at: float
    lineage: int
    component_id: Hashable
    size: int


def component_size_series(snapshots: list[CommunitySnapshot]) -> list[LineagePoint]:
    """Greedy lineage tracking across consecutive snapshots.

    A component continues the lineage of the previous-snapshot component it
    shares the most nodes with (ties go to the smaller component id).  Two
    components may claim the same parent: both continue it.
    """
    if not snapshots:
        raise ValueError("need at least one snapshot")
    points: list[LineagePoint] = []
    prev: list[tuple[Component, int]] = []
    next_lineage = 0
    for snap in snapshots:
        cur = []
        for comp in snap.components:
            nodes = set(comp.nodes)
            best, best_overlap = None, 0
            for pc, lin in prev:
                ov = len(nodes.intersection(pc.nodes))
                if ov > best_overlap or (ov == best_overlap and ov > 0 and str(pc.id) < str(best[0].id)):
                    best, best_overlap = (pc, lin), ov
            if best is None:
                lin = next_lineage
                next_lineage += 1
            else:
                lin = best[1]
            cur.append((comp, lin))
            points.append(LineagePoint(snap.at, lin, comp.id, comp.size))
        prev = cur
    return points


# -- persistence ------------------------------------------------------------

def _dump_jsonl(path: Path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True, separators=(",", ":")) + "\n")


def write_results(result: FinalResult, out_dir, config: DCConfig | None = None,
                  extra_config: dict | None = None) -> dict[str, Path]:
    """Persist snapshots, registry, global components and the size series."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "snapshots": out / "snapshots.jsonl",
            "registry": out / "registry.jsonl",
            "global": out / "global_components.jsonl",
            "series": out / "size_series.csv",
            "config": out / "config.json",
        }
        _dump_jsonl(paths["snapshots"], (r for s in result.snapshots for r in s.records()))
        _dump_jsonl(paths["registry"], result.registry.records())
        _dump_jsonl(paths["global"], (
            {"component_id": c.id, "nodes": list(c.nodes), "node_count": c.size, "edge_count": c.edge_count}
            for c in result.global_components
        ))
        with open(paths["series"], "w", encoding="utf-8", newline="\n") as fh:
            fh.write("time,lineage,component_id,size\n")
            if result.snapshots:
                for p in component_size_series(result.snapshots):
                    fh.write(f"{p.at:g},{p.lineage},{p.component_id},{p.size}\n")
        cfg = asdict(config) if config is not None else {}
        cfg.update(extra_config or {})
        cfg["counters"] = asdict(result.counters)
        with open(paths["config"], "w", encoding="utf-8", newline="\n") as fh:
            json.dump(cfg, fh, sort_keys=True, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write detection results to {os.fspath(out)}: {exc}") from exc
    return paths
