"""Bounded random samples of a stream.

Three samplers live here:

* :class:`Reservoir` keeps ``k`` items with inclusion probability
  proportional to their measure (unit measures give the classic uniform
  reservoir).
* :class:`WindowSampler` keeps a uniform sample of the items whose
  timestamps fall in a sliding event-time window, using random priorities.
* :func:`simulate_inclusion` runs many independent weighted reservoirs in
  lockstep with numpy, for Monte Carlo checks of the inclusion law.

Weighted inclusion
------------------
After ``n`` offers with total measure ``T``, an item of measure ``w`` should
be retained with probability ``k*w/T``.  When that quantity exceeds 1 for
some items (always true during the fill phase, and for heavy items early
on) the target is capped: capped items are held with probability 1 and the
rest share the remaining ``k - a`` slots in proportion to their measure.
``eviction="exact"`` evicts incumbents with the probabilities that keep
every item exactly on this capped target; once no item is capped that rule
reduces to evicting a uniformly chosen incumbent.  ``eviction="uniform"``
always evicts uniformly (accept with ``min(1, k*w/T)``); it matches the
target for every item past the fill phase but leaves the first ``k`` items
at ``T_k/T_n`` regardless of their own measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, NamedTuple

import numpy as np

from .rng import RandomStream, as_stream

EVICTION_MODES = ("exact", "uniform")
WINDOW_MODES = ("exact", "compat")


class InvalidMeasureError(ValueError):
    """An item was offered with a nonpositive or non-finite measure."""


class UndefinedStateError(RuntimeError):
    """The reservoir has not seen any weight yet."""


class OrderingError(ValueError):
    """A timestamp went backwards in strict ordering mode."""


@dataclass(frozen=True)
class WeightedItem:
    payload: Any
    measure: float = 1.0

    def __post_init__(self):
        m = self.measure
        if not (isinstance(m, (int, float)) and math.isfinite(m) and m > 0):
            raise InvalidMeasureError(f"measure must be a positive finite number, got {m!r}")


class _CapState:
    """Tracks the capped inclusion targets of a weighted reservoir.

    The targets depend only on the sequence of measures, never on the random
    draws, so the same tracker drives the scalar reservoir and the batched
    simulator.  Capped items (target 1) are always present in the sample.
    """

    __slots__ = ("k", "n", "total", "capped", "capped_weight")

    def __init__(self, k: int):
        self.k = k
        self.n = 0
        self.total = 0.0
        self.capped: dict[Hashable, float] = {}
        self.capped_weight = 0.0

    def scale(self) -> float:
        rest = self.total - self.capped_weight
        free = self.k - len(self.capped)
        if free <= 0 or rest <= 0:
            return 0.0
        return free / rest

    def step(self, key: Hashable, w: float):
        """Register a new item; return (pi_new, prev_capped, prev_scale, fill)."""
        self.n += 1
        self.total += w
        if self.n <= self.k:
            self.capped[key] = w
            self.capped_weight += w
            return 1.0, None, 0.0, True

        prev_capped = self.capped
        prev_scale = (
            (self.k - len(prev_capped)) / (self.total - w - self.capped_weight)
            if self.total - w - self.capped_weight > 0 else 0.0
        )
        if not prev_capped and self.k * w < self.total:
            # no capping before or after: plain proportional target
            return self.k * w / self.total, prev_capped, prev_scale, False

        cands = sorted(prev_capped.items(), key=lambda kv: -kv[1])
        # the new item sits among the candidates by weight; ties keep incumbents first
        pos = 0
        while pos < len(cands) and cands[pos][1] >= w:
            pos += 1
        cands.insert(pos, (key, w))
        rest = self.total
        a = 0
        while a < len(cands) and (self.k - a) * cands[a][1] >= rest:
            rest -= cands[a][1]
            a += 1
        self.capped = dict(cands[:a])
        self.capped_weight = self.total - rest
        if key in self.capped:
            pi_new = 1.0
        else:
            pi_new = (self.k - a) / rest * w
        return pi_new, prev_capped, prev_scale, False

    def removal_weight(self, key, w, prev_capped, prev_scale, new_scale, pi_new) -> float:
        before = 1.0 if key in prev_capped else prev_scale * w
        after = 1.0 if key in self.capped else new_scale * w
        if before <= 0.0:
            return 0.0
        r = (1.0 - after / before) / pi_new
        return r if r > 0.0 else 0.0


class Reservoir:
    """k-item reservoir with measure-proportional inclusion.

    ``total_weight`` counts every offered item, retained or not.

    >>> r = Reservoir(3, rng=7)
    >>> for name in "abc":
    ...     _ = r.offer(WeightedItem(name))
    >>> r.snapshot()
    ['a', 'b', 'c']
    """

    def __init__(self, capacity: int, rng: RandomStream | int | None = None,
                 eviction: str = "exact"):
        if int(capacity) < 1:
            raise ValueError("capacity must be a positive integer")
        if eviction not in EVICTION_MODES:
            raise ValueError(f"eviction must be one of {EVICTION_MODES}")
        self.capacity = int(capacity)
        self.eviction = eviction
        self.items: list[WeightedItem] = []
        self._keys: list[int] = []
        self.total_weight = 0.0
        self.count_seen = 0
        self._rng = as_stream(rng)
        self._cap = _CapState(self.capacity)

    def __len__(self) -> int:
        return len(self.items)

    def offer(self, item: WeightedItem) -> bool:
        """Offer one item; return True if it was stored."""
        if not isinstance(item, WeightedItem):
            raise TypeError("offer() expects a WeightedItem")
        w = float(item.measure)
        key = self.count_seen
        self.count_seen += 1
        self.total_weight += w
        k = self.capacity

        if self.eviction == "uniform":
            if self.count_seen <= k:
                self.items.append(item)
                self._keys.append(key)
                return True
            p = k * w / self.total_weight
            if p >= 1.0 or self._rng.random() < p:
                slot = self._rng.randrange(k)
                self.items[slot] = item
                self._keys[slot] = key
                return True
            return False

        pi_new, prev_capped, prev_scale, fill = self._cap.step(key, w)
        if fill:
            self.items.append(item)
            self._keys.append(key)
            return True
        if pi_new < 1.0 and self._rng.random() >= pi_new:
            return False
        if not prev_capped:
            slot = self._rng.randrange(k)
        else:
            cap = self._cap
            new_scale = cap.scale()
            weights = [
                cap.removal_weight(kk, it.measure, prev_capped, prev_scale, new_scale, pi_new)
                for kk, it in zip(self._keys, self.items)
            ]
            slot = self._rng.choice_index(weights)
        self.items[slot] = item
        self._keys[slot] = key
        return True

    def offer_payload(self, payload: Any, measure: float = 1.0) -> bool:
        return self.offer(WeightedItem(payload, measure))

    def inclusion_probability(self, measure: float) -> float:
        """min(1, k*measure/T) for the current total weight T."""
        if self.total_weight <= 0:
            raise UndefinedStateError("no weight seen yet; inclusion probability is undefined")
        if not measure > 0:
            raise InvalidMeasureError(f"measure must be positive, got {measure!r}")
        return min(1.0, self.capacity * measure / self.total_weight)

    def snapshot(self) -> list:
        return [it.payload for it in self.items]


def reservoir_offer(r: Reservoir, item: WeightedItem) -> Reservoir:
    r.offer(item)
    return r


def reservoir_inclusion_probability(r: Reservoir, item_measure: float) -> float:
    return r.inclusion_probability(item_measure)


def reservoir_snapshot(r: Reservoir) -> list:
    return r.snapshot()


def inclusion_targets(measures: Iterable[float], k: int) -> np.ndarray:
    """Capped inclusion probabilities of every item after the whole stream.

    Equals ``k*w/T`` for each item when no item is capped.
    """
    w = np.asarray(list(measures), dtype=float)
    n = len(w)
    if n <= k:
        return np.ones(n)
    order = np.argsort(-w, kind="stable")
    rest = w.sum()
    a = 0
    while a < n and (k - a) * w[order[a]] >= rest:
        rest -= w[order[a]]
        a += 1
    out = (k - a) * w / rest
    out[order[:a]] = 1.0
    return out


def simulate_inclusion(measures, k: int, trials: int, rng: RandomStream | int | None = None,
                       eviction: str = "exact") -> np.ndarray:
    """Retention counts per item over ``trials`` independent reservoirs."""
    w = np.asarray(list(measures), dtype=float)
    if len(w) <= k:
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise InvalidMeasureError("all measures must be positive and finite")
        return np.full(len(w), trials, dtype=np.int64)
    slots = simulate_reservoirs(w, k, trials, rng, eviction)
    return np.bincount(slots.ravel(), minlength=len(w))


def simulate_reservoirs(measures, k: int, trials: int, rng: RandomStream | int | None = None,
                        eviction: str = "exact") -> np.ndarray:
    """Final contents of ``trials`` independent reservoirs, as item indices.

    Same algorithm as :class:`Reservoir`, vectorized across trials.  Returns
    an array of shape ``(trials, min(k, n))``.
    """
    if eviction not in EVICTION_MODES:
        raise ValueError(f"eviction must be one of {EVICTION_MODES}")
    w = np.asarray(list(measures), dtype=float)
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise InvalidMeasureError("all measures must be positive and finite")
    n = len(w)
    gen = as_stream(rng).generator
    if n <= k:
        return np.tile(np.arange(n), (trials, 1))

    slots = np.tile(np.arange(k), (trials, 1))
    rows = np.arange(trials)
    cap = _CapState(k)
    total = 0.0
    for j in range(n):
        wj = float(w[j])
        if eviction == "uniform":
            total += wj
            if j < k:
                continue
            pi_new = min(1.0, k * wj / total)
            prev_capped = None
        else:
            pi_new, prev_capped, prev_scale, fill = cap.step(j, wj)
            if fill:
                continue
        hit = rows[gen.random(trials) < pi_new] if pi_new < 1.0 else rows
        if hit.size == 0:
            continue
        if not prev_capped:
            pick = gen.integers(0, k, size=hit.size)
        else:
            new_scale = cap.scale()
            # removal weight depends only on the item, so tabulate it once
            was = np.zeros(n, dtype=bool)
            was[list(prev_capped)] = True
            now = np.zeros(n, dtype=bool)
            now[list(cap.capped)] = True
            before = np.where(was, 1.0, prev_scale * w)
            after = np.where(now, 1.0, new_scale * w)
            with np.errstate(divide="ignore", invalid="ignore"):
                table = np.where(before > 0, (1.0 - after / before) / pi_new, 0.0)
            table = np.maximum(table, 0.0)
            weights = table[slots[hit]]
            cum = np.cumsum(weights, axis=1)
            u = gen.random(hit.size) * cum[:, -1]
            pick = np.minimum((cum <= u[:, None]).sum(axis=1), k - 1)
        slots[hit, pick] = j
    return slots


class WindowEntry(NamedTuple):
    item: Any
    timestamp: float
    priority: float


class WindowSampler:
    """Uniform sample of the live items of an event-time sliding window.

    Each offered item gets an independent uniform priority.  In ``exact``
    mode the sample is the ``capacity`` live items of smallest priority
    (ties: earlier arrival wins).  Reproducing that set after expiry needs a
    buffer of not-yet-dominated candidates, an item being dropped once
    ``capacity`` later items have smaller priority; its expected size is
    about ``capacity * (1 + ln(W / capacity))`` for ``W`` live items.

    ``compat`` mode reproduces the simplified scheme: expired entries leave,
    new items are appended while there is room and otherwise overwrite a
    random entry.  Its sample is not uniform.

    An item is live while ``newest - timestamp <= window_length``.
    """

    def __init__(self, capacity: int, window_length: float, rng: RandomStream | int | None = None,
                 mode: str = "exact", late: str = "strict"):
        if int(capacity) < 1:
            raise ValueError("capacity must be a positive integer")
        if not window_length > 0:
            raise ValueError("window_length must be positive")
        if mode not in WINDOW_MODES:
            raise ValueError(f"mode must be one of {WINDOW_MODES}")
        if late not in ("strict", "clamp"):
            raise ValueError("late must be 'strict' or 'clamp'")
        self.capacity = int(capacity)
        self.window_length = float(window_length)
        self.mode = mode
        self.late = late
        self.newest: float | None = None
        self.count_seen = 0
        self._rng = as_stream(rng)
        # exact mode: candidate buffer in arrival order
        self._seq = np.empty(0, dtype=np.int64)
        self._prio = np.empty(0, dtype=float)
        self._ts = np.empty(0, dtype=float)
        self._dom = np.empty(0, dtype=np.int64)
        self._items: dict[int, Any] = {}
        # compat mode
        self._entries: list[WindowEntry] = []
        self._entry_seq: list[int] = []
        self._cache: list[WindowEntry] | None = None
        self._entries_cache: list[WindowEntry] | None = None
        self._sample_key: tuple | None = None
        self.version = 0

    def _clock(self, timestamp: float) -> float:
        t = float(timestamp)
        if self.newest is not None and t < self.newest:
            if self.late == "strict":
                raise OrderingError(f"timestamp {t} is older than newest {self.newest}")
            t = self.newest
        self.newest = t
        return t

    def _expire(self) -> None:
        horizon = self.newest - self.window_length
        if self.mode == "compat":
            keep = [i for i, e in enumerate(self._entries) if e.timestamp >= horizon]
            if len(keep) != len(self._entries):
                self._entries = [self._entries[i] for i in keep]
                self._entry_seq = [self._entry_seq[i] for i in keep]
                self._cache = None
            return
        cut = int(np.searchsorted(self._ts, horizon, side="left"))
        if cut:
            for s in self._seq[:cut].tolist():
                del self._items[s]
            self._seq = self._seq[cut:]
            self._prio = self._prio[cut:]
            self._ts = self._ts[cut:]
            self._dom = self._dom[cut:]
            self._cache = None

    def advance(self, now: float) -> None:
        """Move the clock to ``now`` and drop expired entries."""
        self._clock(now)
        self._expire()

    def offer(self, item: Any, timestamp: float) -> None:
        t = self._clock(timestamp)
        self._expire()
        p = self._rng.random()
        seq = self.count_seen
        self.count_seen += 1
        self._cache = None
        if self.mode == "compat":
            entry = WindowEntry(item, t, p)
            if len(self._entries) < self.capacity:
                self._entries.append(entry)
                self._entry_seq.append(seq)
            else:
                slot = self._rng.randrange(self.capacity)
                self._entries[slot] = entry
                self._entry_seq[slot] = seq
            return
        if self._dom.size:
            self._dom[self._prio > p] += 1
            alive = self._dom < self.capacity
            if not alive.all():
                for s in self._seq[~alive].tolist():
                    del self._items[s]
                self._seq = self._seq[alive]
                self._prio = self._prio[alive]
                self._ts = self._ts[alive]
                self._dom = self._dom[alive]
        self._seq = np.append(self._seq, seq)
        self._prio = np.append(self._prio, p)
        self._ts = np.append(self._ts, t)
        self._dom = np.append(self._dom, 0)
        self._items[seq] = item

    def _select(self) -> None:
        if self._cache is not None:
            return
        if self.mode == "compat":
            self._cache = list(self._entries)
            key = tuple(self._entry_seq)
        else:
            if self._seq.size <= self.capacity:
                idx = np.arange(self._seq.size)
            else:
                order = np.lexsort((self._seq, self._prio))
                idx = np.sort(order[: self.capacity])
            self._cache = idx
            key = tuple(self._seq[idx].tolist())
        self._entries_cache = None
        if key != self._sample_key:
            self._sample_key = key
            self.version += 1

    @property
    def entries(self) -> list[WindowEntry]:
        """Retained sample in arrival order.

        ``version`` changes whenever the retained set differs from the one
        last read.
        """
        self._select()
        if self.mode == "compat":
            return self._cache
        if self._entries_cache is None:
            idx = self._cache
            self._entries_cache = [
                WindowEntry(self._items[s], t, p)
                for s, t, p in zip(self._seq[idx].tolist(), self._ts[idx].tolist(), self._prio[idx].tolist())
            ]
        return self._entries_cache

    def sample(self) -> list:
        self._select()
        if self.mode == "compat":
            return [e.item for e in self._cache]
        items = self._items
        return [items[s] for s in self._seq[self._cache].tolist()]

    def __len__(self) -> int:
        self._select()
        return len(self._cache)

    @property
    def buffered_count(self) -> int:
        """Items held in memory, sample included."""
        return len(self._entries) if self.mode == "compat" else int(self._seq.size)


def window_offer(w: WindowSampler, item: Any, timestamp: float) -> WindowSampler:
    w.offer(item, timestamp)
    return w
