"""Tweet records to edge streams, and edge-file I/O.

A tweet sent by ``@y`` carrying tags ``#x`` and ``@z`` yields the edges
``(@y, #x)`` and ``(@y, @z)``.  Tags are case-folded; the leading ``#`` or
``@`` is kept, so ``#x`` and ``@x`` are different nodes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .graphstream import Edge
from .rng import RandomStream, as_stream


class ReplayError(ValueError):
    pass


def parse_time(value) -> float:
    """Epoch seconds from a number or an ISO-8601 string."""
    if isinstance(value, bool):
        raise ValueError(f"not a timestamp: {value!r}")
    if isinstance(value, (int, float)):
        t = float(value)
    else:
        text = str(value).strip()
        try:
            t = float(text)
        except ValueError:
            if text.endswith(("Z", "z")):
                text = text[:-1] + "+00:00"
            dt = datetime.fromisoformat(text)
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=timezone.utc)
            t = dt.timestamp()
    if not math.isfinite(t):
        raise ValueError(f"not a finite timestamp: {value!r}")
    return t


def normalize_tag(tag: str) -> str:
    return str(tag).strip().casefold()


def normalize_sender(sender: str) -> str:
    s = normalize_tag(sender)
    return s if s.startswith("@") else "@" + s


@dataclass(frozen=True)
class TweetRecord:
    sender: str
    tags: tuple
    timestamp: float

    def __post_init__(self):
        if not self.sender or self.sender == "@":
            raise ReplayError("tweet sender is empty")


@dataclass
class FilterConfig:
    excluded_tags: frozenset = frozenset()
    time_from: float | None = None
    time_to: float | None = None

    def __post_init__(self):
        self.excluded_tags = frozenset(normalize_tag(t) for t in self.excluded_tags)

    def in_range(self, t: float) -> bool:
        if self.time_from is not None and t < self.time_from:
            return False
        if self.time_to is not None and t >= self.time_to:
            return False
        return True


@dataclass
class IngestCounters:
    records: int = 0
    malformed: int = 0
    out_of_range: int = 0
    excluded: int = 0
    self_edges: int = 0
    edges: int = 0
    errors: list = field(default_factory=list)


def tweet_to_edges(r: TweetRecord, f: FilterConfig | None = None,
                   counters: IngestCounters | None = None) -> list[Edge]:
    f = f or FilterConfig()
    sender = normalize_sender(r.sender)
    out = []
    for tag in r.tags:
        t = normalize_tag(tag)
        if not t:
            continue
        if t in f.excluded_tags:
            if counters is not None:
                counters.excluded += 1
            continue
        if t == sender:
            if counters is not None:
                counters.self_edges += 1
            continue
        out.append(Edge(sender, t, r.timestamp))
    if counters is not None:
        counters.edges += len(out)
    return out


def parse_record(line: str) -> TweetRecord:
    obj = json.loads(line)
    if not isinstance(obj, dict):
        raise ReplayError("record is not an object")
    tags = obj.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ReplayError("tags must be a list of strings")
    sender = obj.get("sender")
    if not isinstance(sender, str) or not sender.strip():
        raise ReplayError("missing sender")
    if "timestamp" not in obj:
        raise ReplayError("missing timestamp")
    return TweetRecord(normalize_sender(sender), tuple(tags), parse_time(obj["timestamp"]))


def replay(path, f: FilterConfig | None = None,
           counters: IngestCounters | None = None) -> Iterator[Edge]:
    """Stream edges from a line-delimited JSON tweet file.

    Malformed lines are skipped and counted (with line numbers kept in
    ``counters.errors``).  The file is read lazily, one line at a time.
    """
    f = f or FilterConfig()
    counters = counters if counters is not None else IngestCounters()
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ReplayError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = parse_record(line)
            except (ValueError, TypeError) as exc:
                counters.malformed += 1
                counters.errors.append(f"{path}:{lineno}: {exc}")
                continue
            counters.records += 1
            if not f.in_range(rec.timestamp):
                counters.out_of_range += 1
                continue
            yield from tweet_to_edges(rec, f, counters)


# -- edge files --------------------------------------------------------------

def read_edges(path, delimiter: str | None = None) -> Iterator[Edge]:
    """Edges from ``src,dst,timestamp`` text or line-delimited JSON.

    The format is chosen per line: lines starting with ``{`` are JSON records
    with keys src, dst, timestamp.  A first line ``src<delim>dst...`` is a
    header and skipped.
    """
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise ReplayError(f"cannot open {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                if text.startswith("{"):
                    obj = json.loads(text)
                    yield Edge(str(obj["src"]), str(obj["dst"]), parse_time(obj["timestamp"]))
                    continue
                row = next(csv.reader([text], delimiter=delimiter or _sniff(text)))
                if lineno == 1 and row[0].strip().lower() == "src":
                    continue
                if len(row) < 3:
                    raise ValueError("expected src, dst, timestamp")
                yield Edge(row[0].strip(), row[1].strip(), parse_time(row[2]))
            except (ValueError, KeyError, TypeError) as exc:
                raise ReplayError(f"{path}:{lineno}: {exc}") from exc


def _sniff(text: str) -> str:
    for d in (",", "\t", ";", " "):
        if d in text:
            return d
    return ","


def write_edges(path, edges: Iterable[Edge]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("src,dst,timestamp\n")
        for e in edges:
            fh.write(f"{e.src},{e.dst},{e.timestamp:g}\n")
            n += 1
    return n


# -- synthetic tweet streams ---------------------------------------------------

def synth_tweets(n_records: int = 10_000, mean_tags: float = 2.5, selection_tag: str = "#onpc",
                 n_users: int = 2500, n_hashtags: int = 1000, duration: float = 4 * 3600.0,
                 start: float = 0.0, rng: RandomStream | int | None = None) -> list[dict]:
    """Tweet records shaped like a tag-selected capture.

    Every record carries ``selection_tag``; the other tags number
    ``Poisson(mean_tags - 1)`` and are drawn from Zipf-weighted pools of
    users and hashtags.  Timestamps are sorted uniform draws over
    ``[start, start + duration)``.
    """
    gen = as_stream(rng).generator
    users = [f"@u{i}" for i in range(n_users)]
    hashtags = [f"#h{i}" for i in range(n_hashtags)]
    pool = users + hashtags
    w = np.concatenate([1.0 / np.arange(1, n_users + 1), 1.0 / np.arange(1, n_hashtags + 1)])
    w /= w.sum()
    sender_w = 1.0 / np.arange(1, n_users + 1)
    sender_w /= sender_w.sum()
    times = np.sort(gen.uniform(start, start + duration, size=n_records))
    senders = gen.choice(n_users, size=n_records, p=sender_w)
    n_extra = gen.poisson(max(mean_tags - 1.0, 0.0), size=n_records)
    picks = gen.choice(len(pool), size=int(n_extra.sum()), p=w)
    out = []
    pos = 0
    for i in range(n_records):
        extra = [pool[j] for j in picks[pos:pos + n_extra[i]].tolist()]
        pos += n_extra[i]
        tags = [selection_tag] + extra
        order = gen.permutation(len(tags)).tolist()
        out.append({"sender": users[senders[i]], "tags": [tags[j] for j in order],
                    "timestamp": round(float(times[i]), 3)})
    return out


def write_tweets(path, records: Iterable[dict]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")
            n += 1
    return n
