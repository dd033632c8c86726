import json

import numpy as np
import pytest

from artifact.graphstream import Edge
from artifact.ingest import (FilterConfig, IngestCounters, ReplayError, TweetRecord, parse_time, read_edges,
                             replay, synth_tweets, tweet_to_edges, write_edges, write_tweets)


def test_parse_time_forms():
    assert parse_time(12) == 12.0
    assert parse_time("12.5") == 12.5
    assert parse_time("1970-01-01T00:01:00Z") == 60.0
    assert parse_time("1970-01-01T01:00:00+01:00") == 0.0
    with pytest.raises(ValueError):
        parse_time("yesterday")
    with pytest.raises(ValueError):
        parse_time(float("nan"))


def test_tweet_to_edges_example():
    r = TweetRecord("@y", ("#x", "@z"), 5.0)
    assert tweet_to_edges(r) == [Edge("@y", "#x", 5.0), Edge("@y", "@z", 5.0)]


def test_exclusion_case_folding_and_self_mentions():
    c = IngestCounters()
    r = TweetRecord("@Ann", ("#ONPC", "#Soft", "@ann", "@bob"), 1.0)
    out = tweet_to_edges(r, FilterConfig(frozenset({"#onpc"})), c)
    assert [e.dst for e in out] == ["#soft", "@bob"]
    assert all(e.src == "@ann" for e in out)
    assert (c.excluded, c.self_edges, c.edges) == (1, 1, 2)


def test_replay_counts_malformed_lines(tmp_path):
    p = tmp_path / "t.jsonl"
    p.write_text("\n".join([
        json.dumps({"sender": "a", "tags": ["#x"], "timestamp": 1}),
        "{not json",
        json.dumps({"sender": "b", "tags": "#x", "timestamp": 2}),
        json.dumps({"tags": ["#x"], "timestamp": 3}),
        json.dumps({"sender": "c", "tags": ["#y", "@a"], "timestamp": "1970-01-01T00:00:04Z"}),
        json.dumps({"sender": "d", "tags": ["#y"], "timestamp": 99}),
    ]) + "\n")
    c = IngestCounters()
    edges = list(replay(p, FilterConfig(time_to=50), c))
    assert edges == [Edge("@a", "#x", 1.0), Edge("@c", "#y", 4.0), Edge("@c", "@a", 4.0)]
    assert (c.records, c.malformed, c.out_of_range) == (3, 3, 1)
    assert [e.split(":")[1] for e in c.errors] == ["2", "3", "4"]


def test_replay_missing_file():
    with pytest.raises(ReplayError):
        list(replay("/nonexistent/tweets.jsonl"))


def test_edge_file_roundtrip(tmp_path):
    edges = [Edge("@a", "#x", 1.5), Edge("3", "4", 20.0)]
    p = tmp_path / "e.csv"
    assert write_edges(p, edges) == 2
    assert list(read_edges(p)) == edges
    j = tmp_path / "e.jsonl"
    j.write_text('{"src": "a", "dst": "b", "timestamp": 3}\n')
    assert list(read_edges(j)) == [Edge("a", "b", 3.0)]
    bad = tmp_path / "bad.csv"
    bad.write_text("src,dst,timestamp\na,b\n")
    with pytest.raises(ReplayError):
        list(read_edges(bad))


def test_synthetic_capture_shape(tmp_path):
    recs = synth_tweets(2000, 2.5, rng=4)
    assert all("#onpc" in r["tags"] for r in recs)
    mean_tags = np.mean([len(r["tags"]) for r in recs])
    assert abs(mean_tags - 2.5) < 0.1
    times = [r["timestamp"] for r in recs]
    assert times == sorted(times) and 0 <= times[0] and times[-1] < 4 * 3600
    p = tmp_path / "t.jsonl"
    write_tweets(p, recs)
    c = IngestCounters()
    n = sum(1 for _ in replay(p, FilterConfig(frozenset({"#onpc"})), c))
    assert n == c.edges
    assert c.excluded == 2000
