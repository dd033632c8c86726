"""``artifact`` command line: generate | olap | detect | integrate | experiment.

Parameters resolve as flags > ``--config`` JSON file > built-in defaults.
The config file may hold top-level keys and per-command sections, e.g.
``{"seed": 3, "detect": {"k": 200}}``.  Every run writes ``run_config.json``
with the resolved values next to its outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import experiments
from .genmodels import (ConcentrationError, DegreeDistribution, GenerationError, gen_communities,
                        gen_configuration, gen_gnp, gen_pa, power_law_delta)
from .graphstream import DCConfig, Edge, EdgeStreamState, write_results
from .ingest import FilterConfig, IngestCounters, ReplayError, parse_time, read_edges, replay, synth_tweets, write_edges, write_tweets
from .integrate import StreamSummary, UndefinedCorrelationError, correlation_matrix, integrate, write_integration, write_matrix
from .olap import (OTHER, DimensionSpec, EmptyInputError, SchemaError, estimate_density, exact_density,
                   read_tuples, required_sample_size, scan_values)
from .reservoir import InvalidMeasureError, OrderingError
from .rng import RandomStream

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ACCEPTANCE = 4
EXIT_DATA = 5


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "seed": 0,
    "out": "out",
    "generate": {"model": "ddelta2", "n": 1000, "p": 0.01, "m": 2, "delta": None, "edges_per_community": 10_000,
                 "communities": 2, "bridge_fraction": 0.01, "concentrated": False, "span": 4 * 3600.0,
                 "records": 10_000, "mean_tags": 2.5, "selection_tag": "#onpc"},
    "olap": {"tuples": None, "dim": None, "measure": None, "k": None, "epsilon": None, "delta": None,
             "cardinality": None, "values": None, "other": False, "where": [], "delimiter": ",",
             "fixture": None},
    "detect": {"edges": None, "tweets": None, "exclude_tag": [], "time_from": None, "time_to": None,
               **asdict(DCConfig())},
    "integrate": {"summaries": [], "matrix": None},
    "experiment": {"name": None, "seeds": None, "trials": None, "runs": None, "workers": 1},
}


# -- argument parsing ----------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--seed", type=int, default=S, help="root seed (default 0)")
    p.add_argument("--out", default=S, help="output directory (default ./out)")
    p.add_argument("--config", default=S, help="JSON file with parameter values")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random graph or tweet file")
    _common(g)
    g.add_argument("--model", choices=["gnp", "pa", "config", "ddelta2", "tweets"], default=S)
    g.add_argument("--n", type=int, default=S)
    g.add_argument("--p", type=float, default=S)
    g.add_argument("--m", type=int, default=S)
    g.add_argument("--delta", default=S, help="comma-separated node counts per degree, starting at degree 1")
    g.add_argument("--edges-per-community", dest="edges_per_community", type=int, default=S)
    g.add_argument("--communities", type=int, default=S)
    g.add_argument("--bridge-fraction", dest="bridge_fraction", type=float, default=S)
    g.add_argument("--concentrated", action="store_true", default=S)
    g.add_argument("--span", type=float, default=S, help="seconds spanned by the edge timestamps")
    g.add_argument("--records", type=int, default=S)
    g.add_argument("--mean-tags", dest="mean_tags", type=float, default=S)
    g.add_argument("--selection-tag", dest="selection_tag", default=S)

    o = sub.add_parser("olap", help="exact and sampled density of one dimension")
    _common(o)
    o.add_argument("--tuples", default=S)
    o.add_argument("--fixture", choices=["figure2"], default=S, help="use a built-in tuple file")
    o.add_argument("--dim", default=S, help="dimension column; join columns with * for a composite")
    o.add_argument("--measure", default=S)
    o.add_argument("--k", type=int, default=S)
    o.add_argument("--epsilon", type=float, default=S)
    o.add_argument("--delta", type=float, default=S)
    o.add_argument("--cardinality", type=int, default=S)
    o.add_argument("--values", default=S, help="comma-separated dimension values (default: scan the file)")
    o.add_argument("--other", action="store_true", default=S, help="collect unknown values under " + OTHER)
    o.add_argument("--where", action="append", default=S, metavar="COL=VALUE")
    o.add_argument("--delimiter", default=S)

    d = sub.add_parser("detect", help="dynamic community detection over an edge stream")
    _common(d)
    d.add_argument("--edges", default=S)
    d.add_argument("--tweets", default=S)
    d.add_argument("--exclude-tag", dest="exclude_tag", action="append", default=S)
    d.add_argument("--from", dest="time_from", default=S)
    d.add_argument("--to", dest="time_to", default=S)
    d.add_argument("--k", type=int, default=S)
    d.add_argument("--h", type=int, default=S)
    d.add_argument("--c", type=int, default=S)
    d.add_argument("--tau", type=float, default=S)
    d.add_argument("--window", dest="window_length", type=float, default=S)
    d.add_argument("--window-mode", dest="window_mode", choices=["exact", "compat"], default=S)
    d.add_argument("--late", choices=["strict", "clamp"], default=S)

    i = sub.add_parser("integrate", help="correlate finished detection runs")
    _common(i)
    i.add_argument("summaries", nargs="*", default=S, help="output directories of detect")
    i.add_argument("--matrix", choices=["rho_v", "rho_c"], default=S)

    e = sub.add_parser("experiment", help="run a Monte Carlo suite")
    _common(e)
    e.add_argument("name", nargs="?", default=S, choices=sorted(experiments.EXPERIMENTS))
    e.add_argument("--seeds", type=int, default=S)
    e.add_argument("--trials", type=int, default=S)
    e.add_argument("--runs", type=int, default=S)
    e.add_argument("--workers", type=int, default=S)
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, the config file section and explicit flags."""
    cmd = args.command
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    file_cfg: dict = {}
    path = getattr(args, "config", None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"config {path} must hold an object")
    allowed = set(DEFAULTS[cmd]) | {"seed", "out"}
    merged = {"seed": DEFAULTS["seed"], "out": DEFAULTS["out"], **DEFAULTS[cmd]}
    layer = {k: v for k, v in file_cfg.items() if k in ("seed", "out")}
    section = file_cfg.get(cmd, {})
    if not isinstance(section, dict):
        raise ConfigError(f"config section {cmd!r} must be an object")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown {cmd} config keys: {', '.join(sorted(unknown))}")
    layer.update(section)
    merged.update(layer)
    merged.update(flags)
    merged["command"] = cmd
    return merged


def _write_run_config(out: Path, cfg: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "run_config.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(cfg, fh, sort_keys=True, indent=2, default=str)
        fh.write("\n")


# -- commands ------------------------------------------------------------------

def _parse_delta(text) -> DegreeDistribution:
    if isinstance(text, (list, tuple)):
        counts = [int(x) for x in text]
    else:
        try:
            counts = [int(x) for x in str(text).split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"--delta must be comma-separated integers, got {text!r}") from None
    try:
        return DegreeDistribution(tuple(counts))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_generate(cfg: dict) -> int:
    out = Path(cfg["out"])
    root = RandomStream(cfg["seed"])
    g_rng, o_rng = root.spawn(2)
    model = cfg["model"]
    _write_run_config(out, cfg)
    if model == "tweets":
        n = write_tweets(out / "tweets.jsonl", synth_tweets(cfg["records"], cfg["mean_tags"],
                                                           cfg["selection_tag"], rng=g_rng))
        print(f"wrote {n} tweet records to {out / 'tweets.jsonl'}")
        return EXIT_OK
    if model == "gnp":
        g = gen_gnp(cfg["n"], cfg["p"], g_rng)
    elif model == "pa":
        g = gen_pa(cfg["n"], cfg["m"], g_rng)
    else:
        delta = _parse_delta(cfg["delta"]) if cfg["delta"] else power_law_delta(cfg["edges_per_community"])
        if model == "config":
            g = gen_configuration(delta, g_rng, concentrated=bool(cfg["concentrated"]))
        else:
            g = gen_communities(delta, cfg["communities"], cfg["bridge_fraction"], g_rng)
    order = o_rng.generator.permutation(g.m) if g.m else np.empty(0, dtype=np.int64)
    dt = cfg["span"] / g.m if g.m else 0.0
    edges = (Edge(int(a), int(b), round(i * dt, 6)) for i, (a, b) in enumerate(g.edges[order].tolist()))
    n_edges = write_edges(out / "edges.csv", edges)
    meta = {"model": model, "nodes": g.n, "edges": g.m, "bridges": g.bridges,
            "planted": [sorted(int(v) for v in S) for S in g.planted],
            "report": asdict(g.report) if g.report is not None else None}
    with open(out / "graph.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True)
        fh.write("\n")
    print(f"wrote {g.n} nodes, {n_edges} edges, {len(g.planted)} planted communities to {out}")
    return EXIT_OK


def cmd_olap(cfg: dict) -> int:
    out = Path(cfg["out"])
    eps, dlt = cfg["epsilon"], cfg["delta"]
    if (eps is None) != (dlt is None):
        raise ConfigError("--epsilon and --delta go together")
    path = cfg["tuples"]
    if cfg["fixture"] == "figure2":
        out.mkdir(parents=True, exist_ok=True)
        path = out / "figure2.csv"
        experiments.write_figure2_fixture(path)
        cfg = {**cfg, "dim": cfg["dim"] or "channel", "measure": cfg["measure"] or "sa",
               "values": cfg["values"] or "CNN,PBS"}
        if cfg["k"] is None and eps is None:
            cfg["k"] = 100
    if path is None:
        if eps is None or cfg["cardinality"] is None:
            raise ConfigError("olap needs --tuples, or --epsilon, --delta and --cardinality")
        k = required_sample_size(cfg["cardinality"], eps, dlt)
        _write_run_config(out, {**cfg, "k": k})
        print(f"k = {k}")
        return EXIT_OK
    if not cfg["dim"] or not cfg["measure"]:
        raise ConfigError("olap needs --dim and --measure")
    delim = cfg["delimiter"]
    values = (tuple(v for v in str(cfg["values"]).split(",")) if cfg["values"]
              else scan_values(path, cfg["dim"], delim))
    dim = DimensionSpec(cfg["dim"], values, collect_other=bool(cfg["other"]))
    if eps is not None:
        k = required_sample_size(cfg["cardinality"] or dim.cardinality, eps, dlt)
    elif cfg["k"] is not None:
        k = cfg["k"]
    else:
        raise ConfigError("olap needs --k or --epsilon with --delta")
    where = {}
    for clause in cfg["where"] or []:
        col, sep, val = str(clause).partition("=")
        if not sep:
            raise ConfigError(f"--where expects COL=VALUE, got {clause!r}")
        where[col] = val
    pred = (lambda t: all(t.dims.get(c) == v for c, v in where.items())) if where else None
    cols = None if where else dim.columns
    stream = list(read_tuples(path, cfg["measure"], cols, delim))
    exact = exact_density([t for t in stream if pred is None or pred(t)], dim)
    est = estimate_density(stream, dim, k, RandomStream(cfg["seed"]), where=pred)
    _write_run_config(out, {**cfg, "k": k, "tuples": str(path)})
    with open(out / "density.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for kind, vec in (("exact", exact), ("estimate", est)):
            for r in vec.records():
                fh.write(json.dumps({"kind": kind, **{a: _plain(b) for a, b in r.items()}}, sort_keys=True) + "\n")
    print(f"k = {k}")
    for v in dim.keys():
        print(f"{_plain(v)}: exact {exact[v]:.4f} estimate {est[v]:.4f}")
    return EXIT_OK


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def cmd_detect(cfg: dict) -> int:
    out = Path(cfg["out"])
    try:
        dc = DCConfig(**{f: cfg[f] for f in asdict(DCConfig())})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if bool(cfg["edges"]) == bool(cfg["tweets"]):
        raise ConfigError("detect needs exactly one of --edges or --tweets")
    counters = IngestCounters()
    if cfg["tweets"]:
        try:
            t0 = parse_time(cfg["time_from"]) if cfg["time_from"] is not None else None
            t1 = parse_time(cfg["time_to"]) if cfg["time_to"] is not None else None
        except ValueError as exc:
            raise ConfigError(f"bad time bound: {exc}") from exc
        edges = replay(cfg["tweets"], FilterConfig(frozenset(cfg["exclude_tag"] or ()), t0, t1), counters)
    else:
        edges = read_edges(cfg["edges"])
    state = EdgeStreamState(dc, RandomStream(cfg["seed"]))
    for e in edges:
        state.ingest_edge(e)
    result = state.finalize()
    write_results(result, out, dc, {"seed": cfg["seed"]})
    _write_run_config(out, cfg)
    if cfg["tweets"]:
        with open(out / "ingest.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(counters), fh, sort_keys=True, indent=2)
            fh.write("\n")
        for msg in counters.errors[:10]:
            print(f"skipped {msg}", file=sys.stderr)
    print(f"{result.counters.accepted} edges, {len(result.registry)} nodes, {len(result.snapshots)} snapshots, "
          f"{len(result.global_components)} global components")
    return EXIT_OK


def cmd_integrate(cfg: dict) -> int:
    out = Path(cfg["out"])
    dirs = list(cfg["summaries"] or [])
    if cfg["matrix"] is None and len(dirs) != 2:
        raise ConfigError("integrate needs two summary directories, or --matrix with two or more")
    if len(dirs) < 2:
        raise ConfigError("integrate needs at least two summary directories")
    sums = [StreamSummary.load(d) for d in dirs]
    _write_run_config(out, cfg)
    if cfg["matrix"]:
        names = [Path(d).name or str(d) for d in dirs]
        write_matrix(names, correlation_matrix(sums, cfg["matrix"]), out / f"{cfg['matrix']}_matrix.csv")
        print(f"wrote {out / (cfg['matrix'] + '_matrix.csv')}")
        return EXIT_OK
    res = integrate(*sums)
    write_integration(res, out / "integration.json")
    print(f"rho_v = {res.rho_v:.4f}  rho_c = {res.rho_c:.4f}  common nodes = {len(res.common_nodes)}")
    return EXIT_OK


def cmd_experiment(cfg: dict) -> int:
    name = cfg["name"]
    if name not in experiments.EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; choose from {', '.join(sorted(experiments.EXPERIMENTS))}")
    out = Path(cfg["out"])
    _write_run_config(out, cfg)
    kw: dict = {"seed": cfg["seed"]}
    if name == "lemma1" and cfg["trials"]:
        kw["trials"] = cfg["trials"]
    if name == "theorem1" and cfg["runs"]:
        kw["runs"] = cfg["runs"]
    if name == "theorem2":
        if cfg["seeds"]:
            kw["seeds"] = cfg["seeds"]
        kw["workers"] = cfg["workers"] or 1
        kw["out_dir"] = out / "runs"
        (out / "runs").mkdir(parents=True, exist_ok=True)
    if name in ("bookkeeping", "split-reservoir"):
        kw["out_dir"] = out
    rep = experiments.EXPERIMENTS[name](**kw)
    with open(out / f"{name}_report.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rep.to_json() + "\n")
    for line in rep.lines():
        print(line)
    return EXIT_OK if rep.passed else EXIT_ACCEPTANCE


COMMANDS = {"generate": cmd_generate, "olap": cmd_olap, "detect": cmd_detect,
            "integrate": cmd_integrate, "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GenerationError, ConcentrationError) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ReplayError, SchemaError, EmptyInputError, InvalidMeasureError, OrderingError,
            UndefinedCorrelationError, ValueError) as exc:
        if isinstance(exc, ReplayError) and "cannot open" in str(exc):
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
