"""Command-line front end: ``qatopo <command> [options]``.

Commands: generate, metrics, embed, maxclique, sweep, report. Exit codes are
0 on success, 1 for usage errors, 2 for data errors and 3 when a sweep
finished but some rows failed.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, TextIO

from .embedding import EmbedParams, EmbeddingFailure, find_embedding
from .evaluation import (
    ResultsFormatError,
    dumps_results,
    max_embeddable_clique,
    normalize,
    read_results,
    results_csv,
    run_sweep,
    trend_summary,
)
from .graph import Graph, GraphError, dumps_edgelist, read_edgelist, topology_metrics
from .topology import GraphicalityError, QpuConfig, desk_configs, sweep_configs

WORKERS_ENV = "QATOPO_WORKERS"

COMMANDS = ("generate", "metrics", "embed", "maxclique", "sweep", "report")
REPORT_KINDS = ("fig2a", "fig2b", "summary")
TREND_FAMILIES = ("zephyr", "havel_hakimi")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ROWS = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command line; ``token`` is the offending argument when known."""

    def __init__(self, message: str, token: Optional[str] = None):
        super().__init__(message)
        self.token = token


@dataclass
class RunConfig:
    command: str
    output: Optional[str] = None
    graph: Optional[str] = None
    problem: Optional[str] = None
    qpu: Optional[str] = None
    family: Optional[str] = None
    family_params: dict = field(default_factory=dict)
    stats: bool = False
    embed: EmbedParams = field(default_factory=EmbedParams)
    attempts_per_n: int = 3
    scope: Optional[str] = None
    configs: List[str] = field(default_factory=list)
    checkpoint: Optional[str] = None
    csv_path: Optional[str] = None
    workers: int = 1
    output_format: str = "jsonl"
    results: Optional[str] = None
    kind: Optional[str] = None


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {env!r}", env) from None
        if value < 1:
            raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {env!r}", env)
        return value
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        match = re.search(r"'([^']*)'", message)
        raise UsageError(message, match.group(1) if match else None)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(text)
    return value


_positive.__name__ = "positive integer"


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qatopo", description="QPU topology generation, embedding and sweeps.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def embed_flags(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tries", type=_positive, default=16)
        p.add_argument("--rounds", type=_positive, default=32)
        p.add_argument("--penalty-base", type=float, default=10.0)
        p.add_argument("--timeout-ms", type=_positive, default=None)

    p = sub.add_parser("generate", help="write a hardware graph as an edge list")
    p.add_argument("--family", choices=("zephyr", "hh"), required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--deg", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.add_argument("--stats", action="store_true", help="also emit a JSON line of topology metrics")

    p = sub.add_parser("metrics", help="topology metrics of an edge-list file or QPU label")
    p.add_argument("--graph", required=True)
    p.add_argument("--out")

    p = sub.add_parser("embed", help="embed a problem graph into a QPU graph")
    p.add_argument("--problem", required=True, help="edge-list file or clique:N")
    # presence checked by hand so a bad --problem is reported first
    p.add_argument("--qpu", help="edge-list file or QPU label such as zephyr-m2-t1")
    p.add_argument("--out")
    embed_flags(p)

    p = sub.add_parser("maxclique", help="largest embeddable clique of one QPU graph")
    p.add_argument("--qpu", required=True)
    p.add_argument("--attempts-per-n", type=_positive, default=3)
    p.add_argument("--out")
    embed_flags(p)

    p = sub.add_parser("sweep", help="largest-clique search over a grid of QPU graphs")
    scope = p.add_mutually_exclusive_group()
    scope.add_argument("--desk", action="store_true", help="reduced grid (default)")
    scope.add_argument("--full", action="store_true", help="all 300 grid configurations")
    scope.add_argument("--config", action="append", help="explicit QPU label; repeatable")
    p.add_argument("--attempts-per-n", type=_positive, default=3)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--checkpoint")
    p.add_argument("--out")
    p.add_argument("--csv", dest="csv_path")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    embed_flags(p)

    p = sub.add_parser("report", help="plot-ready CSV or trend summary from sweep results")
    p.add_argument("--results", required=True)
    p.add_argument("--kind", choices=REPORT_KINDS, required=True)
    p.add_argument("--out")
    return parser


def _check_problem(spec: str) -> None:
    if spec.startswith("clique:"):
        try:
            size = int(spec[len("clique:"):])
        except ValueError:
            raise UsageError(f"bad clique size in {spec!r}", spec) from None
        if size < 1:
            raise UsageError(f"clique size must be >= 1, got {spec!r}", spec)


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Resolve a command line into a :class:`RunConfig`.

    Raises:
        UsageError: unknown flag, missing or malformed value; ``token``
            names the offending argument.
    """
    argv = list(argv)
    parser = _build_parser()
    if not argv:
        raise UsageError(f"missing command; expected one of {', '.join(COMMANDS)}")
    if argv[0] not in COMMANDS and not argv[0].startswith("-"):
        raise UsageError(f"unknown command {argv[0]!r}", argv[0])
    ns, extra = parser.parse_known_args(argv)
    if extra:
        raise UsageError(f"unrecognised argument {extra[0]!r}", extra[0])
    if ns.command is None:
        raise UsageError(f"missing command; expected one of {', '.join(COMMANDS)}")
    cfg = RunConfig(command=ns.command, output=getattr(ns, "out", None))

    if hasattr(ns, "seed"):
        if not 0 <= ns.seed < 2**64:
            raise UsageError(f"--seed must be in [0, 2**64), got {ns.seed}", str(ns.seed))
        try:
            cfg.embed = EmbedParams(
                max_tries=ns.tries,
                max_rounds=ns.rounds,
                seed=ns.seed,
                penalty_base=ns.penalty_base,
                timeout_ms=ns.timeout_ms,
            )
        except ValueError as exc:
            raise UsageError(str(exc)) from None

    if ns.command == "generate":
        cfg.stats = ns.stats
        if ns.family == "zephyr":
            needed, cfg.family = {"--m": ns.m, "--t": ns.t}, "zephyr"
            stray = {"--deg": ns.deg, "--n": ns.n}
        else:
            needed, cfg.family = {"--deg": ns.deg, "--n": ns.n}, "havel_hakimi"
            stray = {"--m": ns.m, "--t": ns.t}
        for flag, value in needed.items():
            if value is None:
                raise UsageError(f"generate --family {ns.family} needs {flag}", flag)
        for flag, value in stray.items():
            if value is not None:
                raise UsageError(f"{flag} does not apply to --family {ns.family}", flag)
        cfg.family_params = {k.lstrip("-"): v for k, v in needed.items()}
    elif ns.command == "metrics":
        cfg.graph = ns.graph
    elif ns.command == "embed":
        _check_problem(ns.problem)
        if ns.qpu is None:
            raise UsageError("embed needs --qpu", "--qpu")
        cfg.problem, cfg.qpu = ns.problem, ns.qpu
    elif ns.command == "maxclique":
        cfg.qpu, cfg.attempts_per_n = ns.qpu, ns.attempts_per_n
    elif ns.command == "sweep":
        cfg.attempts_per_n = ns.attempts_per_n
        cfg.workers = ns.workers if ns.workers is not None else default_workers()
        cfg.checkpoint, cfg.csv_path, cfg.output_format = ns.checkpoint, ns.csv_path, ns.format
        if ns.config:
            cfg.scope, cfg.configs = "custom", list(ns.config)
            for label in cfg.configs:
                try:
                    QpuConfig.from_label(label)
                except ValueError:
                    raise UsageError(f"unrecognised QPU label {label!r}", label) from None
        else:
            cfg.scope = "full" if ns.full else "desk"
    elif ns.command == "report":
        cfg.results, cfg.kind = ns.results, ns.kind

    for name in ("output", "checkpoint", "csv_path", "results", "graph"):
        value = getattr(cfg, name)
        if value is not None and not value:
            raise UsageError(f"empty path for {name}", value)
    return cfg


# -- command implementations ----------------------------------------------------


def _open_out(path: Optional[str]) -> TextIO:
    if path is None:
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="\n")


def _emit(path: Optional[str], text: str) -> None:
    fh = _open_out(path)
    try:
        fh.write(text)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _load_graph(spec: str) -> Graph:
    """An edge-list path, or a QPU label when no such file exists."""
    if os.path.exists(spec):
        return read_edgelist(spec)
    try:
        config = QpuConfig.from_label(spec)
    except ValueError:
        raise FileNotFoundError(f"{spec}: no such file, and not a QPU label") from None
    return config.build()


def _qpu_config(spec: str, g: Graph) -> QpuConfig:
    if os.path.exists(spec):
        return QpuConfig.custom(g.node_count)
    return QpuConfig.from_label(spec)


def _metrics_json(g: Graph) -> str:
    return json.dumps(topology_metrics(g).to_dict(), separators=(",", ":"))


def _cmd_generate(cfg: RunConfig) -> int:
    p = cfg.family_params
    config = QpuConfig.zephyr(p["m"], p["t"]) if cfg.family == "zephyr" else QpuConfig.havel_hakimi(p["deg"], p["n"])
    g = config.build()
    _emit(cfg.output, dumps_edgelist(g))
    if cfg.stats:
        # keep stdout a clean edge list when it carries the graph
        stream = sys.stdout if cfg.output is not None else sys.stderr
        stream.write(_metrics_json(g) + "\n")
    return EXIT_OK


def _cmd_metrics(cfg: RunConfig) -> int:
    _emit(cfg.output, _metrics_json(_load_graph(cfg.graph)) + "\n")
    return EXIT_OK


def _cmd_embed(cfg: RunConfig) -> int:
    if cfg.problem.startswith("clique:"):
        gp = Graph.complete(int(cfg.problem[len("clique:"):]))
    else:
        gp = read_edgelist(cfg.problem)
    gq = _load_graph(cfg.qpu)
    label = cfg.qpu if not os.path.exists(cfg.qpu) else ""
    emb = find_embedding(gp, gq, cfg.embed, qpu_label=label)
    _emit(cfg.output, emb.to_json() + "\n")
    return EXIT_OK


def _cmd_maxclique(cfg: RunConfig) -> int:
    gq = _load_graph(cfg.qpu)
    result = max_embeddable_clique(gq, cfg.embed, cfg.attempts_per_n, config=_qpu_config(cfg.qpu, gq))
    _emit(cfg.output, result.to_json() + "\n")
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig) -> int:
    if cfg.scope == "custom":
        configs = [QpuConfig.from_label(label) for label in cfg.configs]
    elif cfg.scope == "full":
        configs = sweep_configs()
    else:
        configs = desk_configs()
    results = run_sweep(
        configs, cfg.embed, cfg.attempts_per_n, workers=cfg.workers, checkpoint=cfg.checkpoint
    )
    _emit(cfg.output, results_csv(results) if cfg.output_format == "csv" else dumps_results(results))
    if cfg.csv_path:
        _emit(cfg.csv_path, results_csv(results))
    failed = [r for r in results if r.error is not None]
    for r in failed:
        sys.stderr.write(f"{r.label}: {r.error}\n")
    return EXIT_ROWS if failed else EXIT_OK


def _fmt(value: float) -> str:
    return repr(float(value))


def summary_report(results) -> str:
    """Per-family trend JSON line followed by a one-line verdict."""
    points = normalize(results)
    trends = {}
    for family in TREND_FAMILIES:
        try:
            trends[family] = trend_summary(points, family).to_dict()
        except ValueError as exc:
            trends[family] = {"family": family, "error": str(exc)}
    parts = []
    for family in TREND_FAMILIES:
        t = trends[family]
        if "error" in t:
            parts.append(f"{family} insufficient data")
        else:
            parts.append(
                f"{family} slope={_fmt(t['slope'])} r2={_fmt(t['r_squared'])} "
                f"mean_median_chain={_fmt(t['mean_median_chain'])}"
            )
    verdict = "verdict: " + "; ".join(parts)
    z, h = trends["zephyr"], trends["havel_hakimi"]
    if "error" not in z and "error" not in h:
        linear = "havel_hakimi" if h["r_squared"] >= z["r_squared"] else "zephyr"
        shorter = "havel_hakimi" if h["mean_median_chain"] <= z["mean_median_chain"] else "zephyr"
        verdict += f"; more linear: {linear}; shorter chains: {shorter}"
    return json.dumps(trends, separators=(",", ":")) + "\n" + verdict + "\n"


def figure_csv(results, kind: str) -> str:
    column = "y_norm" if kind == "fig2a" else "median_chain"
    lines = [f"x_norm,{column},family"]
    for p in normalize(results):
        value = p.y if kind == "fig2a" else p.median_chain
        lines.append(f"{_fmt(p.x)},{_fmt(value)},{p.family}")
    return "\n".join(lines) + "\n"


def _cmd_report(cfg: RunConfig) -> int:
    results = read_results(cfg.results)
    text = summary_report(results) if cfg.kind == "summary" else figure_csv(results, cfg.kind)
    _emit(cfg.output, text)
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "metrics": _cmd_metrics,
    "embed": _cmd_embed,
    "maxclique": _cmd_maxclique,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return _COMMANDS[cfg.command](cfg)
    except (GraphError, GraphicalityError, ResultsFormatError, EmbeddingFailure, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DATA
