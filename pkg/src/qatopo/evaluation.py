"""Largest-clique search, sweep orchestration and trend summaries.

Results are stored as JSON-lines, one row per QPU configuration, with a
fixed key order so that two runs with the same inputs are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .embedding import (
    ChainStats,
    EmbedParams,
    Embedding,
    EmbeddingFailure,
    chain_stats,
    derive_seed,
    find_embedding,
    verify_embedding,
)
from .graph import Graph, UndefinedMetricError, connected_components, modularity_partition, regularity
from .topology import QpuConfig

CSV_COLUMNS = (
    "family",
    "label",
    "nodes",
    "edges",
    "avg_degree",
    "regularity",
    "modularity",
    "max",
    "mean_chain",
    "median_chain",
    "mode_chain",
    "x_norm",
    "y_norm",
)


class ResultsFormatError(ValueError):
    """A results file could not be parsed; ``line`` is 1-based (0 for whole-file problems)."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


# -- records ----------------------------------------------------------------------


@dataclass(frozen=True)
class QpuRecord:
    config: QpuConfig
    node_count: int
    edge_count: int
    average_degree: float
    regularity: Optional[float]
    modularity: Optional[float]
    component_count: int

    @property
    def label(self) -> str:
        return self.config.label

    @property
    def family(self) -> str:
        return self.config.family

    @classmethod
    def from_graph(cls, config: QpuConfig, g: Graph) -> "QpuRecord":
        """Descriptors of ``g``; metrics undefined on an edgeless graph are None."""
        try:
            q = modularity_partition(g)[1]
            reg = regularity(g)
        except UndefinedMetricError:
            q = reg = None
        return cls(
            config=config,
            node_count=g.node_count,
            edge_count=g.edge_count,
            average_degree=2 * g.edge_count / g.node_count,
            regularity=reg,
            modularity=q,
            component_count=len(connected_components(g)),
        )

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "average_degree": self.average_degree,
            "regularity": self.regularity,
            "modularity": self.modularity,
            "component_count": self.component_count,
        }


@dataclass(frozen=True)
class Attempt:
    n: int
    ok: bool
    tries_used: int


@dataclass
class MaxCliqueResult:
    """One sweep row. ``error`` is set (and ``max`` is None) when the row failed."""

    config: QpuConfig
    qpu: Optional[QpuRecord] = None
    max: Optional[int] = None
    stats: Optional[ChainStats] = None
    attempts_log: List[Attempt] = field(default_factory=list)
    witness: Optional[Embedding] = None
    error: Optional[str] = None

    @property
    def label(self) -> str:
        return self.config.label

    @property
    def family(self) -> str:
        return self.config.family

    def to_dict(self) -> dict:
        return {
            "label": self.config.label,
            "family": self.config.family,
            "params": self.config.params_dict(),
            "qpu": None if self.qpu is None else self.qpu.to_dict(),
            "max": self.max,
            "stats": None if self.stats is None else self.stats.to_dict(),
            "attempts_log": [[a.n, a.ok, a.tries_used] for a in self.attempts_log],
            "witness": None if self.witness is None else [list(c) for c in self.witness.chains],
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MaxCliqueResult":
        config = QpuConfig.from_label(data["label"])
        qpu = None
        if data.get("qpu") is not None:
            qpu = QpuRecord(config=config, **data["qpu"])
        witness = None
        if data.get("witness") is not None:
            witness = Embedding([tuple(c) for c in data["witness"]], config.label)
        stats = chain_stats(witness) if witness is not None else None
        return cls(
            config=config,
            qpu=qpu,
            max=data.get("max"),
            stats=stats,
            attempts_log=[Attempt(int(n), bool(ok), int(t)) for n, ok, t in data.get("attempts_log", [])],
            witness=witness,
            error=data.get("error"),
        )


# -- largest embeddable clique --------------------------------------------------


def _probe(gq: Graph, n: int, ep: EmbedParams, attempts_per_n: int, label: str, log: List[Attempt]):
    kn = Graph.complete(n)
    for attempt in range(attempts_per_n):
        params = replace(ep, seed=derive_seed(ep.seed, n, attempt))
        try:
            emb = find_embedding(kn, gq, params, qpu_label=label)
        except EmbeddingFailure as exc:
            log.append(Attempt(n, False, exc.tries_used))
            continue
        if verify_embedding(kn, gq, emb).is_valid:
            log.append(Attempt(n, True, emb.tries_used))
            return emb
        log.append(Attempt(n, False, emb.tries_used))
    return None


def max_embeddable_clique(
    gq: Graph,
    ep: EmbedParams = EmbedParams(),
    attempts_per_n: int = 3,
    *,
    config: Optional[QpuConfig] = None,
    record: Optional[QpuRecord] = None,
) -> MaxCliqueResult:
    """Largest ``n`` for which ``K_n`` was embedded into ``gq``.

    Sizes are probed by doubling from 2 until a size fails, then by bisection
    between the largest success and the smallest failure. Each size gets up
    to ``attempts_per_n`` independent runs with seeds derived from
    ``ep.seed``, the size and the attempt index. Since the heuristic is
    incomplete the result is a lower bound, and a success at ``n`` is taken
    as a success for every smaller size.

    Args:
        gq: Host graph with at least one node.
        ep: Heuristic parameters; only ``ep.seed`` is replaced per attempt.
        attempts_per_n: Independent runs allowed per probed size.
        config: Host configuration; defaults to a ``custom-n<N>`` label.
        record: Precomputed descriptors of ``gq``; computed when omitted.

    Returns:
        A result row holding the witness embedding of ``K_max`` and the log of
        every ``(n, ok, tries_used)`` attempt.
    """
    if gq.node_count < 1:
        raise ValueError("host graph must have at least one node")
    if attempts_per_n < 1:
        raise ValueError("attempts_per_n must be positive")
    if config is None:
        config = QpuConfig.custom(gq.node_count)
    if record is None:
        record = QpuRecord.from_graph(config, gq)
    label = config.label
    top = gq.node_count
    log: List[Attempt] = []
    best, witness = 1, Embedding([(0,)], label)
    failed: Optional[int] = None

    n = 2
    while n <= top:
        emb = _probe(gq, n, ep, attempts_per_n, label, log)
        if emb is None:
            failed = n
            break
        best, witness = n, emb
        if n == top:
            break
        n = min(2 * n, top)
    if failed is not None:
        lo, hi = best, failed
        while hi - lo > 1:
            mid = (lo + hi) // 2
            emb = _probe(gq, mid, ep, attempts_per_n, label, log)
            if emb is None:
                hi = mid
            else:
                lo, best, witness = mid, mid, emb
    return MaxCliqueResult(
        config=config,
        qpu=record,
        max=best,
        stats=chain_stats(witness),
        attempts_log=log,
        witness=witness,
    )


# -- sweeps -----------------------------------------------------------------------


def _run_row(config: QpuConfig, ep: EmbedParams, attempts_per_n: int) -> MaxCliqueResult:
    try:
        gq = config.build()
        return max_embeddable_clique(gq, ep, attempts_per_n, config=config)
    except Exception as exc:  # a broken row must not take the sweep down
        return MaxCliqueResult(config=config, error=f"{type(exc).__name__}: {exc}")


def _row_task(args) -> str:
    config, ep, attempts_per_n = args
    return _run_row(config, ep, attempts_per_n).to_json()


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_checkpoint(path: str) -> Dict[str, str]:
    done: Dict[str, str] = {}
    if not os.path.exists(path):
        return done
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                done[json.loads(line)["label"]] = line
            except (ValueError, KeyError):
                # a torn line can only come from outside tampering; recompute that row
                continue
    return done


def reverify(result: MaxCliqueResult, gq: Optional[Graph] = None) -> bool:
    """Re-check a row's witness against a freshly generated host graph."""
    if result.error is not None:
        return True
    if result.witness is None or result.max is None:
        return False
    gq = result.config.build() if gq is None else gq
    return verify_embedding(Graph.complete(result.max), gq, result.witness).is_valid


def run_sweep(
    configs: Sequence[QpuConfig],
    ep: EmbedParams = EmbedParams(),
    attempts_per_n: int = 3,
    *,
    workers: int = 1,
    checkpoint: Optional[Union[str, os.PathLike]] = None,
    verify_at_end: bool = True,
) -> List[MaxCliqueResult]:
    """Run the clique search on every configuration.

    Rows are independent and run on a pool of ``workers`` processes, but the
    returned list follows ``configs`` order. When ``checkpoint`` is given,
    every finished row is appended to that JSON-lines file (rewritten
    atomically), and rows already present there are reused instead of
    recomputed. Failures, such as a non-graphical degree sequence, land in
    the row's ``error`` field.
    """
    if not configs:
        raise ValueError("no configurations to sweep")
    if workers < 1:
        raise ValueError("workers must be positive")
    labels = [c.label for c in configs]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate configurations in sweep")
    ckpt = None if checkpoint is None else os.fspath(checkpoint)
    done = _load_checkpoint(ckpt) if ckpt else {}
    rows: Dict[str, str] = {lab: done[lab] for lab in labels if lab in done}
    pending = [c for c in configs if c.label not in rows]

    def finish(label: str, line: str) -> None:
        rows[label] = line
        if ckpt:
            _atomic_write(ckpt, "".join(rows[lab] + "\n" for lab in labels if lab in rows))

    if workers == 1 or len(pending) <= 1:
        for config in pending:
            finish(config.label, _row_task((config, ep, attempts_per_n)))
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(pending))) as pool:
            futures = {pool.submit(_row_task, (c, ep, attempts_per_n)): c.label for c in pending}
            for fut in as_completed(futures):
                finish(futures[fut], fut.result())

    results = [MaxCliqueResult.from_dict(json.loads(rows[lab])) for lab in labels]
    if verify_at_end:
        for r in results:
            if not reverify(r):
                r.error = "witness embedding failed re-verification"
    return results


# -- serialisation ----------------------------------------------------------------


def dumps_results(results: Iterable[MaxCliqueResult]) -> str:
    return "".join(r.to_json() + "\n" for r in results)


def write_results(results: Iterable[MaxCliqueResult], path: Union[str, os.PathLike]) -> None:
    _atomic_write(os.fspath(path), dumps_results(results))


def loads_results(text: str) -> List[MaxCliqueResult]:
    results = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            results.append(MaxCliqueResult.from_dict(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise ResultsFormatError(lineno, f"malformed result row ({exc})") from None
    if not results:
        raise ResultsFormatError(0, "results file is empty")
    return results


def read_results(path: Union[str, os.PathLike]) -> List[MaxCliqueResult]:
    with open(path, encoding="utf-8") as fh:
        return loads_results(fh.read())


# -- normalisation and trends ----------------------------------------------------


@dataclass(frozen=True)
class NormalizedPoint:
    family: str
    label: str
    x: float
    y: float
    median_chain: float
    average_degree: float


def normalize(results: Iterable[MaxCliqueResult]) -> List[NormalizedPoint]:
    """Divide average degree and ``max`` by the qubit count; rows with errors are skipped."""
    points = []
    for r in results:
        if r.error is not None or r.qpu is None or r.max is None:
            continue
        n = r.qpu.node_count
        if n <= 0:
            raise ValueError(f"{r.label}: node_count must be positive")
        points.append(
            NormalizedPoint(
                family=r.family,
                label=r.label,
                x=r.qpu.average_degree / n,
                y=r.max / n,
                median_chain=float(r.stats.median),
                average_degree=r.qpu.average_degree,
            )
        )
    return points


@dataclass(frozen=True)
class TrendSummary:
    family: str
    count: int
    slope: float
    intercept: float
    r_squared: float
    quadratic_coefficient: float
    concavity_indicator: int
    mean_median_chain: float

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "count": self.count,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "quadratic_coefficient": self.quadratic_coefficient,
            "concavity_indicator": self.concavity_indicator,
            "mean_median_chain": self.mean_median_chain,
        }


def trend_summary(points: Iterable[NormalizedPoint], family: str) -> TrendSummary:
    """Least-squares line and parabola of ``y`` on ``x`` for one family.

    ``concavity_indicator`` is the sign of the quadratic coefficient, with
    coefficients whose effect over the sampled x range is at rounding level
    reported as 0.

    Raises:
        ValueError: fewer than three points, or fewer than three distinct x.
    """
    pts = [p for p in points if p.family == family]
    if len(pts) < 3:
        raise ValueError(f"trend of {family!r} needs at least 3 points, got {len(pts)}")
    x = np.array([p.x for p in pts], dtype=float)
    y = np.array([p.y for p in pts], dtype=float)
    if len(np.unique(x)) < 3:
        raise ValueError(f"trend of {family!r} needs at least 3 distinct x values")
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    ss_res = float(residual @ residual)
    centred = y - y.mean()
    ss_tot = float(centred @ centred)
    scale = max(float(np.abs(y).max()), 1e-300)
    if ss_tot <= (1e-12 * scale) ** 2 * len(y):
        r_squared = 1.0
    else:
        r_squared = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    quad = float(np.polyfit(x, y, 2)[0])
    span = float(x.max() - x.min())
    if abs(quad) * span * span <= 1e-9 * scale:
        concavity = 0
    else:
        concavity = 1 if quad > 0 else -1
    return TrendSummary(
        family=family,
        count=len(pts),
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        quadratic_coefficient=quad,
        concavity_indicator=concavity,
        mean_median_chain=float(np.mean([p.median_chain for p in pts])),
    )


def _num(value: Optional[float]) -> str:
    return "" if value is None else repr(value)


def results_csv(results: Iterable[MaxCliqueResult]) -> str:
    """CSV export with floats in shortest round-trip form; error rows leave blanks."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        q, s = r.qpu, r.stats
        ok = r.error is None and q is not None and r.max is not None
        writer.writerow(
            [
                r.family,
                r.label,
                q.node_count if q else "",
                q.edge_count if q else "",
                repr(q.average_degree) if q else "",
                _num(q.regularity) if q else "",
                _num(q.modularity) if q else "",
                r.max if ok else "",
                repr(float(s.mean)) if ok else "",
                repr(float(s.median)) if ok else "",
                s.mode if ok else "",
                repr(q.average_degree / q.node_count) if ok else "",
                repr(r.max / q.node_count) if ok else "",
            ]
        )
    return buf.getvalue()
