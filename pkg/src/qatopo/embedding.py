"""Minor embedding of a problem graph into a hardware graph.

A logical vertex is represented by a *chain*: a connected set of host
nodes. :func:`find_embedding` is a randomized chain router with restarts:
chains are placed along overlap-penalised cheapest paths, then torn out and
re-routed one at a time until no host node is shared.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ._routing import route_chain
from .graph import Graph, connected_components

# weights are summed over up to a few hundred paths, so keep them far from overflow
_MAX_LOG_PENALTY = 200.0


class EmbeddingFailure(Exception):
    """Raised when no embedding was produced.

    Attributes:
        reason: ``"impossible"``, ``"exhausted"`` or ``"timeout"``.
        tries_used: number of restarts consumed before giving up.
    """

    def __init__(self, reason: str, message: str = "", tries_used: int = 0):
        super().__init__(message or reason)
        self.reason = reason
        self.tries_used = tries_used


@dataclass(frozen=True)
class EmbedParams:
    max_tries: int = 16
    max_rounds: int = 32
    seed: int = 0
    penalty_base: float = 10.0
    # the penalty base is multiplied by this after every refinement round
    penalty_growth: float = 1.5
    timeout_ms: Optional[int] = None
    # give up a try after this many refinement rounds without less overuse
    patience: Optional[int] = 8
    trim_chains: bool = True

    def __post_init__(self):
        if self.max_tries < 1 or self.max_rounds < 1:
            raise ValueError("max_tries and max_rounds must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.penalty_base > 1:
            raise ValueError(f"penalty_base must exceed 1, got {self.penalty_base}")
        if not self.penalty_growth >= 1:
            raise ValueError(f"penalty_growth must be at least 1, got {self.penalty_growth}")
        if self.timeout_ms is not None and self.timeout_ms < 1:
            raise ValueError("timeout_ms must be positive")
        if self.patience is not None and self.patience < 1:
            raise ValueError("patience must be positive")


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of ints/strings (platform independent)."""
    digest = hashlib.blake2b(repr(parts).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass
class Embedding:
    """Chains indexed by logical vertex id; each chain is an ascending tuple of host ids."""

    chains: List[Tuple[int, ...]]
    qpu_label: str = ""
    tries_used: int = field(default=0, compare=False)

    @property
    def problem_size(self) -> int:
        return len(self.chains)

    def to_dict(self) -> dict:
        return {
            "problem_size": self.problem_size,
            "qpu_label": self.qpu_label,
            "chains": [list(c) for c in self.chains],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Embedding":
        chains = [tuple(sorted(int(v) for v in c)) for c in data["chains"]]
        if data.get("problem_size", len(chains)) != len(chains):
            raise ValueError("problem_size does not match the number of chains")
        return cls(chains, data.get("qpu_label", ""))

    @classmethod
    def from_json(cls, text: str) -> "Embedding":
        return cls.from_dict(json.loads(text))


# -- heuristic -------------------------------------------------------------------


def impossibility_certificate(gp: Graph, gq: Graph) -> Optional[str]:
    """A cheap proof that ``gp`` is not a minor of ``gq``, if one applies."""
    if gp.node_count > gq.node_count:
        return f"problem has {gp.node_count} vertices, host only {gq.node_count}"
    if gp.edge_count > 0 and gq.edge_count == 0:
        return "problem has edges but host has none"
    if gp.edge_count > gq.edge_count:
        return f"problem has {gp.edge_count} edges, host only {gq.edge_count}"
    # deleting or contracting an edge never raises the number of independent cycles
    rank_p, rank_q = circuit_rank(gp), circuit_rank(gq)
    if rank_p > rank_q:
        return f"problem has circuit rank {rank_p}, host only {rank_q}"
    return None


def circuit_rank(g: Graph) -> int:
    """Number of independent cycles: ``edges - nodes + components``."""
    return g.edge_count - g.node_count + len(connected_components(g))


class _Router:
    def __init__(self, gp: Graph, gq: Graph, params: EmbedParams, deadline: Optional[float]):
        self.gp = gp
        self.gq = gq
        self.params = params
        self.deadline = deadline
        self.indptr, self.indices = gq.csr()
        self._set_base(params.penalty_base)

    def _set_base(self, base: float) -> None:
        exponents = np.arange(self.gp.node_count + 2, dtype=float)
        self.penalty = np.power(10.0, np.minimum(exponents * np.log10(base), _MAX_LOG_PENALTY))

    def _check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise EmbeddingFailure("timeout", "embedding timed out")

    def _route(self, x: int, chains, usage, rng: random.Random) -> Optional[np.ndarray]:
        weight = self.penalty[usage]
        placed = []
        for y in self.gp.neighbors(x):
            c = chains[y]
            if c is None:
                continue
            # aim for the part of a neighbour chain nobody else holds; touching
            # a shared node would not survive that node being given up later
            own = c[usage[c] == 1]
            placed.append(own if len(own) else c)
        if not placed:
            candidates = np.flatnonzero(weight == weight.min())
            return np.array([candidates[rng.randrange(len(candidates))]], dtype=np.int64)
        src_ptr = np.zeros(len(placed) + 1, dtype=np.int64)
        np.cumsum([len(c) for c in placed], out=src_ptr[1:])
        src_nodes = np.concatenate(placed)
        chain, cost = route_chain(self.indptr, self.indices, weight, src_ptr, src_nodes)
        if not np.isfinite(cost):
            return None
        return chain

    @staticmethod
    def _overuse(usage: np.ndarray) -> int:
        return int(np.maximum(usage - 1, 0).sum())

    def attempt(self, rng: random.Random) -> Optional[List[np.ndarray]]:
        k = self.gp.node_count
        self._set_base(self.params.penalty_base)
        usage = np.zeros(self.gq.node_count, dtype=np.int64)
        chains: List[Optional[np.ndarray]] = [None] * k
        order = list(range(k))
        rng.shuffle(order)
        for x in order:
            self._check_time()
            chain = self._route(x, chains, usage, rng)
            if chain is None:
                return None
            chains[x] = chain
            usage[chain] += 1
        best = self._overuse(usage)
        if best == 0:
            return chains
        stale = 0
        for r in range(self.params.max_rounds):
            # escalate overlap cost so long detours eventually beat sharing
            self._set_base(self.params.penalty_base * self.params.penalty_growth ** (r + 1))
            rng.shuffle(order)
            for x in order:
                self._check_time()
                usage[chains[x]] -= 1
                chain = self._route(x, chains, usage, rng)
                if chain is None:
                    return None
                chains[x] = chain
                usage[chain] += 1
                # every pair stays adjacent-or-overlapping, so no overlap means done
                if not (usage > 1).any():
                    return chains
            shared = self._overuse(usage)
            if shared < best:
                best, stale = shared, 0
            else:
                stale += 1
                if self.params.patience is not None and stale >= self.params.patience:
                    return None
        return None


def _trim(gp: Graph, gq: Graph, chains: List[List[int]]) -> None:
    """Drop host nodes whose removal keeps every chain connected and every logical edge realised."""
    owner = [-1] * gq.node_count
    for x, c in enumerate(chains):
        for v in c:
            owner[v] = x
    changed = True
    while changed:
        changed = False
        for x in range(len(chains)):
            for v in sorted(chains[x], reverse=True):
                if len(chains[x]) == 1:
                    break
                rest = [u for u in chains[x] if u != v]
                if not gq.subgraph_is_connected(rest):
                    continue
                touched = {owner[w] for u in rest for w in gq.neighbors(u)}
                if all(y in touched for y in gp.neighbors(x)):
                    chains[x] = rest
                    owner[v] = -1
                    changed = True


def _host_regions(gp: Graph, gq: Graph) -> List[Tuple[Graph, List[int]]]:
    """Host subgraphs that tries cycle through, each with its local-to-host id map.

    A connected problem graph has to land inside one connected component of
    the host, so each try is confined to a single component large enough to
    pass :func:`impossibility_certificate`, largest first. Otherwise the
    whole host is used.
    """
    components = connected_components(gq)
    if len(components) == 1 or len(connected_components(gp)) != 1:
        return [(gq, list(range(gq.node_count)))]
    regions = []
    for comp in sorted(components, key=lambda c: (-len(c), c[0])):
        local = {v: i for i, v in enumerate(comp)}
        sub = Graph.from_edges(len(comp), ((local[u], local[v]) for u in comp for v in gq.neighbors(u) if u < v))
        if impossibility_certificate(gp, sub) is None:
            regions.append((sub, comp))
    return regions


def find_embedding(gp: Graph, gq: Graph, params: EmbedParams = EmbedParams(), *, qpu_label: str = "") -> Embedding:
    """Embed ``gp`` as a minor of ``gq``.

    Each try shuffles the logical vertices with a seed derived from
    ``params.seed`` and the try index, places every chain along
    overlap-penalised cheapest paths to its already placed neighbours, then
    re-routes chains until no host node is shared or the round budget runs
    out. A connected problem is confined to one host component per try.
    Identical inputs give identical results.

    Raises:
        EmbeddingFailure: with ``reason`` ``"impossible"`` when a trivial
            certificate rules the minor out, ``"timeout"`` when
            ``params.timeout_ms`` elapses, ``"exhausted"`` otherwise.
    """
    if gp.node_count < 1 or gq.node_count < 1:
        raise ValueError("both graphs need at least one node")
    why = impossibility_certificate(gp, gq)
    if why is not None:
        raise EmbeddingFailure("impossible", why)
    deadline = None
    if params.timeout_ms is not None:
        deadline = time.monotonic() + params.timeout_ms / 1000.0
    hosts = _host_regions(gp, gq)
    if not hosts:
        raise EmbeddingFailure("impossible", "no connected component of the host is large enough")
    routers: Dict[int, _Router] = {}
    for attempt in range(params.max_tries):
        region = attempt % len(hosts)
        sub, names = hosts[region]
        if region not in routers:
            routers[region] = _Router(gp, sub, params, deadline)
        rng = random.Random(derive_seed(params.seed, attempt))
        try:
            chains = routers[region].attempt(rng)
        except EmbeddingFailure as exc:
            exc.tries_used = attempt + 1
            raise
        if chains is None:
            continue
        lists = [sorted(names[int(v)] for v in c) for c in chains]
        if params.trim_chains:
            _trim(gp, gq, lists)
        return Embedding([tuple(c) for c in lists], qpu_label, tries_used=attempt + 1)
    raise EmbeddingFailure(
        "exhausted", f"no embedding found in {params.max_tries} tries", tries_used=params.max_tries
    )


# -- verification ---------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: Tuple

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}"


@dataclass
class ValidityReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def of_kind(self, kind: str) -> List[Violation]:
        return [v for v in self.violations if v.kind == kind]

    def __len__(self) -> int:
        return len(self.violations)


def verify_embedding(gp: Graph, gq: Graph, emb: Embedding) -> ValidityReport:
    """Check every minor-embedding condition and list all violations.

    Categories: ``missing_vertex``, ``unknown_vertex``, ``invalid_host``,
    ``empty_chain``, ``disconnected_chain``, ``overlap`` (host, chain a,
    chain b) and ``unrealized_edge`` (a, b).
    """
    report = ValidityReport()
    add = lambda kind, *detail: report.violations.append(Violation(kind, detail))
    chains: Dict[int, List[int]] = {}
    for x, chain in enumerate(emb.chains):
        if x >= gp.node_count:
            add("unknown_vertex", x)
            continue
        if chain is None:
            add("missing_vertex", x)
            continue
        hosts = sorted(set(chain))
        bad = [v for v in hosts if not 0 <= v < gq.node_count]
        for v in bad:
            add("invalid_host", x, v)
        hosts = [v for v in hosts if 0 <= v < gq.node_count]
        chains[x] = hosts
        if not hosts:
            if not bad:
                add("empty_chain", x)
        elif not gq.subgraph_is_connected(hosts):
            add("disconnected_chain", x)
    for x in range(len(emb.chains), gp.node_count):
        add("missing_vertex", x)

    holders: Dict[int, List[int]] = {}
    for x in sorted(chains):
        for v in chains[x]:
            holders.setdefault(v, []).append(x)
    for v in sorted(holders):
        h = holders[v]
        for i in range(len(h)):
            for j in range(i + 1, len(h)):
                add("overlap", v, h[i], h[j])

    for a, b in gp.edges():
        if a not in chains or b not in chains:
            continue
        cb = set(chains[b])
        if not any(w in cb for u in chains[a] for w in gq.neighbors(u)):
            add("unrealized_edge", a, b)
    return report


# -- statistics -------------------------------------------------------------------


@dataclass(frozen=True)
class ChainStats:
    mean: Fraction
    median: Fraction
    mode: int
    max: int
    total: int

    def to_dict(self) -> dict:
        return {
            "mean": float(self.mean),
            "median": float(self.median),
            "mode": self.mode,
            "max": self.max,
            "total": self.total,
        }


def chain_stats(emb: Embedding) -> ChainStats:
    """Mean, median (mid-pair average), mode (smallest on ties), max and total chain length."""
    lengths = sorted(len(c) for c in emb.chains)
    if not lengths:
        raise ValueError("chain statistics need a non-empty embedding")
    n = len(lengths)
    total = sum(lengths)
    mid = n // 2
    median = Fraction(lengths[mid]) if n % 2 else Fraction(lengths[mid - 1] + lengths[mid], 2)
    counts = Counter(lengths)
    mode = min(counts, key=lambda length: (-counts[length], length))
    return ChainStats(Fraction(total, n), median, mode, lengths[-1], total)
