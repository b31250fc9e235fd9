"""Undirected simple graphs and the topology metrics used to describe QPUs.

Node ids are dense integers ``0..node_count-1``. Adjacency lists are kept
strictly increasing, so two graphs with the same edge set are structurally
identical and serialize to the same bytes.
"""

from __future__ import annotations

import heapq
import math
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union, TextIO
import io
import os

import numpy as np


class GraphError(ValueError):
    """Invalid node id, self-loop or malformed graph data."""


class UndefinedMetricError(ValueError):
    """A statistic was requested on a graph for which it is not defined."""


class Graph:
    """Undirected simple graph with sorted adjacency lists.

    Args:
        node_count: number of vertices; vertices are ``0..node_count-1``.
    """

    __slots__ = ("_adj", "_edge_count", "_csr")

    def __init__(self, node_count: int = 0):
        if node_count < 0:
            raise GraphError(f"node_count must be non-negative, got {node_count}")
        self._adj: List[List[int]] = [[] for _ in range(node_count)]
        self._edge_count = 0
        self._csr: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Tuple[int, int]]) -> "Graph":
        """Build a graph in one pass; duplicate edges collapse, self-loops raise."""
        g = cls(node_count)
        nbrs: List[set] = [set() for _ in range(node_count)]
        for u, v in edges:
            g._check(u, v)
            nbrs[u].add(v)
            nbrs[v].add(u)
        g._adj = [sorted(s) for s in nbrs]
        g._edge_count = sum(len(s) for s in nbrs) // 2
        return g

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))

    def _check(self, u: int, v: int) -> None:
        n = len(self._adj)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u}, {v}) out of range for {n} nodes")
        if u == v:
            raise GraphError(f"self-loop at node {u}")

    def add_edge(self, u: int, v: int) -> None:
        """Insert edge ``u-v`` in place. Re-adding an existing edge is a no-op."""
        self._check(u, v)
        au = self._adj[u]
        i = bisect_left(au, v)
        if i < len(au) and au[i] == v:
            return
        au.insert(i, v)
        av = self._adj[v]
        av.insert(bisect_left(av, u), u)
        self._edge_count += 1
        self._csr = None

    @property
    def node_count(self) -> int:
        return len(self._adj)

    @property
    def edge_count(self) -> int:
        return self._edge_count

    def neighbors(self, v: int) -> List[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def degrees(self) -> List[int]:
        return [len(a) for a in self._adj]

    def has_edge(self, u: int, v: int) -> bool:
        a = self._adj[u]
        i = bisect_left(a, v)
        return i < len(a) and a[i] == v

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Edges as ``(u, v)`` with ``u < v`` in ascending lexicographic order."""
        for u, a in enumerate(self._adj):
            for v in a[bisect_left(a, u):]:
                yield u, v

    def csr(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` int64 arrays of the symmetric adjacency."""
        if self._csr is None:
            indptr = np.zeros(self.node_count + 1, dtype=np.int64)
            np.cumsum([len(a) for a in self._adj], out=indptr[1:])
            flat = [v for a in self._adj for v in a]
            self._csr = (indptr, np.asarray(flat, dtype=np.int64))
        return self._csr

    def subgraph_is_connected(self, nodes: Iterable[int]) -> bool:
        """True if the subgraph induced on ``nodes`` is connected (and non-empty)."""
        members = set(nodes)
        if not members:
            return False
        start = next(iter(members))
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self._adj[u]:
                if v in members and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(members)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._adj == other._adj

    def __repr__(self) -> str:
        return f"Graph(node_count={self.node_count}, edge_count={self.edge_count})"


def new_graph(node_count: int) -> Graph:
    return Graph(node_count)


def add_edge(g: Graph, u: int, v: int) -> Graph:
    g.add_edge(u, v)
    return g


# -- coarse metrics ---------------------------------------------------------


@dataclass(frozen=True)
class DegreeStats:
    min_degree: int
    max_degree: int
    mean_degree: Fraction
    degree_stddev: float


def degree_stats(g: Graph) -> DegreeStats:
    """Exact min/max/mean degree and the population standard deviation."""
    n = g.node_count
    if n == 0:
        raise UndefinedMetricError("degree statistics are undefined on an empty graph")
    degs = g.degrees()
    mean = Fraction(2 * g.edge_count, n)
    variance = Fraction(sum(d * d for d in degs), n) - mean * mean
    return DegreeStats(min(degs), max(degs), mean, math.sqrt(variance))


def regularity(g: Graph) -> float:
    """Degree uniformity ``1 - stddev/mean`` clamped to ``[0, 1]``; 1 iff regular."""
    if g.node_count == 0:
        raise UndefinedMetricError("regularity is undefined on an empty graph")
    stats = degree_stats(g)
    if stats.mean_degree == 0:
        raise UndefinedMetricError("regularity is undefined when every node is isolated")
    if stats.degree_stddev == 0:
        return 1.0
    return max(0.0, 1.0 - stats.degree_stddev / float(stats.mean_degree))


def connected_components(g: Graph) -> List[List[int]]:
    """Maximal connected vertex sets, each sorted, ordered by smallest member."""
    seen = [False] * g.node_count
    components = []
    for s in range(g.node_count):
        if seen[s]:
            continue
        seen[s] = True
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    queue.append(v)
        comp.sort()
        components.append(comp)
    return components


# -- modularity -------------------------------------------------------------


def modularity(g: Graph, partition: Sequence[int]) -> float:
    """Newman modularity of ``partition`` (community id per node), computed from scratch."""
    m = g.edge_count
    if m == 0:
        raise UndefinedMetricError("modularity is undefined on an edgeless graph")
    intra: Dict[int, int] = {}
    total: Dict[int, int] = {}
    for u in range(g.node_count):
        cu = partition[u]
        total[cu] = total.get(cu, 0) + g.degree(u)
    for u, v in g.edges():
        if partition[u] == partition[v]:
            intra[partition[u]] = intra.get(partition[u], 0) + 1
    # 4m^2 * Q = sum_c (4m * e_c - d_c^2), kept integral
    scaled = sum(4 * m * intra.get(c, 0) - d * d for c, d in total.items())
    return scaled / (4 * m * m)


def modularity_partition(g: Graph) -> Tuple[List[int], float]:
    """Greedy agglomerative modularity maximisation.

    Starting from singletons, repeatedly merges the pair of adjacent
    communities with the largest modularity gain (ties: smallest id pair)
    until no merge strictly improves Q. Gains are compared in exact integer
    arithmetic. A merged community keeps the smaller of the two ids.

    Returns:
        ``(partition, q)`` where ``partition[v]`` is the community id of ``v``
        (the smallest node id in its community) and ``q`` the modularity
        tracked incrementally during merging.
    """
    m = g.edge_count
    if m == 0:
        raise UndefinedMetricError("modularity is undefined on an edgeless graph")
    n = g.node_count
    two_m = 2 * m
    deg = g.degrees()
    # links[c][d] = number of edges between communities c and d
    links: List[Optional[Dict[int, int]]] = [
        {v: 1 for v in g.neighbors(u)} for u in range(n)
    ]
    members: List[Optional[List[int]]] = [[u] for u in range(n)]
    version = [0] * n
    # scaled Q: 4m^2 * Q
    scaled_q = -sum(d * d for d in deg)

    heap: List[Tuple[int, int, int, int, int]] = []
    for u in range(n):
        for v in g.neighbors(u):
            if u < v:
                gain = two_m - deg[u] * deg[v]
                if gain > 0:
                    heap.append((-gain, u, v, 0, 0))
    heapq.heapify(heap)

    while heap:
        neg_gain, a, b, va, vb = heapq.heappop(heap)
        if version[a] != va or version[b] != vb or members[a] is None or members[b] is None:
            continue
        # gain in units of 1/(2m^2); scaled_q is in units of 1/(4m^2)
        scaled_q += -2 * neg_gain
        la, lb = links[a], links[b]
        if len(la) < len(lb):
            la, lb = lb, la
        for c, w in lb.items():
            la[c] = la.get(c, 0) + w
        la.pop(a, None)
        la.pop(b, None)
        for c, w in la.items():
            lc = links[c]
            moved = lc.pop(b, 0)
            if moved:
                lc[a] = lc.get(a, 0) + moved
        links[a], links[b] = la, None
        members[a].extend(members[b])
        members[b] = None
        deg[a] += deg[b]
        version[a] += 1
        for c, w in la.items():
            gain = two_m * w - deg[a] * deg[c]
            if gain > 0:
                lo, hi = (a, c) if a < c else (c, a)
                heapq.heappush(heap, (-gain, lo, hi, version[lo], version[hi]))

    partition = [0] * n
    for cid, mem in enumerate(members):
        if mem is not None:
            for v in mem:
                partition[v] = cid
    return partition, scaled_q / (4 * m * m)


@dataclass(frozen=True)
class TopologyMetrics:
    node_count: int
    edge_count: int
    average_degree: float
    regularity: float
    modularity: float
    community_count: int

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "average_degree": self.average_degree,
            "regularity": self.regularity,
            "modularity": self.modularity,
            "community_count": self.community_count,
        }


def topology_metrics(g: Graph) -> TopologyMetrics:
    partition, q = modularity_partition(g)
    return TopologyMetrics(
        node_count=g.node_count,
        edge_count=g.edge_count,
        average_degree=2 * g.edge_count / g.node_count,
        regularity=regularity(g),
        modularity=q,
        community_count=len(set(partition)),
    )


# -- edge-list format ---------------------------------------------------------


def dumps_edgelist(g: Graph) -> str:
    lines = [f"graph {g.node_count} {g.edge_count}"]
    lines.extend(f"{u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def loads_edgelist(text: str) -> Graph:
    """Parse the edge-list format; the header counts are checked against the body."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphError("empty edge list")
    header = lines[0].split()
    if len(header) != 3 or header[0] != "graph":
        raise GraphError(f"line 1: expected 'graph <nodes> <edges>', got {lines[0]!r}")
    try:
        n, m = int(header[1]), int(header[2])
    except ValueError:
        raise GraphError(f"line 1: non-integer counts in {lines[0]!r}") from None
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer node id in {line!r}") from None
        edges.append((u, v))
    g = Graph.from_edges(n, edges)
    if g.edge_count != m or len(edges) != m:
        raise GraphError(f"header declares {m} edges, body has {len(edges)} ({g.edge_count} distinct)")
    return g


def write_edgelist(g: Graph, path: Union[str, os.PathLike, TextIO]) -> None:
    text = dumps_edgelist(g)
    if isinstance(path, io.TextIOBase) or hasattr(path, "write"):
        path.write(text)
        return
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(text)


def read_edgelist(path: Union[str, os.PathLike]) -> Graph:
    with open(path, "r", newline="", encoding="ascii") as fh:
        return loads_edgelist(fh.read())
