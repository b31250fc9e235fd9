"""Generators for the two QPU hardware-graph families and the experiment grids.

Zephyr node ids are the lexicographic rank of the coordinate
``(u, w, k, j, z)``; Havel-Hakimi node ids are ``0..num_qubits-1``.
"""

from __future__ import annotations

import heapq
from bisect import bisect_right
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple, Union

from .graph import Graph

#: Largest uniform degree accepted for Havel-Hakimi hardware graphs.
HH_DEGREE_CAP = 105

ZEPHYR_GRID_M = range(2, 8)
ZEPHYR_GRID_T = range(1, 26)
HH_GRID_DEG = tuple(5 + 25 * k for k in range(5))
HH_GRID_N = tuple(50 + 350 * m for m in range(30))


class GraphicalityError(ValueError):
    """A degree sequence cannot be realised by a simple graph."""


@dataclass(frozen=True, order=True)
class ZephyrParams:
    m: int
    t: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.t, int)) or self.m < 1 or self.t < 1:
            raise ValueError(f"Zephyr parameters must be integers >= 1, got m={self.m!r}, t={self.t!r}")

    @property
    def node_count(self) -> int:
        return 4 * self.t * self.m * (2 * self.m + 1)

    @property
    def edge_count(self) -> int:
        m, t = self.m, self.t
        return internal_edge_count(m, t) + external_edge_count(m, t) + odd_edge_count(m, t)


def internal_edge_count(m: int, t: int) -> int:
    return 16 * t * t * m * m


def external_edge_count(m: int, t: int) -> int:
    return 4 * t * (2 * m + 1) * (m - 1)


def odd_edge_count(m: int, t: int) -> int:
    return 2 * t * (2 * m + 1) * (2 * m - 1)


@dataclass(frozen=True)
class ZephyrCoord:
    u: int
    w: int
    k: int
    j: int
    z: int


def zephyr_linear_index(c: Union[ZephyrCoord, Sequence[int]], p: ZephyrParams) -> int:
    """Lexicographic rank of a Zephyr coordinate; raises ``ValueError`` when out of bounds."""
    u, w, k, j, z = (c.u, c.w, c.k, c.j, c.z) if isinstance(c, ZephyrCoord) else c
    m, t = p.m, p.t
    if not (0 <= u < 2 and 0 <= w <= 2 * m and 0 <= k < t and 0 <= j < 2 and 0 <= z < m):
        raise ValueError(f"coordinate {(u, w, k, j, z)} out of bounds for Zephyr(m={m}, t={t})")
    return (((u * (2 * m + 1) + w) * t + k) * 2 + j) * m + z


def zephyr_coordinate(index: int, p: ZephyrParams) -> ZephyrCoord:
    """Inverse of :func:`zephyr_linear_index`."""
    if not 0 <= index < p.node_count:
        raise ValueError(f"index {index} out of range for Zephyr(m={p.m}, t={p.t})")
    index, z = divmod(index, p.m)
    index, j = divmod(index, 2)
    index, k = divmod(index, p.t)
    u, w = divmod(index, 2 * p.m + 1)
    return ZephyrCoord(u, w, k, j, z)


def zephyr_edges(p: ZephyrParams) -> Iterator[Tuple[int, int]]:
    """Yield external, odd and internal couplers, in that order."""
    m, t = p.m, p.t
    width = 2 * m + 1

    def idx(u, w, k, j, z):
        return (((u * width + w) * t + k) * 2 + j) * m + z

    for u in range(2):
        for w in range(width):
            for k in range(t):
                for j in range(2):
                    base = idx(u, w, k, j, 0)
                    for z in range(m - 1):
                        yield base + z, base + z + 1
    for u in range(2):
        for w in range(width):
            for k in range(t):
                for z in range(m):
                    yield idx(u, w, k, 0, z), idx(u, w, k, 1, z)
                for z in range(m - 1):
                    yield idx(u, w, k, 1, z), idx(u, w, k, 0, z + 1)
    # a vertical qubit (0, w0, k0, j0, z0) spans transverse positions 2*z0+j0 and
    # 2*z0+j0+1; it couples to every horizontal qubit crossing one of them whose
    # own span contains w0
    for w0 in range(width):
        crossings = [(j1, z1) for z1 in range(m) for j1 in range(2) if w0 - (2 * z1 + j1) in (0, 1)]
        for k0 in range(t):
            for z0 in range(m):
                for j0 in range(2):
                    a = idx(0, w0, k0, j0, z0)
                    for w1 in (2 * z0 + j0, 2 * z0 + j0 + 1):
                        for k1 in range(t):
                            for j1, z1 in crossings:
                                yield a, idx(1, w1, k1, j1, z1)


def zephyr_graph(p: ZephyrParams) -> Graph:
    return Graph.from_edges(p.node_count, zephyr_edges(p))


@dataclass(frozen=True, order=True)
class HavelHakimiParams:
    deg: int
    num_qubits: int

    def __post_init__(self):
        if not (isinstance(self.deg, int) and isinstance(self.num_qubits, int)):
            raise ValueError("Havel-Hakimi parameters must be integers")
        if self.deg < 1 or self.num_qubits < 1:
            raise ValueError(f"deg and num_qubits must be >= 1, got {self.deg}, {self.num_qubits}")
        if self.deg > HH_DEGREE_CAP:
            raise ValueError(f"deg={self.deg} exceeds the hardware degree cap {HH_DEGREE_CAP}")


def erdos_gallai_violation(sequence: Sequence[int]) -> Optional[str]:
    """Return a description of the first failed Erdős–Gallai condition, or None if graphical."""
    if any(d < 0 for d in sequence):
        return "negative degree"
    if sum(sequence) % 2:
        return f"degree sum {sum(sequence)} is odd"
    d = sorted(sequence, reverse=True)
    n = len(d)
    neg = [-x for x in d]
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + d[i]
    lhs = 0
    for k in range(1, n + 1):
        lhs += d[k - 1]
        # entries d[k:] that are >= k contribute k, the rest contribute themselves
        p = max(k, bisect_right(neg, -k))
        rhs = k * (k - 1) + k * (p - k) + suffix[p]
        if lhs > rhs:
            return f"Erdős–Gallai inequality fails at k={k}: {lhs} > {rhs}"
    return None


def havel_hakimi_edges(sequence: Sequence[int]) -> List[Tuple[int, int]]:
    """Realise a degree sequence by the Havel-Hakimi procedure.

    The pivot is the node with the largest residual degree and is joined to
    the next-largest residual nodes; every tie goes to the smallest node id.
    Residual degrees are bucketed, and each bucket is a min-heap of node ids,
    which gives the tie order directly since nodes only ever leave a bucket
    from its smallest end.
    """
    problem = erdos_gallai_violation(sequence)
    if problem is not None:
        raise GraphicalityError(f"degree sequence is not graphical: {problem}")
    top = max(sequence, default=0)
    buckets: List[List[int]] = [[] for _ in range(top + 1)]
    for v, d in enumerate(sequence):
        if d > 0:
            buckets[d].append(v)
    for b in buckets:
        heapq.heapify(b)
    edges = []
    r = top
    while True:
        while r > 0 and not buckets[r]:
            r -= 1
        if r == 0:
            return edges
        pivot = heapq.heappop(buckets[r])
        need = r
        taken = []
        level = r
        while need:
            while level > 0 and not buckets[level]:
                level -= 1
            if level == 0:
                raise GraphicalityError(f"node {pivot} cannot be saturated")  # unreachable for graphical input
            v = heapq.heappop(buckets[level])
            taken.append((v, level))
            need -= 1
        for v, level in taken:
            edges.append((pivot, v) if pivot < v else (v, pivot))
            if level > 1:
                heapq.heappush(buckets[level - 1], v)


def havel_hakimi_graph(p: HavelHakimiParams) -> Graph:
    """Deterministic ``deg``-regular graph on ``num_qubits`` nodes."""
    if p.deg * p.num_qubits % 2:
        raise GraphicalityError(
            f"deg*num_qubits = {p.deg * p.num_qubits} is odd; no {p.deg}-regular graph on {p.num_qubits} nodes"
        )
    if p.deg >= p.num_qubits:
        raise GraphicalityError(
            f"Erdős–Gallai inequality fails at k={p.num_qubits}: deg={p.deg} needs more than {p.num_qubits} nodes"
        )
    return Graph.from_edges(p.num_qubits, havel_hakimi_edges([p.deg] * p.num_qubits))


# -- experiment configurations --------------------------------------------------

FAMILIES = ("zephyr", "havel_hakimi", "complete", "custom")


@dataclass(frozen=True)
class CompleteParams:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"complete-graph size must be >= 1, got {self.n!r}")


@dataclass(frozen=True)
class CustomParams:
    """A host read from a file; it can be labelled but not regenerated."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"custom host size must be >= 1, got {self.n!r}")


@dataclass(frozen=True)
class QpuConfig:
    family: str
    params: Union[ZephyrParams, HavelHakimiParams, CompleteParams]

    def __post_init__(self):
        expected = {
            "zephyr": ZephyrParams,
            "havel_hakimi": HavelHakimiParams,
            "complete": CompleteParams,
            "custom": CustomParams,
        }
        if self.family not in expected:
            raise ValueError(f"unknown family {self.family!r}")
        if not isinstance(self.params, expected[self.family]):
            raise ValueError(f"{self.family} config needs {expected[self.family].__name__}")

    @property
    def label(self) -> str:
        p = self.params
        if self.family == "zephyr":
            return f"zephyr-m{p.m}-t{p.t}"
        if self.family == "havel_hakimi":
            return f"hh-deg{p.deg}-n{p.num_qubits}"
        return f"{self.family}-n{p.n}"

    def params_dict(self) -> dict:
        p = self.params
        if self.family == "zephyr":
            return {"m": p.m, "t": p.t}
        if self.family == "havel_hakimi":
            return {"deg": p.deg, "num_qubits": p.num_qubits}
        return {"n": p.n}

    @classmethod
    def zephyr(cls, m: int, t: int) -> "QpuConfig":
        return cls("zephyr", ZephyrParams(m, t))

    @classmethod
    def havel_hakimi(cls, deg: int, num_qubits: int) -> "QpuConfig":
        return cls("havel_hakimi", HavelHakimiParams(deg, num_qubits))

    @classmethod
    def complete(cls, n: int) -> "QpuConfig":
        return cls("complete", CompleteParams(n))

    @classmethod
    def custom(cls, n: int) -> "QpuConfig":
        return cls("custom", CustomParams(n))

    @classmethod
    def from_label(cls, label: str) -> "QpuConfig":
        parts = label.split("-")
        try:
            if parts[0] == "zephyr" and len(parts) == 3:
                return cls.zephyr(int(parts[1][1:]), int(parts[2][1:]))
            if parts[0] == "hh" and len(parts) == 3:
                return cls.havel_hakimi(int(parts[1][3:]), int(parts[2][1:]))
            if parts[0] in ("complete", "custom") and len(parts) == 2 and parts[1][:1] == "n":
                return getattr(cls, parts[0])(int(parts[1][1:]))
        except ValueError:
            pass
        raise ValueError(f"unrecognised QPU label {label!r}")

    def build(self) -> Graph:
        if self.family == "zephyr":
            return zephyr_graph(self.params)
        if self.family == "havel_hakimi":
            return havel_hakimi_graph(self.params)
        if self.family == "complete":
            return Graph.complete(self.params.n)
        raise ValueError(f"{self.label} was read from a file and cannot be regenerated")


def sweep_configs() -> List[QpuConfig]:
    """The full 150 Zephyr + 150 Havel-Hakimi grid, family first then ascending params."""
    configs = [QpuConfig.zephyr(m, t) for m in ZEPHYR_GRID_M for t in ZEPHYR_GRID_T]
    configs += [QpuConfig.havel_hakimi(d, n) for d in HH_GRID_DEG for n in HH_GRID_N]
    return configs


def desk_configs() -> List[QpuConfig]:
    """Reduced grid that runs the whole pipeline in minutes on one core."""
    configs = [QpuConfig.zephyr(m, t) for m in (2, 3) for t in (1, 2, 4)]
    configs += [QpuConfig.havel_hakimi(d, n) for d in (5, 30) for n in (50, 400)]
    return configs
