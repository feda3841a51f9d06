"""Mixed-radix counting over the edge state space.

The counter increments coordinate 1 first and carries upward, so the rank of
a vector is ``sum_k x[k] * prod_{j<k} radices[j]``.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

from .model import EdgeStateDistribution, Network, StateVector


class NoPathError(ValueError):
    """No source-sink path exists among edges that can carry flow."""


@dataclass(frozen=True)
class RadixProfile:
    radices: tuple[int, ...]

    def __post_init__(self):
        if any(r < 1 for r in self.radices):
            raise ValueError(f"radices must be >= 1: {self.radices}")

    @classmethod
    def of(cls, dist: EdgeStateDistribution) -> "RadixProfile":
        return cls(dist.radices)

    @property
    def total(self) -> int:
        return math.prod(self.radices)

    @property
    def top(self) -> StateVector:
        return tuple(r - 1 for r in self.radices)


@dataclass(frozen=True)
class FirstConnectedVector:
    x_fc: StateVector
    rank: int
    path: tuple[int, ...]   # 0-based edge indices along the path, source to sink


def _check_bounds(x: Sequence[int], prof: RadixProfile) -> None:
    if len(x) != len(prof.radices):
        raise ValueError(f"vector has {len(x)} coordinates, expected {len(prof.radices)}")
    for k, (s, r) in enumerate(zip(x, prof.radices)):
        if not 0 <= s < r:
            raise ValueError(f"state {s} of a_{k + 1} outside 0..{r - 1}")


def mixed_radix_rank(x: Sequence[int], prof: RadixProfile) -> int:
    _check_bounds(x, prof)
    rank = 0
    for s, r in zip(reversed(x), reversed(prof.radices)):
        rank = rank * r + s
    return rank


def unrank(rank: int, prof: RadixProfile) -> StateVector:
    if not 0 <= rank < prof.total:
        raise ValueError(f"rank {rank} outside [0, {prof.total})")
    x = []
    for r in prof.radices:
        rank, s = divmod(rank, r)
        x.append(s)
    return tuple(x)


def next_vector(x: Sequence[int], prof: RadixProfile) -> StateVector | None:
    """Rank successor of ``x``; ``None`` after the all-max vector."""
    _check_bounds(x, prof)
    y = list(x)
    for i, r in enumerate(prof.radices):
        if y[i] == r - 1:
            y[i] = 0
        else:
            y[i] += 1
            return tuple(y)
    return None


def next_vector_binary_backward(x: Sequence[int]) -> StateVector | None:
    """Binary successor that adds one at the last coordinate.

    This is the classic binary-addition order over ``{0,1}^m``; it returns
    ``None`` once every coordinate is 1.
    """
    if any(s not in (0, 1) for s in x):
        raise ValueError("backward binary counting needs every state in {0, 1}")
    y = list(x)
    for k in range(len(y) - 1, -1, -1):
        if y[k] == 1:
            y[k] = 0
        else:
            y[k] = 1
            return tuple(y)
    return None


def find_first_connected_vector(net: Network, dist: EdgeStateDistribution) -> FirstConnectedVector:
    """Earliest vector in counting order whose subnetwork links source to sink.

    Edge ``a_k`` gets length ``2**(k-1)``; the shortest path under these
    lengths is unique and its indicator vector has the smallest rank among
    all connected vectors.  Python integers keep the lengths exact for any m.
    """
    if len(dist.probs) != net.m:
        raise ValueError("distribution does not match the network")
    usable = [u >= 1 for u in dist.max_states]
    adj: list[list[tuple[int, int]]] = [[] for _ in range(net.n + 1)]
    for k, (u, v) in enumerate(net.edges):
        if usable[k]:
            adj[u].append((v, k))
            adj[v].append((u, k))

    source, sink = net.source, net.sink
    best = {source: 0}
    via: dict[int, tuple[int, int]] = {}
    heap = [(0, source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == sink:
            break
        for w, k in adj[u]:
            nd = d + (1 << k)
            if w not in done and (w not in best or nd < best[w]):
                best[w] = nd
                via[w] = (u, k)
                heapq.heappush(heap, (nd, w))
    if sink not in done:
        raise NoPathError(f"no path from {source} to {sink} over edges with a positive state")

    path = []
    w = sink
    while w != source:
        u, k = via[w]
        path.append(k)
        w = u
    path.reverse()
    x = [0] * net.m
    for k in path:
        x[k] = 1
    x_fc = tuple(x)
    return FirstConnectedVector(x_fc, mixed_radix_rank(x_fc, RadixProfile.of(dist)), tuple(path))


def partition_range(start_rank: int, end_rank: int, parts: int) -> list[tuple[int, int]]:
    """Split ``[start_rank, end_rank)`` into contiguous near-equal pieces."""
    if start_rank > end_rank:
        raise ValueError(f"empty-or-reversed range [{start_rank}, {end_rank})")
    if parts < 1:
        raise ValueError(f"parts must be >= 1, got {parts}")
    size, extra = divmod(end_rank - start_rank, parts)
    out = []
    lo = start_rank
    for i in range(parts):
        hi = lo + size + (1 if i < extra else 0)
        out.append((lo, hi))
        lo = hi
    return out
