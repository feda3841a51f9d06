"""Maximum s-t flow of the subnetwork induced by a state vector.

Edge ``a_k`` carries capacity ``x[k]`` in either direction.  The solver keeps a
signed flow per edge, which is the residual representation of two
anti-parallel arcs with shared capacity.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .model import Network

MAX_ORACLE_VERTICES = 20


@dataclass(frozen=True)
class FlowResult:
    value: int
    augmentations: int


class FlowSolver:
    """Shortest-augmenting-path max-flow with reusable adjacency.

    One solver per worker; instances are not thread-safe.
    """

    def __init__(self, net: Network):
        self.net = net
        adj: list[list[tuple[int, int, int]]] = [[] for _ in range(net.n + 1)]
        for k, (u, v) in enumerate(net.edges):
            adj[u].append((v, k, 1))
            adj[v].append((u, k, -1))
        self._adj = [tuple(a) for a in adj]

    def solve(self, x: Sequence[int]) -> tuple[int, int]:
        """Return ``(flow value, augmentation count)`` for capacities ``x``."""
        adj = self._adj
        n = self.net.n
        source, sink = 1, n
        flow = [0] * len(x)
        total = 0
        augs = 0
        while True:
            pred = [None] * (n + 1)
            pred[source] = (0, -1, 0)
            queue = [source]
            found = False
            for u in queue:
                for w, k, sign in adj[u]:
                    if pred[w] is None and x[k] - sign * flow[k] > 0:
                        pred[w] = (u, k, sign)
                        if w == sink:
                            found = True
                            break
                        queue.append(w)
                if found:
                    break
            if not found:
                return total, augs
            # bottleneck along the BFS tree path
            f = None
            w = sink
            while w != source:
                u, k, sign = pred[w]
                res = x[k] - sign * flow[k]
                if f is None or res < f:
                    f = res
                w = u
            w = sink
            while w != source:
                u, k, sign = pred[w]
                flow[k] += sign * f
                w = u
            total += f
            augs += 1

    def value(self, x: Sequence[int]) -> int:
        return self.solve(x)[0]


@lru_cache(maxsize=64)
def _solver(net: Network) -> FlowSolver:
    return FlowSolver(net)


def max_flow(net: Network, x: Sequence[int]) -> FlowResult:
    if len(x) != net.m:
        raise ValueError(f"vector has {len(x)} coordinates, expected {net.m}")
    if any(s < 0 for s in x):
        raise ValueError("states must be non-negative")
    value, augs = _solver(net).solve(x)
    return FlowResult(value, augs)


@lru_cache(maxsize=64)
def cut_incidence(net: Network) -> np.ndarray:
    """0/1 matrix, one row per s-t cut, marking the edges that cross it.

    Rows enumerate every source side ``{1} + S`` with ``S`` a subset of the
    inner vertices ``2..n-1``.
    """
    if net.n > MAX_ORACLE_VERTICES:
        raise ValueError(
            f"min-cut oracle limited to n <= {MAX_ORACLE_VERTICES}, got n={net.n}")
    inner = net.n - 2
    masks = np.arange(1 << inner, dtype=np.int64)
    side = np.zeros((1 << inner, net.n + 1), dtype=np.int8)
    side[:, 1] = 1
    for v in range(2, net.n):
        side[:, v] = (masks >> (v - 2)) & 1
    us = np.array([u for u, _ in net.edges])
    vs = np.array([v for _, v in net.edges])
    inc = side[:, us] ^ side[:, vs]
    inc.setflags(write=False)
    return inc


def min_cut_values(net: Network, states: np.ndarray) -> np.ndarray:
    """Minimum cut capacity for each row of ``states`` (shape ``(N, m)``)."""
    inc = cut_incidence(net).astype(np.int64)
    states = np.asarray(states, dtype=np.int64)
    return (states @ inc.T).min(axis=1)


def min_cut_oracle(net: Network, x: Sequence[int]) -> int:
    """Brute-force minimum s-t cut; equals the max flow by duality."""
    if len(x) != net.m:
        raise ValueError(f"vector has {len(x)} coordinates, expected {net.m}")
    return int(min_cut_values(net, np.asarray([x]))[0])
