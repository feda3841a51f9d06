"""Multistate flow network model: networks, edge state distributions, reports.

Vertices are the integers ``1..n``; vertex 1 is the source and vertex ``n``
the sink.  Edges are undirected and stored as ``(min(u, v), max(u, v))``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

StateVector = tuple[int, ...]

SUM_TOL = 1e-9


class NetworkError(ValueError):
    """Raised for malformed or invalid network documents."""


@dataclass(frozen=True)
class Network:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 2:
            raise NetworkError(f"need at least 2 vertices, got n={self.n}")
        if not self.edges:
            raise NetworkError("edge list is empty")
        seen = {}
        norm = []
        for k, (u, v) in enumerate(self.edges, start=1):
            if u == v:
                raise NetworkError(f"edge a_{k} [{u}, {v}] is a self-loop")
            for w in (u, v):
                if not 1 <= w <= self.n:
                    raise NetworkError(
                        f"edge a_{k} [{u}, {v}] references vertex {w} outside 1..{self.n}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise NetworkError(
                    f"edge a_{k} [{u}, {v}] is parallel to edge a_{seen[key]}")
            seen[key] = k
            norm.append(key)
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def source(self) -> int:
        return 1

    @property
    def sink(self) -> int:
        return self.n

    def canonical_order(self) -> list[int]:
        """Permutation that sorts edges lexicographically by endpoints."""
        return sorted(range(self.m), key=lambda k: self.edges[k])

    def is_canonical(self) -> bool:
        return list(self.edges) == sorted(self.edges)


@dataclass(frozen=True)
class EdgeStateDistribution:
    """Per-edge probabilities ``probs[k][s]`` for states ``s = 0..U_k``."""

    probs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = []
        for k, row in enumerate(self.probs, start=1):
            row = tuple(float(p) for p in row)
            if not row:
                raise NetworkError(f"edge a_{k} has an empty state distribution")
            for s, p in enumerate(row):
                if not math.isfinite(p) or p < 0.0 or p > 1.0:
                    raise NetworkError(f"edge a_{k} state {s} has invalid probability {p!r}")
            total = math.fsum(row)
            if abs(total - 1.0) > SUM_TOL:
                raise NetworkError(
                    f"edge a_{k} probabilities sum to {total!r}, not 1 "
                    f"(set normalize to rescale)")
            rows.append(row)
        object.__setattr__(self, "probs", tuple(rows))

    @classmethod
    def normalized(cls, probs: Sequence[Sequence[float]]) -> "EdgeStateDistribution":
        rows = []
        for k, row in enumerate(probs, start=1):
            row = [float(p) for p in row]
            if any(p < 0.0 for p in row):
                raise NetworkError(f"edge a_{k} has a negative probability")
            total = math.fsum(row)
            if total <= 0.0:
                raise NetworkError(f"edge a_{k} has zero total probability")
            rows.append(tuple(p / total for p in row))
        return cls(tuple(rows))

    @property
    def max_states(self) -> tuple[int, ...]:
        return tuple(len(row) - 1 for row in self.probs)

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(len(row) for row in self.probs)

    def permuted(self, order: Sequence[int]) -> "EdgeStateDistribution":
        return EdgeStateDistribution(tuple(self.probs[k] for k in order))


@dataclass(frozen=True)
class AllLevelsReport:
    """Result of an all-levels sweep.

    ``r[d-1]`` is the probability that exactly ``d`` units of flow reach the
    sink, ``R[d-1]`` the probability of at least ``d`` units.
    """

    d_max: int
    r: tuple[float, ...]
    R: tuple[float, ...]
    n_total: int
    n_processed: int
    pr_disconnected: float
    elapsed: float
    x_fc: StateVector | None = None
    workers: int = 1
    method: str = field(default="bat")


def check_compatible(net: Network, dist: EdgeStateDistribution) -> None:
    if len(dist.probs) != net.m:
        raise NetworkError(
            f"distribution covers {len(dist.probs)} edges but the network has {net.m}")


def canonicalize(net: Network, dist: EdgeStateDistribution | None = None):
    """Relabel edges in lexicographic endpoint order.

    Returns ``(network, distribution)``; relabeling a canonical network is the
    identity.
    """
    order = net.canonical_order()
    new_net = Network(net.n, tuple(net.edges[k] for k in order))
    new_dist = dist.permuted(order) if dist is not None else None
    return new_net, new_dist


def parse_network(text: str, normalize: bool | None = None):
    """Parse a JSON network document into ``(Network, EdgeStateDistribution)``.

    ``normalize`` overrides the document's own ``"normalize"`` flag when given.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict):
        raise NetworkError("malformed document: top level must be an object")
    for key in ("n", "edges", "dist"):
        if key not in doc:
            raise NetworkError(f"malformed document: missing {key!r}")
    n, edges, probs = doc["n"], doc["edges"], doc["dist"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise NetworkError("malformed document: 'n' must be an integer")
    if not isinstance(edges, list) or not isinstance(probs, list):
        raise NetworkError("malformed document: 'edges' and 'dist' must be lists")
    pairs = []
    for k, e in enumerate(edges, start=1):
        if (not isinstance(e, list) or len(e) != 2
                or not all(isinstance(w, int) and not isinstance(w, bool) for w in e)):
            raise NetworkError(f"malformed document: edge a_{k} {e!r} is not an integer pair")
        pairs.append((e[0], e[1]))
    for k, row in enumerate(probs, start=1):
        if (not isinstance(row, list)
                or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in row)):
            raise NetworkError(f"malformed document: distribution of a_{k} is not a number list")
    if len(probs) != len(pairs):
        raise NetworkError(
            f"malformed document: {len(pairs)} edges but {len(probs)} distributions")

    net = Network(n, tuple(pairs))
    if normalize is None:
        normalize = bool(doc.get("normalize", False))
    dist = EdgeStateDistribution.normalized(probs) if normalize else EdgeStateDistribution(
        tuple(tuple(row) for row in probs))
    if not doc.get("preserve_order", False):
        net, dist = canonicalize(net, dist)
    return net, dist


def network_document(net: Network, dist: EdgeStateDistribution, **flags) -> str:
    doc = {"n": net.n, "edges": [list(e) for e in net.edges],
           "dist": [list(row) for row in dist.probs]}
    doc.update(flags)
    lines = [f" {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.items()]
    return "{\n" + ",\n".join(lines) + "\n}"


def uniform_distribution(net: Network, max_state: int) -> EdgeStateDistribution:
    if max_state < 0:
        raise ValueError(f"max_state must be non-negative, got {max_state}")
    p = 1.0 / (max_state + 1)
    return EdgeStateDistribution(tuple((p,) * (max_state + 1) for _ in range(net.m)))


def pr_vector(x: Sequence[int], dist: EdgeStateDistribution) -> float:
    """Probability of the joint state ``x`` under independent edges."""
    probs = dist.probs
    if len(x) != len(probs):
        raise ValueError(f"vector has {len(x)} coordinates, expected {len(probs)}")
    p = 1.0
    for k, s in enumerate(x):
        row = probs[k]
        if not 0 <= s < len(row):
            raise ValueError(f"state {s} of a_{k + 1} outside 0..{len(row) - 1}")
        p *= row[s]
    return p


def bridge_network() -> tuple[Network, EdgeStateDistribution]:
    """The 4-vertex bridge with its three-state edge distributions."""
    net = Network(4, ((1, 2), (1, 3), (2, 3), (2, 4), (3, 4)))
    dist = EdgeStateDistribution((
        (0.1, 0.2, 0.7),
        (0.05, 0.10, 0.85),
        (0.01, 0.19, 0.80),
        (0.10, 0.15, 0.75),
        (0.025, 0.075, 0.900),
    ))
    return net, dist


def series_network(length: int, up: float = 0.9) -> tuple[Network, EdgeStateDistribution]:
    net = Network(length + 1, tuple((i, i + 1) for i in range(1, length + 1)))
    dist = EdgeStateDistribution(tuple((1.0 - up, up) for _ in range(length)))
    return net, dist


# --- report serialization ---------------------------------------------------

def _fmt(p: float) -> str:
    return f"{p:.9f}"


def serialize_report(rep: AllLevelsReport, format: str = "json") -> str:
    if format == "json":
        doc = asdict(rep)
        doc["x_fc"] = list(rep.x_fc) if rep.x_fc is not None else None
        doc["r"] = list(rep.r)
        doc["R"] = list(rep.R)
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "r_d", "R_d"])
        for d, (r, R) in enumerate(zip(rep.r, rep.R), start=1):
            w.writerow([d, _fmt(r), _fmt(R)])
        w.writerow(["pr_disconnected", _fmt(rep.pr_disconnected)])
        w.writerow(["n_total", rep.n_total])
        w.writerow(["n_processed", rep.n_processed])
        if rep.x_fc is not None:
            w.writerow(["x_fc", "(" + ",".join(map(str, rep.x_fc)) + ")"])
        w.writerow(["elapsed_s", f"{rep.elapsed:.3f}"])
        return buf.getvalue()
    raise ValueError(f"unknown report format {format!r}")


def parse_report(text: str) -> AllLevelsReport:
    doc = json.loads(text)
    x_fc = doc.get("x_fc")
    return AllLevelsReport(
        d_max=doc["d_max"],
        r=tuple(doc["r"]),
        R=tuple(doc["R"]),
        n_total=doc["n_total"],
        n_processed=doc["n_processed"],
        pr_disconnected=doc["pr_disconnected"],
        elapsed=doc["elapsed"],
        x_fc=tuple(x_fc) if x_fc is not None else None,
        workers=doc.get("workers", 1),
        method=doc.get("method", "bat"),
    )
