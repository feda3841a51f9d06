"""All-levels reliability of a multistate flow network.

The engine walks the state space in counting order starting at the first
connected vector, computes the max flow ``f`` of every visited vector and
adds its probability to the exact-level bucket ``r_f``.  Level reliabilities
``R_d`` are suffix sums of the buckets.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .enumeration import (RadixProfile, find_first_connected_vector,
                          partition_range, unrank)
from .maxflow import FlowSolver, cut_incidence
from .model import AllLevelsReport, EdgeStateDistribution, Network, check_compatible

DEFAULT_BUDGET = 2 ** 40
ORACLE_MAX_VECTORS = 10 ** 6
ORACLE_MAX_VERTICES = 12
MC_GENERATOR = "PCG64"


class BudgetExceeded(RuntimeError):
    pass


class SweepTimeout(RuntimeError):
    pass


class OracleLimitError(ValueError):
    pass


class CompensatedSum:
    """Running Neumaier-compensated sum."""

    __slots__ = ("hi", "lo")

    def __init__(self, value: float = 0.0):
        self.hi = float(value)
        self.lo = 0.0

    def add(self, v: float) -> None:
        t = self.hi + v
        if abs(self.hi) >= abs(v):
            self.lo += (self.hi - t) + v
        else:
            self.lo += (v - t) + self.hi
        self.hi = t

    def merge(self, other: "CompensatedSum") -> None:
        self.add(other.hi)
        self.add(other.lo)

    @property
    def value(self) -> float:
        return self.hi + self.lo


class LevelAccumulator:
    """Probability mass per flow level; bucket 0 holds disconnected vectors."""

    def __init__(self, d_max: int):
        self.d_max = d_max
        self.buckets = [CompensatedSum() for _ in range(d_max + 1)]
        self.count = 0

    def merge(self, other: "LevelAccumulator") -> None:
        if other.d_max != self.d_max:
            raise ValueError("cannot merge accumulators with different d_max")
        for mine, theirs in zip(self.buckets, other.buckets):
            mine.merge(theirs)
        self.count += other.count

    @property
    def r(self) -> tuple[float, ...]:
        return tuple(b.value for b in self.buckets[1:])

    @property
    def disconnected_mass(self) -> float:
        return self.buckets[0].value

    def processed_mass(self) -> float:
        total = CompensatedSum()
        for b in self.buckets:
            total.merge(b)
        return total.value


def suffix_sums(r) -> tuple[float, ...]:
    """``R[d] = r[d] + r[d+1] + ... + r[d_max]``, accumulated from the top."""
    out = []
    acc = CompensatedSum()
    for v in reversed(r):
        if v < 0:
            raise ValueError(f"negative level mass {v!r}")
        acc.add(v)
        out.append(acc.value)
    return tuple(reversed(out))


def _sweep(net: Network, dist: EdgeStateDistribution, start: int, stop: int,
           d_max: int, deadline: float | None = None) -> LevelAccumulator:
    """Evaluate every vector with rank in ``[start, stop)``."""
    acc = LevelAccumulator(d_max)
    if stop <= start:
        return acc
    prof = RadixProfile.of(dist)
    x = list(unrank(start, prof))
    tops = prof.top
    m = len(tops)
    probs = dist.probs
    solve = FlowSolver(net).value
    hi = [0.0] * (d_max + 1)
    lo = [0.0] * (d_max + 1)

    for i in range(stop - start):
        if deadline is not None and not i & 0xFFF and time.time() > deadline:
            raise SweepTimeout(f"time limit reached after {i} vectors")
        f = solve(x)
        if f > d_max:
            raise AssertionError(f"flow {f} exceeds d_max {d_max} at {x}")
        p = 1.0
        for k in range(m):
            p *= probs[k][x[k]]
        # Neumaier step into bucket f
        s = hi[f]
        t = s + p
        if abs(s) >= p:
            lo[f] += (s - t) + p
        else:
            lo[f] += (p - t) + s
        hi[f] = t
        for k in range(m):
            if x[k] == tops[k]:
                x[k] = 0
            else:
                x[k] += 1
                break

    for b, h, l in zip(acc.buckets, hi, lo):
        b.hi, b.lo = h, l
    acc.count = stop - start
    return acc


def _sweep_task(args):
    return _sweep(*args)


def all_levels_reliability(net: Network, dist: EdgeStateDistribution, *,
                           workers: int = 1,
                           budget: int = DEFAULT_BUDGET,
                           budget_override: bool = False,
                           skip_prefix: bool = True,
                           time_limit: float | None = None,
                           use_processes: bool | None = None) -> AllLevelsReport:
    """Exact ``r_d`` and ``R_d`` for every level ``d = 1..d_max`` in one sweep.

    Parameters
    ----------
    workers
        Number of rank intervals the sweep is split into.  With
        ``use_processes`` (default: ``workers > 1``) each interval runs in
        its own process.
    budget, budget_override
        Refuse state spaces larger than ``budget`` vectors unless overridden.
    skip_prefix
        Start at the first connected vector.  ``False`` sweeps from rank 0.
    time_limit
        Wall-clock seconds before :class:`SweepTimeout` is raised.
    """
    check_compatible(net, dist)
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    t0 = time.perf_counter()
    deadline = time.time() + time_limit if time_limit is not None else None
    prof = RadixProfile.of(dist)
    n_total = prof.total
    if n_total > budget and not budget_override:
        raise BudgetExceeded(
            f"state space has {n_total} vectors, above the budget of {budget}")

    d_max = FlowSolver(net).value(prof.top)
    if d_max == 0:
        return AllLevelsReport(d_max=0, r=(), R=(), n_total=n_total, n_processed=0,
                               pr_disconnected=1.0, elapsed=time.perf_counter() - t0,
                               x_fc=None, workers=workers)

    fc = find_first_connected_vector(net, dist)
    start = fc.rank if skip_prefix else 0
    parts = partition_range(start, n_total, workers)
    tasks = [(net, dist, lo, hi, d_max, deadline) for lo, hi in parts]
    if use_processes is None:
        use_processes = workers > 1
    if use_processes:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = [_sweep(*t) for t in tasks]

    acc = LevelAccumulator(d_max)
    for part in results:
        acc.merge(part)

    pr_dis = CompensatedSum(acc.disconnected_mass)
    if start > 0:
        # every skipped vector is disconnected
        pr_dis.add(max(0.0, 1.0 - acc.processed_mass()))
    r = acc.r
    return AllLevelsReport(d_max=d_max, r=r, R=suffix_sums(r), n_total=n_total,
                           n_processed=acc.count, pr_disconnected=pr_dis.value,
                           elapsed=time.perf_counter() - t0, x_fc=fc.x_fc,
                           workers=workers)


# --- independent checks ---------------------------------------------------------

def _all_states(radices) -> np.ndarray:
    grids = np.indices(radices, dtype=np.int64)
    return grids.reshape(len(radices), -1).T


def _vector_probs(states: np.ndarray, dist: EdgeStateDistribution) -> np.ndarray:
    p = np.ones(len(states))
    for k, row in enumerate(dist.probs):
        p *= np.asarray(row)[states[:, k]]
    return p


def exhaustive_oracle(net: Network, dist: EdgeStateDistribution) -> AllLevelsReport:
    """Full-space sweep using brute-force minimum cuts instead of max flow."""
    check_compatible(net, dist)
    t0 = time.perf_counter()
    prof = RadixProfile.of(dist)
    if prof.total > ORACLE_MAX_VECTORS:
        raise OracleLimitError(
            f"oracle limited to {ORACLE_MAX_VECTORS} vectors, instance has {prof.total}")
    if net.n > ORACLE_MAX_VERTICES:
        raise OracleLimitError(
            f"oracle limited to n <= {ORACLE_MAX_VERTICES}, instance has n={net.n}")

    inc_t = cut_incidence(net).astype(np.int64).T
    states = _all_states(prof.radices)
    chunk = max(1, (1 << 22) // inc_t.shape[1])
    flows = np.concatenate([(states[i:i + chunk] @ inc_t).min(axis=1)
                            for i in range(0, len(states), chunk)])
    probs = _vector_probs(states, dist)
    d_max = int((np.asarray(prof.top, dtype=np.int64) @ inc_t).min())
    r = tuple(math.fsum(probs[flows == d]) for d in range(1, d_max + 1))
    return AllLevelsReport(d_max=d_max, r=r, R=suffix_sums(r), n_total=prof.total,
                           n_processed=prof.total,
                           pr_disconnected=math.fsum(probs[flows == 0]),
                           elapsed=time.perf_counter() - t0, method="min-cut-oracle")


@dataclass(frozen=True)
class MonteCarloReport:
    samples: int
    seed: int
    d_max: int
    estimates: tuple[float, ...]
    std_errors: tuple[float, ...]
    generator: str = MC_GENERATOR


def sample_states(dist: EdgeStateDistribution, samples: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Draw ``samples`` state vectors by inverse CDF."""
    u = rng.random((samples, len(dist.probs)))
    out = np.empty(u.shape, dtype=np.int64)
    for k, row in enumerate(dist.probs):
        cdf = np.cumsum(row)
        out[:, k] = np.minimum(np.searchsorted(cdf, u[:, k], side="right"), len(row) - 1)
    return out


def monte_carlo(net: Network, dist: EdgeStateDistribution, samples: int, seed: int,
                chunk: int = 1 << 17) -> MonteCarloReport:
    """Sampling estimate of ``R_d`` with binomial standard errors."""
    check_compatible(net, dist)
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    rng = np.random.Generator(np.random.PCG64(seed))
    solver = FlowSolver(net)
    d_max = solver.value(RadixProfile.of(dist).top)
    counts = np.zeros(d_max + 2, dtype=np.int64)
    cache: dict[tuple[int, ...], int] = {}
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        states = sample_states(dist, size, rng)
        uniq, inverse = np.unique(states, axis=0, return_inverse=True)
        flows = np.empty(len(uniq), dtype=np.int64)
        for i, row in enumerate(uniq):
            key = tuple(int(s) for s in row)
            f = cache.get(key)
            if f is None:
                f = cache[key] = solver.value(key)
            flows[i] = f
        counts += np.bincount(flows[inverse.reshape(-1)], minlength=d_max + 2)
        done += size
    # at-least-d counts
    tail = np.cumsum(counts[::-1])[::-1]
    est = tuple(float(tail[d]) / samples for d in range(1, d_max + 1))
    se = tuple(math.sqrt(p * (1.0 - p) / samples) for p in est)
    return MonteCarloReport(samples, seed, d_max, est, se)
