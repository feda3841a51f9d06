import itertools
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfnrel.maxflow import max_flow
from mfnrel.model import (EdgeStateDistribution, Network, pr_vector, series_network,
                          uniform_distribution)
from mfnrel.reliability import (BudgetExceeded, CompensatedSum, LevelAccumulator,
                                OracleLimitError, SweepTimeout, all_levels_reliability,
                                exhaustive_oracle, monte_carlo, suffix_sums)

from conftest import BRIDGE_PR_DISCONNECTED, BRIDGE_R_EXACT, random_instance

# vector counts per flow level of the five-state bridge, from a networkx sweep
UNIFORM_BRIDGE_COUNTS = (277, 512, 653, 670, 555, 290, 125, 38, 5)


def assert_report_invariants(rep, tol=1e-9):
    assert len(rep.r) == len(rep.R) == rep.d_max
    assert rep.pr_disconnected + math.fsum(rep.r) == pytest.approx(1.0, abs=tol)
    assert all(v >= 0 for v in rep.r)
    assert all(a >= b for a, b in zip(rep.R, rep.R[1:]))
    for d in range(rep.d_max):
        assert rep.R[d] == pytest.approx(math.fsum(rep.r[d:]), abs=1e-15)
    if rep.d_max:
        assert rep.R[-1] == rep.r[-1]
    assert rep.n_processed <= rep.n_total


class TestEngine:
    def test_bridge(self, bridge):
        rep = all_levels_reliability(*bridge)
        assert rep.d_max == 4
        assert rep.r == pytest.approx(BRIDGE_R_EXACT, abs=1e-12)
        assert rep.pr_disconnected == pytest.approx(BRIDGE_PR_DISCONNECTED, abs=1e-12)
        assert (rep.n_total, rep.n_processed, rep.x_fc) == (243, 215, (1, 0, 0, 1, 0))
        assert_report_invariants(rep)

    def test_uniform_bridge(self, bridge):
        rep = all_levels_reliability(bridge[0], uniform_distribution(bridge[0], 4))
        assert rep.d_max == 8
        assert rep.r == pytest.approx([c / 3125 for c in UNIFORM_BRIDGE_COUNTS[1:]], abs=1e-12)
        assert rep.pr_disconnected == pytest.approx(277 / 3125, abs=1e-12)
        assert (rep.n_total, rep.n_processed) == (3125, 2999)

    def test_series_pair(self):
        rep = all_levels_reliability(*series_network(2))
        assert rep.d_max == 1
        assert rep.R == pytest.approx((0.81,), abs=1e-15)

    def test_all_dead(self, bridge):
        rep = all_levels_reliability(bridge[0], uniform_distribution(bridge[0], 0))
        assert (rep.d_max, rep.r, rep.R, rep.pr_disconnected) == (0, (), (), 1.0)
        assert rep.x_fc is None

    def test_sink_unreachable(self):
        net = Network(4, ((1, 2), (2, 3)))
        rep = all_levels_reliability(net, uniform_distribution(net, 3))
        assert rep.d_max == 0 and rep.pr_disconnected == 1.0

    def test_budget(self, bridge):
        dist = uniform_distribution(bridge[0], 4)
        with pytest.raises(BudgetExceeded):
            all_levels_reliability(bridge[0], dist, budget=3000)
        rep = all_levels_reliability(bridge[0], dist, budget=3000, budget_override=True)
        assert rep.n_processed == 2999

    def test_default_budget_refuses_huge_space(self):
        # 2^41 vectors from 41 binary edges on a chain
        net = Network(42, tuple((i, i + 1) for i in range(1, 42)))
        with pytest.raises(BudgetExceeded):
            all_levels_reliability(net, uniform_distribution(net, 1))

    def test_time_limit(self):
        net = Network(8, tuple(itertools.combinations(range(1, 9), 2))[:14])
        with pytest.raises(SweepTimeout):
            all_levels_reliability(net, uniform_distribution(net, 4), time_limit=0.2)

    def test_mismatched_distribution(self, bridge):
        with pytest.raises(ValueError):
            all_levels_reliability(bridge[0], EdgeStateDistribution(((1.0,),)))

    def test_no_skip_same_levels(self, bridge):
        a = all_levels_reliability(*bridge)
        b = all_levels_reliability(*bridge, skip_prefix=False)
        assert a.r == b.r
        assert b.n_processed == 243
        assert a.pr_disconnected == pytest.approx(b.pr_disconnected, abs=1e-15)

    @pytest.mark.parametrize("workers", [2, 3, 7])
    def test_partitioned_serial(self, bridge, workers):
        base = all_levels_reliability(*bridge)
        rep = all_levels_reliability(*bridge, workers=workers, use_processes=False)
        assert rep.r == pytest.approx(base.r, abs=1e-12)
        assert rep.n_processed == base.n_processed and rep.workers == workers

    def test_more_workers_than_vectors(self):
        net, dist = series_network(3)
        rep = all_levels_reliability(net, dist, workers=4, use_processes=False)
        assert rep.R == pytest.approx((0.729,), abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_engine_matches_oracle(seed):
    net, dist = random_instance(random.Random(seed), max_vectors=4000)
    rep = all_levels_reliability(net, dist)
    ref = exhaustive_oracle(net, dist)
    assert rep.d_max == ref.d_max
    assert rep.r == pytest.approx(ref.r, abs=1e-9)
    assert rep.pr_disconnected == pytest.approx(ref.pr_disconnected, abs=1e-9)
    assert_report_invariants(rep)
    assert_report_invariants(ref)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(2, 5))
def test_partition_determinism(seed, workers):
    net, dist = random_instance(random.Random(seed), max_vectors=3000)
    a = all_levels_reliability(net, dist)
    b = all_levels_reliability(net, dist, workers=workers, use_processes=False)
    assert b.r == pytest.approx(a.r, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_binary_consistency(seed):
    rng = random.Random(seed)
    net, _ = random_instance(rng, max_n=6, max_m=10)
    dist = EdgeStateDistribution(tuple((1 - p, p) for p in
                                       (rng.random() for _ in range(net.m))))
    connected = math.fsum(
        pr_vector(x, dist) for x in itertools.product((0, 1), repeat=net.m)
        if max_flow(net, x).value > 0)
    rep = all_levels_reliability(net, dist)
    assert (rep.R[0] if rep.d_max else 0.0) == pytest.approx(connected, abs=1e-12)


class TestSuffixSums:
    def test_examples(self):
        assert suffix_sums((0.5,)) == (0.5,)
        assert suffix_sums((0.0, 0.0)) == (0.0, 0.0)
        assert suffix_sums(BRIDGE_R_EXACT) == pytest.approx(
            (0.99244725, 0.9604198125, 0.723128625, 0.401625), abs=1e-15)

    def test_negative(self):
        with pytest.raises(ValueError):
            suffix_sums((0.1, -0.1))


class TestCompensatedSum:
    def test_tiny_addends(self):
        acc = CompensatedSum(1.0)
        for _ in range(100_000):
            acc.add(1e-17)
        assert acc.value == math.fsum([1.0] + [1e-17] * 100_000)

    def test_merge(self):
        a, b = LevelAccumulator(2), LevelAccumulator(2)
        a.buckets[1].add(0.25)
        b.buckets[1].add(0.5)
        b.count = 3
        a.merge(b)
        assert a.r == (0.75, 0.0) and a.count == 3
        with pytest.raises(ValueError):
            a.merge(LevelAccumulator(1))


class TestOracle:
    def test_bridge(self, bridge):
        ref = exhaustive_oracle(*bridge)
        assert ref.r == pytest.approx(BRIDGE_R_EXACT, abs=1e-12)

    def test_uniform_bridge(self, bridge):
        ref = exhaustive_oracle(bridge[0], uniform_distribution(bridge[0], 4))
        assert ref.r == pytest.approx([c / 3125 for c in UNIFORM_BRIDGE_COUNTS[1:]], abs=1e-12)

    def test_too_large(self):
        net = Network(3, ((1, 2), (2, 3), (1, 3)))
        with pytest.raises(OracleLimitError):
            exhaustive_oracle(net, uniform_distribution(net, 100))
        net = Network(13, tuple((i, i + 1) for i in range(1, 13)))
        with pytest.raises(OracleLimitError):
            exhaustive_oracle(net, uniform_distribution(net, 1))


class TestMonteCarlo:
    def test_reproducible(self, bridge):
        a = monte_carlo(*bridge, samples=1, seed=11)
        assert a == monte_carlo(*bridge, samples=1, seed=11)
        assert set(a.estimates) <= {0.0, 1.0}
        assert a.generator == "PCG64"

    def test_degenerate(self, bridge):
        dist = EdgeStateDistribution(((0.0, 0.0, 1.0),) * 5)
        mc = monte_carlo(bridge[0], dist, samples=500, seed=3)
        assert mc.d_max == 4
        assert mc.estimates == (1.0,) * 4 and mc.std_errors == (0.0,) * 4

    def test_estimates_monotone(self, bridge):
        mc = monte_carlo(*bridge, samples=5000, seed=5, chunk=1024)
        assert all(0 <= e <= 1 for e in mc.estimates)
        assert all(a >= b for a, b in zip(mc.estimates, mc.estimates[1:]))

    def test_chunking_does_not_change_draws(self, bridge):
        assert (monte_carlo(*bridge, samples=3000, seed=9, chunk=1000)
                == monte_carlo(*bridge, samples=3000, seed=9, chunk=3000))

    def test_rejects_zero_samples(self, bridge):
        with pytest.raises(ValueError):
            monte_carlo(*bridge, samples=0, seed=1)

    def test_consistency_across_seeds(self):
        net, dist = random_instance(random.Random(2024), max_vectors=2000, allow_dead=False)
        exact = all_levels_reliability(net, dist)
        inside = 0
        seeds = range(40)
        n = 4000
        for seed in seeds:
            mc = monte_carlo(net, dist, samples=n, seed=seed)
            inside += all(abs(e - R) <= 4 * max(se, math.sqrt(R * (1 - R) / n))
                          for e, R, se in zip(mc.estimates, exact.R, mc.std_errors))
        assert inside >= 0.95 * len(seeds)
