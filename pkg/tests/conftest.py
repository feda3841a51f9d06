import itertools
import math
import random

import pytest
from hypothesis import strategies as st

from mfnrel.model import EdgeStateDistribution, Network, bridge_network

# exact bridge values from an independent networkx + Fraction sweep
BRIDGE_R_EXACT = (512439 / 16000000, 3796659 / 16000000, 2572029 / 8000000, 3213 / 8000)
BRIDGE_PR_DISCONNECTED = 30211 / 4000000


@pytest.fixture
def bridge():
    return bridge_network()


def random_instance(rng: random.Random, max_n=6, max_m=9, max_u=3, max_vectors=10_000,
                    allow_dead=True):
    """Random simple network (possibly disconnected) with random distributions."""
    n = rng.randint(2, max_n)
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    m = rng.randint(1, min(max_m, len(pairs)))
    edges = rng.sample(pairs, m)
    while True:
        lo = 0 if allow_dead else 1
        ups = [rng.randint(lo, max_u) for _ in range(m)]
        if math.prod(u + 1 for u in ups) <= max_vectors:
            break
    rows = []
    for u in ups:
        w = [rng.random() + 0.01 for _ in range(u + 1)]
        rows.append(tuple(x / math.fsum(w) for x in w))
    return Network(n, tuple(edges)), EdgeStateDistribution(tuple(rows))


@st.composite
def networks(draw, max_n=6, max_m=9):
    n = draw(st.integers(2, max_n))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    edges = draw(st.lists(st.sampled_from(pairs), min_size=1,
                          max_size=min(max_m, len(pairs)), unique=True))
    return Network(n, tuple(edges))


@st.composite
def network_and_vector(draw, max_n=6, max_m=9, max_state=3):
    net = draw(networks(max_n, max_m))
    x = tuple(draw(st.lists(st.integers(0, max_state), min_size=net.m, max_size=net.m)))
    return net, x


# --- acceptance summary ---------------------------------------------------------

_criteria = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid or "::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::test_criterion_")[1]
    if report.when == "call" or report.failed:
        prev = _criteria.get(name, "PASS")
        _criteria[name] = "FAIL" if report.failed or prev == "FAIL" else (
            "PASS" if report.passed else report.outcome.upper())


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        num, _, title = name.partition("_")
        terminalreporter.write_line(f"criterion {int(num):2d} {title:<32} {_criteria[name]}")
